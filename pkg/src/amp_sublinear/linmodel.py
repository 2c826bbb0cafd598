"""Measurement model ``y = A s + sqrt(noise_var) w`` with ``m = delta * n**alpha``."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from amp_sublinear.errors import ParameterError, ResourceError
from amp_sublinear.prior import make_sparse_prior

# Largest m*n entry count generate_instance will allocate (~800 MB of float64).
DEFAULT_MAX_ENTRIES = 10**8

# Stream purposes under one trial seed; the ids are part of the seeding contract.
STREAM_MATRIX, STREAM_SIGNAL, STREAM_NOISE = 0, 1, 2


class MatrixNorm(str, enum.Enum):
    ONE_OVER_M = "one_over_m"
    ONE_OVER_N = "one_over_n"


def derive_dims(n, alpha, delta):
    """Return ``(m, k)`` with ``m = max(1, round(delta n^alpha))`` and ``k = max(1, round(n^alpha))``."""
    na = float(n) ** alpha
    m = max(1, int(round(delta * na)))
    k = max(1, int(round(na)))
    return m, min(k, n)


def snr_to_noise(snr_db):
    """Noise variance for ``SNR = -10 log10(noise_var)`` in dB."""
    return 10.0 ** (-snr_db / 10.0)


@dataclass(frozen=True)
class ModelParams:
    n: int
    alpha: float
    delta: float
    noise_var: float
    k: int | None = None
    matrix_norm: MatrixNorm = MatrixNorm.ONE_OVER_M
    seed: int = 0
    m: int = field(init=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"n must be a positive integer, got {self.n!r}")
        if not (0.0 < self.alpha <= 1.0):
            raise ParameterError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if not self.delta > 0:
            raise ParameterError(f"delta must be positive, got {self.delta!r}")
        if not self.noise_var > 0:
            raise ParameterError(f"noise_var must be positive, got {self.noise_var!r}")
        m, k_default = derive_dims(self.n, self.alpha, self.delta)
        k = k_default if self.k is None else int(self.k)
        if not (1 <= k <= self.n):
            raise ParameterError(f"k must lie in [1, n], got {k}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "matrix_norm", MatrixNorm(self.matrix_norm))

    @classmethod
    def from_snr(cls, n, alpha, delta, snr_db, **kw):
        return cls(n=n, alpha=alpha, delta=delta, noise_var=snr_to_noise(snr_db), **kw)

    @property
    def rho(self):
        """Sparsity rate k/n."""
        return self.k / self.n

    @property
    def n_alpha(self):
        return float(self.n) ** self.alpha

    @property
    def scale(self):
        """``n^(1-alpha)``, the factor separating the sub-linear from the linear regime."""
        return float(self.n) ** (1.0 - self.alpha)

    @property
    def snr_db(self):
        return -10.0 * np.log10(self.noise_var)

    def with_(self, **changes):
        """Copy with changes; a derived k is re-derived when n or alpha change."""
        if "k" not in changes and ({"n", "alpha"} & changes.keys()):
            changes["k"] = None
        return replace(self, **changes)

    def sparse_prior(self, base):
        return make_sparse_prior(base, self.rho)


@dataclass(frozen=True)
class ProblemInstance:
    a_matrix: np.ndarray
    s: np.ndarray
    w: np.ndarray
    y: np.ndarray
    noise_var: float

    @property
    def m(self):
        return self.a_matrix.shape[0]

    @property
    def n(self):
        return self.a_matrix.shape[1]


def trial_streams(master_seed, trial):
    """Independent generators for (matrix, signal, noise) of one trial.

    The stream for purpose ``p`` of trial ``t`` is seeded by
    ``SeedSequence(master_seed, spawn_key=(t, p))``, which is injective in
    ``(t, p)`` for a fixed master seed.
    """
    return tuple(
        np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(int(trial), p)))
        for p in (STREAM_MATRIX, STREAM_SIGNAL, STREAM_NOISE)
    )


def generate_instance(params, rng, prior, max_entries=DEFAULT_MAX_ENTRIES):
    """Draw one problem instance.

    ``rng`` is either a single ``Generator`` (used for A, then s, then w) or
    a triple of generators as returned by :func:`trial_streams`.
    """
    m, n = params.m, params.n
    if m * n > max_entries:
        raise ResourceError(f"m*n = {m * n} exceeds the budget of {max_entries} entries")
    if isinstance(rng, tuple):
        rng_a, rng_s, rng_w = rng
    else:
        rng_a = rng_s = rng_w = rng
    var = 1.0 / m if params.matrix_norm is MatrixNorm.ONE_OVER_M else 1.0 / n
    a_matrix = rng_a.standard_normal((m, n)) * np.sqrt(var)
    s = prior.sample(n, rng_s)
    w = rng_w.standard_normal(m)
    y = a_matrix @ s + np.sqrt(params.noise_var) * w
    for arr in (a_matrix, s, w, y):
        arr.setflags(write=False)
    return ProblemInstance(a_matrix=a_matrix, s=s, w=w, y=y, noise_var=params.noise_var)
