"""Finite-atom priors and the Bayes-optimal scalar Gaussian denoiser.

The denoiser of a prior ``P = sum_b p_b delta(s - a_b)`` observed through
``x = S + tau * Z`` is the posterior mean ``E[S | x]``.  Every quantity here
goes through :meth:`DiscretePrior.posterior_weights`, which works in log
space so that large ``|x| / tau**2`` never overflows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from amp_sublinear.errors import ParameterError

PROB_SUM_TOL = 1e-12
MERGE_TOL = 1e-12
MIN_TAU = 1e-12


@dataclass(frozen=True)
class DiscretePrior:
    """Distribution with finitely many atoms.

    ``values`` and ``probs`` are stored as read-only float arrays.  Atoms
    must be distinct and probabilities strictly positive, summing to one.
    """

    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        probs = np.array(self.probs, dtype=float).reshape(-1)
        if values.size == 0 or values.shape != probs.shape:
            raise ParameterError("values and probs must be non-empty and of equal length")
        if not np.all(np.isfinite(values)):
            raise ParameterError("atom values must be finite")
        if np.any(probs <= 0) or not np.all(np.isfinite(probs)):
            raise ParameterError("atom probabilities must be strictly positive")
        if abs(probs.sum() - 1.0) > PROB_SUM_TOL:
            raise ParameterError(f"atom probabilities sum to {probs.sum()!r}, not 1")
        if np.unique(values).size != values.size:
            raise ParameterError("atom values must be pairwise distinct")
        values.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_atoms(cls, atoms):
        """Build from an iterable of ``(value, prob)`` pairs."""
        atoms = list(atoms)
        return cls([a for a, _ in atoms], [p for _, p in atoms])

    @property
    def atoms(self):
        return list(zip(self.values.tolist(), self.probs.tolist()))

    @property
    def size(self):
        return self.values.size

    @property
    def s_max(self):
        return float(np.max(np.abs(self.values)))

    def mean(self):
        return float(np.dot(self.probs, self.values))

    def second_moment(self):
        return float(np.dot(self.probs, self.values**2))

    def fourth_moment(self):
        return float(np.dot(self.probs, self.values**4))

    def entropy(self):
        """Shannon entropy of the atom distribution, in nats."""
        return float(-np.dot(self.probs, np.log(self.probs)))

    def sample(self, count, rng):
        if count < 0:
            raise ParameterError("count must be non-negative")
        if count == 0:
            return np.empty(0)
        idx = rng.choice(self.size, size=count, p=self.probs)
        return self.values[idx]

    # -- Gaussian channel ------------------------------------------------

    def _check_tau(self, tau):
        tau = np.asarray(tau, dtype=float)
        if np.any(~(tau >= MIN_TAU)):
            raise ParameterError(f"tau must be >= {MIN_TAU}, got {tau.min() if tau.size else tau!r}")
        return tau

    def posterior_weights(self, x, tau):
        """Posterior probabilities of each atom given ``x = S + tau Z``.

        Returns an array of shape ``broadcast(x, tau).shape + (B,)``.
        The common ``-x**2 / (2 tau**2)`` term is dropped before the
        max-shift, so atom logits differ only through ``x * a_b``.
        """
        tau = self._check_tau(tau)
        x = np.asarray(x, dtype=float)
        inv_var = 1.0 / (tau * tau)
        a = self.values
        logits = (
            np.log(self.probs)
            + (x[..., None] * a - 0.5 * a * a) * np.asarray(inv_var)[..., None]
        )
        logits -= logits.max(axis=-1, keepdims=True)
        w = np.exp(logits)
        w /= w.sum(axis=-1, keepdims=True)
        return w

    def posterior_mean(self, x, tau):
        w = self.posterior_weights(x, tau)
        return w @ self.values

    def posterior_variance(self, x, tau):
        w = self.posterior_weights(x, tau)
        mean = w @ self.values
        # centred form keeps relative accuracy when the posterior is concentrated
        return np.einsum("...b,...b->...", w, (self.values - mean[..., None]) ** 2)

    def posterior_mean_deriv(self, x, tau):
        """d/dx of the posterior mean: posterior variance over tau**2."""
        tau = self._check_tau(tau)
        return self.posterior_variance(x, tau) / (tau * tau)

    def posterior_moments(self, x, tau):
        """Posterior mean and derivative in a single pass over the weights."""
        tau = self._check_tau(tau)
        w = self.posterior_weights(x, tau)
        mean = w @ self.values
        var = np.einsum("...b,...b->...", w, (self.values - mean[..., None]) ** 2)
        return mean, var / (tau * tau)


def make_sparse_prior(base, rho):
    """Mix ``base`` with a point mass at zero: ``(1 - rho) delta_0 + rho base``.

    Atoms of ``base`` within ``MERGE_TOL`` of zero are merged into the zero
    atom.  With ``rho == 1`` no zero atom is added.
    """
    if not (0.0 < rho <= 1.0):
        raise ParameterError(f"rho must lie in (0, 1], got {rho!r}")
    values = list(base.values)
    probs = [rho * p for p in base.probs]
    zero_mass = 1.0 - rho
    keep_v, keep_p = [], []
    for v, p in zip(values, probs):
        if abs(v) <= MERGE_TOL:
            zero_mass += p
        else:
            keep_v.append(v)
            keep_p.append(p)
    if zero_mass > 0.0:
        keep_v.insert(0, 0.0)
        keep_p.insert(0, zero_mass)
    keep_p = np.asarray(keep_p)
    return DiscretePrior(keep_v, keep_p / keep_p.sum())


def bernoulli_rademacher(amplitude, rho):
    """Sparse symmetric prior: 0 w.p. ``1 - rho``, ``+-amplitude`` w.p. ``rho/2`` each."""
    if amplitude <= 0:
        raise ParameterError("amplitude must be positive")
    return make_sparse_prior(DiscretePrior([amplitude, -amplitude], [0.5, 0.5]), rho)


def prior_from_config(cfg, noise_var=None, rho=None):
    """Build a prior from a flat config mapping (``prior.kind`` and friends).

    ``prior.kind = "bernoulli-rademacher"`` takes ``prior.amplitude`` (a number,
    or ``"sqrt_noise"`` for the amplitude ``sqrt(noise_var)`` of the
    reference experiments) and ``prior.rho`` (defaults to ``rho``, i.e. k/n).
    ``prior.kind = "atoms"`` takes ``prior.values`` and ``prior.probs``; the
    listed atoms form the base prior, mixed with zero at rate ``prior.rho``
    when given.
    """
    kind = cfg.get("prior.kind", "bernoulli-rademacher")
    r = cfg.get("prior.rho", rho)
    if kind == "bernoulli-rademacher":
        amp = cfg.get("prior.amplitude", "sqrt_noise")
        if amp == "sqrt_noise":
            if noise_var is None:
                raise ParameterError("prior.amplitude = sqrt_noise needs a noise variance")
            amp = float(np.sqrt(noise_var))
        if r is None:
            raise ParameterError("prior.rho is required")
        return bernoulli_rademacher(float(amp), float(r))
    if kind == "atoms":
        if "prior.values" not in cfg or "prior.probs" not in cfg:
            raise ParameterError("prior.kind = atoms needs prior.values and prior.probs")
        base = DiscretePrior(cfg["prior.values"], cfg["prior.probs"])
        if "prior.rho" in cfg:
            return make_sparse_prior(base, float(cfg["prior.rho"]))
        return base
    raise ParameterError(f"unknown prior.kind {kind!r}")
