"""AMP for sparse linear regression in the sub-linear regime, plus a
linear-regime baseline.

Both runs share one loop.  They differ only in the factor ``scale`` that
enters the tau initialisation, the tau update and the Onsager
normalisation: ``scale = n^(1-alpha)`` for the sub-linear algorithm and
``scale = 1`` for the classical baseline, which behaves as if ``m = delta n``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from amp_sublinear.errors import NumericalDivergenceError, NumericalError, ParameterError
from amp_sublinear.se import QuadratureSpec, mmse_scalar, se_initial_tau

DEFAULT_TOL = 1e-10
ONSAGER_NORMS = ("n_alpha", "n")
TAU_MODES = ("se", "empirical")
_MONOTONE_SLACK = 1e-12


@dataclass
class AmpState:
    x_hat: np.ndarray
    z: np.ndarray
    tau: float
    d: float
    t: int = 0


@dataclass
class AmpTrace:
    tau: list = field(default_factory=list)
    empirical_mse: list = field(default_factory=list)
    se_predicted_mse: list = field(default_factory=list)
    wall_time: list = field(default_factory=list)
    stopped_at: int | None = None
    x_hat: np.ndarray | None = None

    def __len__(self):
        return len(self.tau)

    def rows(self):
        """(iter, tau, empirical_mse, se_predicted_mse) tuples; timings excluded."""
        return list(zip(range(len(self.tau)), self.tau, self.empirical_mse, self.se_predicted_mse))


@dataclass(frozen=True)
class _Config:
    coef: float          # scale / delta, multiplies the scalar mmse in the tau update
    n_norm: float        # divisor of sum(eta') in the Onsager scalar d
    pred_factor: float   # maps tau^2 - noise_var to the n^alpha-normalised MSE the run predicts


def _config(params, scale, onsager_norm):
    if onsager_norm not in ONSAGER_NORMS:
        raise ParameterError(f"onsager_norm must be one of {ONSAGER_NORMS}")
    n_norm = params.n / scale if onsager_norm == "n_alpha" else float(params.n)
    return _Config(
        coef=scale / params.delta,
        n_norm=n_norm,
        pred_factor=params.scale * params.delta / scale,
    )


def empirical_mse(x_hat, s, alpha):
    """``(1/n^alpha) ||x_hat - s||^2``."""
    e = x_hat - s
    return float(e @ e) / float(s.size) ** alpha


def amp_init(params, prior, scale=None):
    """Zero estimate and residual, ``tau_0^2 = noise_var + (scale/delta) E[S^2]``."""
    scale = params.scale if scale is None else scale
    tau = se_initial_tau(prior, params.noise_var, scale / params.delta)
    return AmpState(x_hat=np.zeros(params.n), z=np.zeros(params.m), tau=tau, d=0.0, t=0)


def amp_step(state, inst, prior, params, scale=None, onsager_norm="n_alpha",
             tau_mode="se", quad=QuadratureSpec()):
    scale = params.scale if scale is None else scale
    cfg = _config(params, scale, onsager_norm)
    return _step(state, inst, prior, params, cfg, tau_mode, quad)


def _step(state, inst, prior, params, cfg, tau_mode, quad):
    a = inst.a_matrix
    z = inst.y - a @ state.x_hat + (state.d / params.delta) * state.z
    h = a.T @ z + state.x_hat
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(h))):
        raise NumericalDivergenceError(state.t + 1)
    if tau_mode == "se":
        x_hat, deriv = prior.posterior_moments(h, state.tau)
        tau = float(np.sqrt(params.noise_var + cfg.coef * mmse_scalar(prior, state.tau, quad)))
    elif tau_mode == "empirical":
        # ||z||^2 / m estimates the noise level of the h just formed, so it is
        # used for this denoising step; the recorded tau lags se mode by one
        tau = float(np.sqrt(z @ z / z.size))
        if not tau > 0:
            raise NumericalDivergenceError(state.t + 1, "residual vanished")
        x_hat, deriv = prior.posterior_moments(h, tau)
    else:
        raise ParameterError(f"tau_mode must be one of {TAU_MODES}")
    d = float(deriv.sum()) / cfg.n_norm
    if not (np.all(np.isfinite(x_hat)) and np.isfinite(d) and np.isfinite(tau)):
        raise NumericalDivergenceError(state.t + 1)
    return AmpState(x_hat=x_hat, z=z, tau=tau, d=d, t=state.t + 1)


def _run(inst, prior, params, itermax, scale, onsager_norm, tau_mode, tol, quad):
    if itermax < 0:
        raise ParameterError("itermax must be non-negative")
    cfg = _config(params, scale, onsager_norm)
    trace = AmpTrace()

    def record(st, elapsed):
        trace.tau.append(st.tau)
        trace.empirical_mse.append(empirical_mse(st.x_hat, inst.s, params.alpha))
        trace.se_predicted_mse.append(cfg.pred_factor * (st.tau**2 - params.noise_var))
        trace.wall_time.append(elapsed)

    t0 = time.perf_counter()
    state = amp_init(params, prior, scale)
    record(state, time.perf_counter() - t0)
    for _ in range(itermax):
        t0 = time.perf_counter()
        prev_tau = state.tau
        state = _step(state, inst, prior, params, cfg, tau_mode, quad)
        record(state, time.perf_counter() - t0)
        if tau_mode == "se" and state.tau > prev_tau * (1 + _MONOTONE_SLACK):
            raise NumericalError(f"tau increased at iteration {state.t}: {prev_tau} -> {state.tau}")
        if tol is not None and abs(state.tau - prev_tau) < tol:
            trace.stopped_at = state.t
            break
    # after an early stop the remaining rows carry the final state forward
    while len(trace) < itermax + 1:
        trace.tau.append(trace.tau[-1])
        trace.empirical_mse.append(trace.empirical_mse[-1])
        trace.se_predicted_mse.append(trace.se_predicted_mse[-1])
        trace.wall_time.append(0.0)
    trace.x_hat = state.x_hat
    return trace


def amp_run(inst, prior, params, itermax, onsager_norm="n_alpha", tau_mode="se",
            tol=DEFAULT_TOL, quad=QuadratureSpec()):
    """Run the sub-linear AMP for ``itermax`` iterations.

    The returned trace has ``itermax + 1`` rows, the first being the
    initial state.  ``tol=None`` disables early stopping.
    """
    return _run(inst, prior, params, itermax, params.scale, onsager_norm, tau_mode, tol, quad)


def classical_amp_run(inst, prior, params, itermax, onsager_norm="n_alpha", tau_mode="se",
                      tol=DEFAULT_TOL, quad=QuadratureSpec()):
    """Same loop with every ``n^(1-alpha)/delta`` replaced by ``1/delta``."""
    return _run(inst, prior, params, itermax, 1.0, onsager_norm, tau_mode, tol, quad)
