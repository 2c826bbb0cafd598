"""Scalar state evolution for AMP with a Bayes-optimal denoiser.

The recursion is

    tau_0^2     = noise_var + c * E[S^2]
    tau_{t+1}^2 = noise_var + c * mmse(tau_t)

with ``c = n^(1-alpha) / delta`` and ``mmse(tau)`` the posterior-mean error of
the scalar channel ``S + tau Z``.  Expectations over ``S`` are exact atom
sums; the ``Z`` integral uses Gauss-Hermite quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from amp_sublinear.errors import ConvergenceError, ParameterError

DEFAULT_NODES = 101
MAX_FIXED_POINT_ITERS = 10**4


@dataclass(frozen=True)
class QuadratureSpec:
    node_count: int = DEFAULT_NODES

    def __post_init__(self):
        if self.node_count < 21 or self.node_count % 2 == 0:
            raise ParameterError(f"node_count must be odd and >= 21, got {self.node_count}")

    def nodes(self):
        return _hermite_nodes(self.node_count)


@lru_cache(maxsize=None)
def _hermite_nodes(count):
    # probabilists' Hermite: weight exp(-z^2/2); normalise to the N(0,1) density
    z, w = np.polynomial.hermite_e.hermegauss(count)
    w = w / np.sqrt(2.0 * np.pi)
    z.setflags(write=False)
    w.setflags(write=False)
    return z, w


def mmse_scalar(prior, tau, quad=QuadratureSpec()):
    """``E[(eta(U + tau Z, tau) - U)^2]`` for ``U ~ prior``, ``Z ~ N(0, 1)``."""
    if not tau > 0:
        raise ParameterError(f"tau must be positive, got {tau!r}")
    z, w = quad.nodes()
    a = prior.values
    x = a[:, None] + tau * z[None, :]
    err = (prior.posterior_mean(x, tau) - a[:, None]) ** 2
    return float(prior.probs @ (err @ w))


def se_step(prior, tau, noise_var, coef, quad=QuadratureSpec()):
    """One application of the state-evolution map, returning the new tau."""
    return float(np.sqrt(noise_var + coef * mmse_scalar(prior, tau, quad)))


def se_initial_tau(prior, noise_var, coef):
    return float(np.sqrt(noise_var + coef * prior.second_moment()))


@dataclass(frozen=True)
class SeTrace:
    tau: list
    predicted_mse: list

    def __len__(self):
        return len(self.tau)


def se_trace(prior, params, itermax, quad=QuadratureSpec()):
    """Deterministic ``tau_0 .. tau_itermax`` and predicted MSE ``delta (tau_t^2 - noise_var)``."""
    if itermax < 0:
        raise ParameterError("itermax must be non-negative")
    coef = params.scale / params.delta
    taus = [se_initial_tau(prior, params.noise_var, coef)]
    for _ in range(itermax):
        taus.append(se_step(prior, taus[-1], params.noise_var, coef, quad))
    pred = [params.delta * (t * t - params.noise_var) for t in taus]
    return SeTrace(tau=taus, predicted_mse=pred)


def se_fixed_point(prior, params, quad=QuadratureSpec(), tol=1e-12, max_iter=MAX_FIXED_POINT_ITERS):
    """Iterate the state-evolution map from ``tau_0`` until ``|tau_{t+1} - tau_t| < tol``.

    Returns ``(tau_star, iterations)``.  No damping is applied, so the
    result is the limit AMP itself follows.
    """
    if not tol > 0:
        raise ParameterError("tol must be positive")
    coef = params.scale / params.delta
    tau = se_initial_tau(prior, params.noise_var, coef)
    for it in range(1, max_iter + 1):
        new = se_step(prior, tau, params.noise_var, coef, quad)
        if abs(new - tau) < tol:
            return new, it
        tau = new
    raise ConvergenceError(f"state evolution did not converge within {max_iter} iterations (tau={tau})")
