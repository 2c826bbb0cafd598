"""Replica-symmetric potential and the MMSE it predicts.

    f_RS(E; D) = psi(E; D) + i_den(Sigma(E; D))
    psi(E; D)  = (delta/2) [log(1 + E/D) - E/(E + D)]
    Sigma^2    = (E + D) n^(1-alpha) / delta
    i_den(S)   = n^(1-alpha) I(U; U + S W),  U ~ prior, W ~ N(0, 1)

The predicted MMSE is ``n^(1-alpha) * E*`` with ``E*`` the global minimiser
over ``[0, nu]``, ``nu = n^(alpha-1) E_{P_0}[S^2]``.

Noise mapping.  The measurement model draws ``A_ij ~ N(0, 1/m)``, whereas
the potential is written for ``A_ij ~ N(0, 1/n)``.  Rescaling ``y`` by
``sqrt(m/n)`` converts one into the other with noise
``D = noise_var * delta * n^(alpha-1)``; that is the ``"rescaled"`` mapping
(the default).  Under it the stationarity condition ``E = mmse(Sigma(E))``
coincides with the state-evolution fixed point.  ``"identity"`` plugs
``noise_var`` in directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad_vec

from amp_sublinear.errors import NumericalError, ParameterError, TransitionProximityError

NOISE_MAPPINGS = ("rescaled", "identity")
DEFAULT_GRID = 1024
JUMP_FRACTION = 0.10
DEGENERACY_TOL = 1e-6
_U_HALF_WIDTH = 12.0
_REFINE_RTOL = 1e-12


def psi(E, noise_var, delta):
    E = np.asarray(E, dtype=float)
    r = E / noise_var
    return 0.5 * delta * (np.log1p(r) - r / (1.0 + r))


def sigma(E, noise_var, delta, n, alpha):
    return np.sqrt((np.asarray(E, dtype=float) + noise_var) * float(n) ** (1.0 - alpha) / delta)


def _mutual_information(prior, sig, rtol):
    """``I(U; U + sig W)`` in nats for an array of noise levels.

    Uses ``H(Y) - (1/2) log(2 pi e sig^2)`` with the Gaussian part of
    ``log f_Y`` cancelled analytically, component by component:

        I = sum_b p_b  int phi(u) L_b(u) du,
        L_b(u) = -log sum_c p_c exp(-(a_b - a_c)^2 / (2 sig^2) - u (a_b - a_c) / sig)

    which is bounded by ``-log p_b`` and free of cancellation at both ends
    of the ``sig`` range.  Each component is integrated over ``|u| <= 12``.
    """
    sig = np.atleast_1d(np.asarray(sig, dtype=float))
    a, p = prior.values, prior.probs
    if a.size == 1:
        return np.zeros_like(sig)
    diff = a[:, None] - a[None, :]                      # (b, c)
    logp = np.log(p)
    inv = 1.0 / sig                                     # (j,)
    const = logp[None, None, :] - 0.5 * diff[None] ** 2 * (inv**2)[:, None, None]  # (j, b, c)
    slope = diff[None] * inv[:, None, None]             # (j, b, c)

    def integrand(u):
        # max-shifted log-sum-exp over c; the c = b term is exactly log p_b
        arg = const - u * slope
        top = arg.max(axis=-1)
        lb = -(top + np.log(np.exp(arg - top[..., None]).sum(axis=-1)))  # (j, b)
        return math.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi) * (lb @ p)

    res, err, info = quad_vec(integrand, -_U_HALF_WIDTH, _U_HALF_WIDTH, epsabs=1e-15,
                              epsrel=rtol, norm="max", points=(0.0,), full_output=True)
    if not info.success:
        raise NumericalError(f"i_den quadrature did not converge (error estimate {err:g})")
    return np.maximum(res, 0.0)


def i_den(prior, sig, n, alpha, rtol=1e-9):
    """``n^(1-alpha) I(U; U + sig W)``; scalar in, scalar out."""
    arr = np.asarray(sig, dtype=float)
    if np.any(~(arr > 0)):
        raise ParameterError("sigma must be positive")
    out = float(n) ** (1.0 - alpha) * _mutual_information(prior, arr, rtol)
    return float(out[0]) if arr.ndim == 0 else out


def effective_noise(params, noise_mapping="rescaled"):
    if noise_mapping == "rescaled":
        return params.noise_var * params.delta * params.n_alpha / params.n
    if noise_mapping == "identity":
        return params.noise_var
    raise ParameterError(f"noise_mapping must be one of {NOISE_MAPPINGS}")


def nu_max(prior, params):
    """Upper end of the E domain: ``n^(alpha-1) E_{P_0}[S^2]``, with ``E_{P_0}[S^2] = E[S^2] n / k``."""
    return params.n_alpha / params.k * prior.second_moment()


def _potential(E, prior, params, noise, rtol=1e-9):
    sig = sigma(E, noise, params.delta, params.n, params.alpha)
    return psi(E, noise, params.delta) + i_den(prior, sig, params.n, params.alpha, rtol)


def f_rs(E, prior, params, noise_mapping="rescaled"):
    return _potential(E, prior, params, effective_noise(params, noise_mapping))


@dataclass
class RsCurve:
    e_grid: np.ndarray
    f_values: np.ndarray
    e_star: float
    f_star: float
    mmse_pred: float
    nu: float
    noise_eff: float
    noise_mapping: str
    secondary_minima: list = field(default_factory=list)

    def summary(self):
        return {
            "e_star": self.e_star,
            "f_star": self.f_star,
            "mmse_pred": self.mmse_pred,
            "nu": self.nu,
            "noise_eff": self.noise_eff,
            "noise_mapping": self.noise_mapping,
            "secondary_minima": [list(m) for m in self.secondary_minima],
        }


def _golden(f, lo, hi, xtol):
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > xtol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv_phi * (hi - lo)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def _minimize(prior, params, noise, grid_size, noise_mapping):
    if grid_size < 64:
        raise ParameterError("grid_size must be at least 64")
    nu = nu_max(prior, params)
    scale = params.scale
    if nu == 0.0:
        grid = np.zeros(1)
        fv = np.asarray([_potential(0.0, prior, params, noise)])
        return RsCurve(grid, fv, 0.0, float(fv[0]), 0.0, nu, noise, noise_mapping)
    grid = np.linspace(0.0, nu, grid_size)
    fv = np.asarray(_potential(grid, prior, params, noise))

    def fine(e):
        return float(_potential(e, prior, params, noise, rtol=_REFINE_RTOL))

    left = np.r_[np.inf, fv[:-1]]
    right = np.r_[fv[1:], np.inf]
    candidates = np.flatnonzero((fv <= left) & (fv <= right))
    minima = []
    for i in candidates:
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid_size - 1)]
        e, fe = _golden(fine, lo, hi, nu * 1e-8)
        # golden section never samples the interval ends; keep a boundary grid point if it is lower
        for edge in (lo, hi):
            if edge in (0.0, nu):
                fe_edge = fine(edge)
                if fe_edge < fe:
                    e, fe = edge, fe_edge
        minima.append((float(e), float(fe)))
    e_star, f_star = min(minima, key=lambda m: m[1])
    step = nu / (grid_size - 1)
    secondary = [
        (e, fe) for e, fe in minima
        if abs(e - e_star) > 2 * step and fe - f_star < DEGENERACY_TOL
    ]
    return RsCurve(grid, fv, e_star, f_star, scale * e_star, nu, noise, noise_mapping, secondary)


def minimize_rs(prior, params, grid_size=DEFAULT_GRID, noise_mapping="rescaled"):
    """Grid scan of ``f_RS`` over ``[0, nu]`` followed by golden-section refinement.

    Every grid-local minimum is refined; those within ``1e-6`` of the
    global value are reported in ``secondary_minima`` rather than
    tie-broken.
    """
    return _minimize(prior, params, effective_noise(params, noise_mapping), grid_size, noise_mapping)


def immse_residual(prior, params, noise_mapping="rescaled", rel_step=1e-4, grid_size=DEFAULT_GRID,
                   return_parts=False):
    """Check ``(2/delta) d(min_E f_RS)/d(1/D) = E*/(1 + E*/D)``.

    ``D`` is the noise entering the potential (see ``effective_noise``); the
    prior is held fixed.  Central differences in ``1/D`` with relative step
    ``rel_step``.  Returns the absolute residual, or ``(residual, lhs, rhs)``
    when ``return_parts`` is set.
    """
    noise = effective_noise(params, noise_mapping)
    lam = 1.0 / noise
    h = rel_step * lam
    centre = _minimize(prior, params, noise, grid_size, noise_mapping)
    plus = _minimize(prior, params, 1.0 / (lam + h), grid_size, noise_mapping)
    minus = _minimize(prior, params, 1.0 / (lam - h), grid_size, noise_mapping)
    if abs(plus.e_star - minus.e_star) > JUMP_FRACTION * centre.nu or centre.secondary_minima:
        raise TransitionProximityError(
            f"RS minimiser jumps across the stencil at noise {noise:g} "
            f"({minus.e_star:g} -> {plus.e_star:g})"
        )
    lhs = (2.0 / params.delta) * (plus.f_star - minus.f_star) / (2.0 * h)
    e = centre.e_star
    rhs = e / (1.0 + e / noise)
    res = abs(lhs - rhs)
    return (res, lhs, rhs) if return_parts else res


def locate_transition(prior, params, delta_n_range, steps=32, noise_mapping="rescaled",
                      grid_size=DEFAULT_GRID, rel_width=1e-4):
    """First noise level in ``delta_n_range`` where the RS minimiser jumps.

    The range is scanned on a log grid with the prior held fixed; a jump is
    an increase of ``e_star`` by more than 10% of ``nu`` between neighbours.
    The bracket is bisected to relative width ``rel_width`` and its
    midpoint returned.  Returns ``None`` when no jump is found.
    """
    if steps < 16:
        raise ParameterError("steps must be at least 16")
    lo_d, hi_d = sorted(delta_n_range)
    nu = nu_max(prior, params)
    if nu == 0.0:
        return None

    def e_star(d):
        return minimize_rs(prior, params.with_(noise_var=d), grid_size, noise_mapping).e_star

    ds = np.geomspace(lo_d, hi_d, steps)
    es = [e_star(d) for d in ds]
    for i in range(steps - 1):
        if abs(es[i + 1] - es[i]) > JUMP_FRACTION * nu:
            lo, hi, e_lo, e_hi = ds[i], ds[i + 1], es[i], es[i + 1]
            while (hi - lo) / lo > rel_width:
                mid = math.sqrt(lo * hi)
                e_mid = e_star(mid)
                if abs(e_mid - e_lo) >= abs(e_hi - e_mid):
                    hi, e_hi = mid, e_mid
                else:
                    lo, e_lo = mid, e_mid
            return 0.5 * (lo + hi)
    return None
