"""Exact posterior mean ``E[S | y]`` by enumerating every atom configuration.

Only for tiny instances: the cost is ``B^n`` configurations.  The
enumeration is exact; there is no sampling fallback.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from amp_sublinear.amp import amp_run, classical_amp_run, empirical_mse
from amp_sublinear.errors import ParameterError, ResourceError
from amp_sublinear.linmodel import generate_instance, trial_streams

_CHUNK = 1 << 15


@dataclass(frozen=True)
class EnumerationBudget:
    max_configs: int = 10**6

    def check(self, atom_count, n):
        total = atom_count**n
        if total > self.max_configs:
            raise ResourceError(
                f"{atom_count}^{n} = {total} configurations exceed the budget of {self.max_configs}"
            )
        return total


def _config_chunk(start, stop, n, base):
    r = np.arange(start, stop, dtype=np.int64)
    digits = np.empty((r.size, n), dtype=np.int64)
    for i in range(n):
        digits[:, i] = r % base
        r //= base
    return digits


def exact_posterior_mean(inst, prior, budget=EnumerationBudget(), return_weight_sum=False):
    """Posterior mean of ``s`` given ``y`` under an i.i.d. ``prior`` and Gaussian noise.

    Weights ``prod_i p(x_i) exp(-||y - A x||^2 / (2 noise_var))`` are
    accumulated chunk by chunk with a running log-sum-exp shift.  With
    ``return_weight_sum`` the sum of the normalised weights is returned too.
    """
    n = inst.n
    B = prior.size
    total = budget.check(B, n)
    a, y, noise = inst.a_matrix, inst.y, inst.noise_var
    logp = np.log(prior.probs)
    shift = -np.inf
    w_sum = 0.0
    wx_sum = np.zeros(n)
    chunks = []
    for start in range(0, total, _CHUNK):
        idx = _config_chunk(start, min(start + _CHUNK, total), n, B)
        x = prior.values[idx]
        r = y[None, :] - x @ a.T
        logw = logp[idx].sum(axis=1) - 0.5 * np.einsum("cm,cm->c", r, r) / noise
        top = logw.max()
        if top > shift:
            rescale = np.exp(shift - top) if np.isfinite(shift) else 0.0
            w_sum *= rescale
            wx_sum *= rescale
            shift = top
        w = np.exp(logw - shift)
        w_sum += w.sum()
        wx_sum += w @ x
        if return_weight_sum:
            chunks.append(logw)
    mean = wx_sum / w_sum
    if not return_weight_sum:
        return mean
    norm_sum = float(sum((np.exp(lw - shift) / w_sum).sum() for lw in chunks))
    return mean, norm_sum


def exact_mmse_mc(params, prior, trials, budget=EnumerationBudget(), rng=0):
    """Monte-Carlo estimate of ``(1/n^alpha) E||S - E[S|Y]||^2``.

    ``rng`` is a master seed (trial ``t`` uses :func:`trial_streams`) or a
    ``Generator``.  Returns ``(mmse, stderr)``.
    """
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    budget.check(prior.size, params.n)
    errs = np.empty(trials)
    for t in range(trials):
        streams = rng if isinstance(rng, np.random.Generator) else trial_streams(rng, t)
        inst = generate_instance(params, streams, prior)
        errs[t] = empirical_mse(exact_posterior_mean(inst, prior, budget), inst.s, params.alpha)
    return _mean_se(errs)


def _mean_se(values):
    values = np.asarray(values, dtype=float)
    se = float(values.std(ddof=1) / np.sqrt(values.size)) if values.size > 1 else 0.0
    return float(values.mean()), se


def oracle_check(params, prior, trials, seed=0, itermax=10, budget=EnumerationBudget()):
    """Exact MMSE against AMP (and the classical baseline) on the same instances."""
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    budget.check(prior.size, params.n)
    exact, amp, classical, wsum_dev = [], [], [], 0.0
    for t in range(trials):
        inst = generate_instance(params, trial_streams(seed, t), prior)
        est, wsum = exact_posterior_mean(inst, prior, budget, return_weight_sum=True)
        wsum_dev = max(wsum_dev, abs(wsum - 1.0))
        exact.append(empirical_mse(est, inst.s, params.alpha))
        amp.append(amp_run(inst, prior, params, itermax).empirical_mse[-1])
        classical.append(classical_amp_run(inst, prior, params, itermax).empirical_mse[-1])
    e_m, e_se = _mean_se(exact)
    a_m, a_se = _mean_se(amp)
    c_m, c_se = _mean_se(classical)
    return {
        "n": params.n,
        "m": params.m,
        "trials": trials,
        "exact_mmse": e_m,
        "stderr": e_se,
        "amp_mse": a_m,
        "amp_stderr": a_se,
        "classical_mse": c_m,
        "classical_stderr": c_se,
        "max_weight_sum_deviation": wsum_dev,
        "dominance_ok": bool(e_m <= a_m + 2 * np.hypot(e_se, a_se)),
        "classical_dominance_ok": bool(e_m <= c_m + 2 * np.hypot(e_se, c_se)),
    }
