"""Monte-Carlo sweeps over SNR or alpha, and single end-to-end runs.

Seeding: trial ``t`` of every axis value draws its instance from
``trial_streams(master_seed, t)``, so a given trial reuses the same random
streams across axis values (common random numbers) and reruns with the
same master seed reproduce every row bit for bit.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from amp_sublinear.amp import amp_run, classical_amp_run
from amp_sublinear.errors import NumericalError, ParameterError
from amp_sublinear.linmodel import generate_instance, snr_to_noise, trial_streams
from amp_sublinear.oracle import EnumerationBudget, oracle_check
from amp_sublinear.prior import prior_from_config
from amp_sublinear.rs import minimize_rs
from amp_sublinear.se import se_trace

log = logging.getLogger(__name__)

CSV_HEADER = ("axis", "n", "alpha", "delta", "snr_db", "trial", "iter", "mse_amp",
              "mse_classical", "se_pred", "rs_mmse", "tau", "aborted")


class SweepAxis(str, enum.Enum):
    SNR_DB = "snr_db"
    ALPHA = "alpha"


@dataclass
class SweepConfig:
    base: object                      # ModelParams
    sweep_axis: SweepAxis
    axis_values: list
    trials: int = 200
    itermax: int = 10
    run_classical: bool = True
    run_rs: bool = True
    noise_mapping: str = "rescaled"
    output_path: str | None = None
    prior_cfg: dict = field(default_factory=dict)
    onsager_norm: str = "n_alpha"

    def __post_init__(self):
        self.sweep_axis = SweepAxis(self.sweep_axis)
        self.axis_values = [float(v) for v in self.axis_values]
        if not self.axis_values:
            raise ParameterError("axis_values must be non-empty")
        if self.axis_values != sorted(self.axis_values):
            raise ParameterError("axis_values must be sorted")
        if self.trials < 1:
            raise ParameterError("trials must be at least 1")
        if self.itermax < 1:
            raise ParameterError("itermax must be at least 1")

    def params_at(self, value):
        if self.sweep_axis is SweepAxis.SNR_DB:
            return self.base.with_(noise_var=snr_to_noise(value))
        return self.base.with_(alpha=value)

    def prior_at(self, params):
        return prior_from_config(self.prior_cfg, noise_var=params.noise_var, rho=params.rho)


@dataclass
class SweepRow:
    axis: float
    n: int
    alpha: float
    delta: float
    snr_db: float
    trial: int
    iter: int
    mse_amp: float | None
    mse_classical: float | None
    se_pred: float
    rs_mmse: float | None
    tau: float
    aborted: bool = False

    def to_csv(self):
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                out.append("")
            elif isinstance(v, bool):
                out.append("1" if v else "0")
            elif isinstance(v, float):
                out.append(repr(v))
            else:
                out.append(str(v))
        return out

    @classmethod
    def from_csv(cls, rec):
        def num(s, typ=float):
            return None if s == "" else typ(s)
        return cls(
            axis=float(rec["axis"]), n=int(rec["n"]), alpha=float(rec["alpha"]),
            delta=float(rec["delta"]), snr_db=float(rec["snr_db"]), trial=int(rec["trial"]),
            iter=int(rec["iter"]), mse_amp=num(rec["mse_amp"]),
            mse_classical=num(rec["mse_classical"]), se_pred=float(rec["se_pred"]),
            rs_mmse=num(rec["rs_mmse"]), tau=float(rec["tau"]), aborted=rec["aborted"] == "1",
        )


def write_csv(rows, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow(r.to_csv())


def read_csv(fh):
    reader = csv.DictReader(fh)
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    return [SweepRow.from_csv(rec) for rec in reader]


def _run_trial(params, prior, itermax, trial, seed, run_classical, onsager_norm):
    """One instance; returns per-iteration MSE lists (``None`` when aborted)."""
    inst = generate_instance(params, trial_streams(seed, trial), prior)
    try:
        amp = amp_run(inst, prior, params, itermax, onsager_norm=onsager_norm).empirical_mse
    except NumericalError as exc:
        log.warning("trial %d: AMP aborted: %s", trial, exc)
        amp = None
    classical = None
    if run_classical:
        try:
            classical = classical_amp_run(inst, prior, params, itermax,
                                          onsager_norm=onsager_norm).empirical_mse
        except NumericalError as exc:
            log.warning("trial %d: classical AMP aborted: %s", trial, exc)
    return trial, amp, classical


def _mean_se(values):
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return None, None
    se = float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else 0.0
    return float(v.mean()), se


def run_sweep(cfg, seed=0, jobs=1):
    """Run the sweep; returns ``(rows, summary)``.

    State evolution and the RS curve are computed once per axis value.
    With ``jobs > 1`` trials fan out over a process pool; results are
    collected and ordered by the coordinator.
    """
    rows, points = [], []
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for value in cfg.axis_values:
            params = cfg.params_at(value)
            prior = cfg.prior_at(params)
            se = se_trace(prior, params, cfg.itermax)
            rs = minimize_rs(prior, params, noise_mapping=cfg.noise_mapping) if cfg.run_rs else None
            args = [(params, prior, cfg.itermax, t, seed, cfg.run_classical, cfg.onsager_norm)
                    for t in range(cfg.trials)]
            if pool is None:
                results = [_run_trial(*a) for a in args]
            else:
                results = list(pool.map(_run_trial, *zip(*args)))
            results.sort(key=lambda r: r[0])
            log.info("%s=%g: %d trials done", cfg.sweep_axis.value, value, cfg.trials)
            points.append(_collect(cfg, value, params, se, rs, results, rows))
    finally:
        if pool is not None:
            pool.shutdown()
    summary = {
        "axis": cfg.sweep_axis.value,
        "trials": cfg.trials,
        "itermax": cfg.itermax,
        "seed": seed,
        "noise_mapping": cfg.noise_mapping,
        "onsager_norm": cfg.onsager_norm,
        "points": points,
        "aborted_total": sum(p["aborted_amp"] + p["aborted_classical"] for p in points),
    }
    return rows, summary


def _collect(cfg, value, params, se, rs, results, rows):
    rs_val = rs.mmse_pred if rs is not None else None
    final_amp, final_cls = [], []
    aborted_amp = aborted_cls = 0
    for trial, amp, cls in results:
        aborted_amp += amp is None
        aborted_cls += cfg.run_classical and cls is None
        if amp is not None:
            final_amp.append(amp[-1])
        if cls is not None:
            final_cls.append(cls[-1])
        aborted = amp is None or (cfg.run_classical and cls is None)
        for it in range(cfg.itermax + 1):
            rows.append(SweepRow(
                axis=value, n=params.n, alpha=params.alpha, delta=params.delta,
                snr_db=float(params.snr_db), trial=trial, iter=it,
                mse_amp=None if amp is None else float(amp[it]),
                mse_classical=None if cls is None else float(cls[it]),
                se_pred=float(se.predicted_mse[it]), rs_mmse=rs_val, tau=float(se.tau[it]),
                aborted=bool(aborted),
            ))
    amp_mean, amp_se = _mean_se(final_amp)
    cls_mean, cls_se = _mean_se(final_cls)
    point = {
        "axis_value": value, "n": params.n, "m": params.m, "k": params.k,
        "alpha": params.alpha, "delta": params.delta, "snr_db": float(params.snr_db),
        "noise_var": params.noise_var,
        "mse_amp_mean": amp_mean, "mse_amp_stderr": amp_se,
        "mse_classical_mean": cls_mean, "mse_classical_stderr": cls_se,
        "se_pred_final": float(se.predicted_mse[-1]),
        "rs_mmse": rs_val,
        "aborted_amp": int(aborted_amp), "aborted_classical": int(aborted_cls),
    }
    if rs is not None:
        point["rs"] = rs.summary()
    return point


def run_single(params, prior, itermax=10, trials=1, seed=0, oracle=False, run_rs=True,
               noise_mapping="rescaled", oracle_trials=50, onsager_norm="n_alpha"):
    """One configuration end to end; returns a JSON-ready report.

    With ``trials > 1`` the AMP traces are averaged over seeds and the
    report carries ``tracking_error``, the largest relative gap between
    the mean empirical MSE and the state-evolution prediction.
    """
    se = se_trace(prior, params, itermax)
    amp_runs, cls_runs = [], []
    for t in range(trials):
        inst = generate_instance(params, trial_streams(seed, t), prior)
        amp_runs.append(amp_run(inst, prior, params, itermax, onsager_norm=onsager_norm).empirical_mse)
        cls_runs.append(classical_amp_run(inst, prior, params, itermax,
                                          onsager_norm=onsager_norm).empirical_mse)
    amp_mean = np.mean(amp_runs, axis=0)
    pred = np.asarray(se.predicted_mse)
    tracking = np.abs(amp_mean - pred) / np.maximum(pred, 1e-6)
    report = {
        "params": {"n": params.n, "m": params.m, "k": params.k, "alpha": params.alpha,
                   "delta": params.delta, "noise_var": params.noise_var,
                   "snr_db": float(params.snr_db), "matrix_norm": params.matrix_norm.value},
        "prior": {"values": prior.values.tolist(), "probs": prior.probs.tolist()},
        "seed": seed,
        "trials": trials,
        "itermax": itermax,
        "amp": {"iter": list(range(itermax + 1)), "mse_mean": amp_mean.tolist()},
        "classical": {"mse_mean": np.mean(cls_runs, axis=0).tolist()},
        "se": {"tau": se.tau, "predicted_mse": se.predicted_mse},
        "tracking_error": float(tracking.max()),
    }
    if run_rs:
        report["rs"] = minimize_rs(prior, params, noise_mapping=noise_mapping).summary()
    if oracle:
        budget = EnumerationBudget()
        if prior.size**params.n <= budget.max_configs:
            report["oracle"] = oracle_check(params, prior, oracle_trials, seed, itermax, budget)
        else:
            report["oracle"] = {"skipped": f"{prior.size}^{params.n} configurations exceed budget"}
    return report


def dumps(payload):
    """Deterministic JSON encoding."""
    return json.dumps(payload, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, enum.Enum):
        return obj.value
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def summary_path(csv_path):
    root, _ = os.path.splitext(csv_path)
    return root + ".json"


def rows_to_text(rows):
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()

