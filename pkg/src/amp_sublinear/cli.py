"""Command-line entry point: ``amp-sublinear <subcommand> [options]``.

Subcommands: ``amp-run``, ``se-trace``, ``rs-curve``, ``sweep``,
``oracle-check``.  Options given on the command line override values from
``--config``.  The master seed defaults to ``$AMP_SUBLINEAR_SEED`` (or 0).

Exit codes: 0 success, 2 config error (including a size budget the
configuration exceeds), 3 numerical abort under ``--strict``, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys

from amp_sublinear import config as cfgmod
from amp_sublinear.errors import NumericalError, ParameterError, ResourceError
from amp_sublinear.oracle import EnumerationBudget, oracle_check
from amp_sublinear.prior import prior_from_config
from amp_sublinear.rs import minimize_rs
from amp_sublinear.se import se_trace
from amp_sublinear.sweep import SweepConfig, dumps, rows_to_text, run_single, run_sweep, summary_path

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("amp_sublinear")


def _common(p):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--seed", type=int, help="master seed (default $AMP_SUBLINEAR_SEED or 0)")
    p.add_argument("--jobs", type=int, help="worker processes (default: logical cores)")
    p.add_argument("--out", help="output path (CSV or JSON); stdout when omitted")
    p.add_argument("--stdout", action="store_true", help="write the payload to stdout")
    p.add_argument("--strict", action="store_true", help="exit 3 if any trial aborted")
    p.add_argument("-v", "--verbose", action="store_true")
    g = p.add_argument_group("model")
    g.add_argument("--n", type=int)
    g.add_argument("--alpha", type=float)
    g.add_argument("--delta", type=float)
    g.add_argument("--k", type=int)
    g.add_argument("--snr-db", dest="snr_db", type=float)
    g.add_argument("--noise-var", dest="noise_var", type=float)
    g.add_argument("--matrix-norm", dest="matrix_norm", choices=["one_over_m", "one_over_n"])
    g.add_argument("--itermax", type=int)
    g.add_argument("--trials", type=int)
    g.add_argument("--noise-mapping", dest="noise_mapping", choices=["rescaled", "identity"])
    g.add_argument("--onsager-norm", dest="onsager_norm", choices=["n_alpha", "n"])
    g.add_argument("--prior", dest="prior.kind", choices=["bernoulli-rademacher", "atoms"])
    g.add_argument("--amplitude", dest="prior.amplitude",
                   help="number, or sqrt_noise for amplitude sqrt(noise_var)")
    g.add_argument("--rho", dest="prior.rho", type=float)


def build_parser():
    parser = argparse.ArgumentParser(prog="amp-sublinear", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("amp-run", help="one configuration end to end, JSON report")
    _common(p)
    p.add_argument("--oracle", action="store_true", help="include the exact-enumeration check")
    p.add_argument("--oracle-trials", type=int, default=50)
    p.add_argument("--no-rs", action="store_true")

    p = sub.add_parser("se-trace", help="state-evolution CSV (t, tau, predicted_mse)")
    _common(p)

    p = sub.add_parser("rs-curve", help="RS potential CSV (E, f_rs) plus JSON summary")
    _common(p)
    p.add_argument("--grid-size", type=int, default=1024)

    p = sub.add_parser("sweep", help="Monte-Carlo sweep over SNR or alpha")
    _common(p)
    p.add_argument("--axis", dest="sweep.axis", choices=["snr_db", "alpha"])
    p.add_argument("--values", dest="sweep.values", type=float, nargs="+")
    p.add_argument("--no-classical", action="store_true")
    p.add_argument("--no-rs", action="store_true")

    p = sub.add_parser("oracle-check", help="exact MMSE vs AMP on tiny instances (JSON)")
    _common(p)
    p.add_argument("--max-configs", type=int, default=10**6)
    return parser


_NON_CONFIG = {"config", "seed", "jobs", "out", "stdout", "strict", "verbose", "command",
               "oracle", "oracle_trials", "no_rs", "no_classical", "grid_size", "max_configs"}


def _resolve(args):
    file_cfg = cfgmod.load_config(args.config) if args.config else {}
    cli_cfg = {k: v for k, v in vars(args).items() if k not in _NON_CONFIG}
    if cli_cfg.get("prior.amplitude") not in (None, "sqrt_noise"):
        try:
            cli_cfg["prior.amplitude"] = float(cli_cfg["prior.amplitude"])
        except ValueError:
            raise cfgmod.ConfigError(f"bad --amplitude {cli_cfg['prior.amplitude']!r}") from None
    # an explicit snr_db/noise_var on the command line replaces the other from the file
    if cli_cfg.get("snr_db") is not None:
        file_cfg.pop("noise_var", None)
    if cli_cfg.get("noise_var") is not None:
        file_cfg.pop("snr_db", None)
    merged = cfgmod.merge(file_cfg, cli_cfg)
    if args.seed is not None:
        merged["seed"] = args.seed
    elif "seed" not in file_cfg and os.environ.get("AMP_SUBLINEAR_SEED"):
        try:
            merged["seed"] = int(os.environ["AMP_SUBLINEAR_SEED"])
        except ValueError:
            raise cfgmod.ConfigError("AMP_SUBLINEAR_SEED must be an integer") from None
    return merged


def _prior_cfg(cfg):
    return {k: v for k, v in cfg.items() if k.startswith("prior.")}


def _emit(text, args):
    if args.out and not args.stdout:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_amp_run(args, cfg):
    params = cfgmod.params_from_config(cfg)
    prior = prior_from_config(_prior_cfg(cfg), noise_var=params.noise_var, rho=params.rho)
    report = run_single(params, prior, itermax=cfg["itermax"], trials=cfg.get("trials", 1),
                        seed=params.seed, oracle=args.oracle, run_rs=not args.no_rs,
                        noise_mapping=cfg["noise_mapping"], oracle_trials=args.oracle_trials,
                        onsager_norm=cfg["onsager_norm"])
    _emit(dumps(report), args)
    return EXIT_OK


def _cmd_se_trace(args, cfg):
    params = cfgmod.params_from_config(cfg)
    prior = prior_from_config(_prior_cfg(cfg), noise_var=params.noise_var, rho=params.rho)
    tr = se_trace(prior, params, cfg["itermax"])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("t", "tau", "predicted_mse"))
    for t, (tau, pred) in enumerate(zip(tr.tau, tr.predicted_mse)):
        w.writerow((t, repr(tau), repr(pred)))
    _emit(buf.getvalue(), args)
    return EXIT_OK


def _cmd_rs_curve(args, cfg):
    params = cfgmod.params_from_config(cfg)
    prior = prior_from_config(_prior_cfg(cfg), noise_var=params.noise_var, rho=params.rho)
    curve = minimize_rs(prior, params, grid_size=args.grid_size, noise_mapping=cfg["noise_mapping"])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("E", "f_rs"))
    for e, f in zip(curve.e_grid, curve.f_values):
        w.writerow((repr(float(e)), repr(float(f))))
    summary = dumps(curve.summary())
    if args.out and not args.stdout:
        _emit(buf.getvalue(), args)
        with open(summary_path(args.out), "w", encoding="utf-8") as fh:
            fh.write(summary)
    else:
        sys.stdout.write(buf.getvalue())
        sys.stderr.write(summary)
    return EXIT_OK


def _cmd_sweep(args, cfg):
    params = cfgmod.params_from_config(cfg)
    axis = cfg.get("sweep.axis", "snr_db")
    values = cfg.get("sweep.values")
    if values is None:
        values = list(range(1, 11)) if axis == "snr_db" else [0.3, 0.5, 0.7, 0.8, 0.9, 0.95]
    try:
        sweep = SweepConfig(
            base=params, sweep_axis=axis, axis_values=values, trials=cfg.get("trials", 200),
            itermax=cfg["itermax"], run_classical=cfg["run_classical"] and not args.no_classical,
            run_rs=cfg["run_rs"] and not args.no_rs, noise_mapping=cfg["noise_mapping"],
            output_path=args.out or cfg.get("output_path"), prior_cfg=_prior_cfg(cfg),
            onsager_norm=cfg["onsager_norm"],
        )
    except (ParameterError, ValueError) as exc:
        raise cfgmod.ConfigError(str(exc)) from exc
    jobs = args.jobs or cfg.get("jobs") or os.cpu_count() or 1
    rows, summary = run_sweep(sweep, seed=params.seed, jobs=jobs)
    text = rows_to_text(rows)
    out = sweep.output_path
    if out and not args.stdout:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        with open(summary_path(out), "w", encoding="utf-8") as fh:
            fh.write(dumps(summary))
    else:
        sys.stdout.write(text)
        sys.stderr.write(dumps(summary))
    if args.strict and summary["aborted_total"]:
        log.error("%d trials aborted", summary["aborted_total"])
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_oracle_check(args, cfg):
    params = cfgmod.params_from_config(cfg)
    prior = prior_from_config(_prior_cfg(cfg), noise_var=params.noise_var, rho=params.rho)
    trials = cfg.get("trials", 50)
    report = oracle_check(params, prior, trials, seed=params.seed, itermax=cfg["itermax"],
                          budget=EnumerationBudget(args.max_configs))
    _emit(dumps(report), args)
    return EXIT_OK


_COMMANDS = {
    "amp-run": _cmd_amp_run,
    "se-trace": _cmd_se_trace,
    "rs-curve": _cmd_rs_curve,
    "sweep": _cmd_sweep,
    "oracle-check": _cmd_oracle_check,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _resolve(args)
        return _COMMANDS[args.command](args, cfg)
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL if args.strict else 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
