"""Flat ``key = value`` config files with dotted section names.

Example::

    # MSE versus SNR at n = 300
    n = 300
    alpha = 0.9
    delta = 0.5
    prior.kind = "bernoulli-rademacher"
    prior.amplitude = "sqrt_noise"
    sweep.axis = "snr_db"
    sweep.values = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]

Values are JSON literals; a bare word is read as a string.
"""

from __future__ import annotations

import json
import re

from amp_sublinear.errors import AmpSublinearError, ParameterError
from amp_sublinear.linmodel import MatrixNorm, ModelParams

_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$")

_TYPES = {
    "n": int, "alpha": float, "delta": float, "k": int, "snr_db": float, "noise_var": float,
    "matrix_norm": str, "seed": int, "trials": int, "itermax": int, "jobs": int,
    "run_classical": bool, "run_rs": bool, "noise_mapping": str, "onsager_norm": str,
    "output_path": str, "tol": float,
    "sweep.axis": str, "sweep.values": list,
    "prior.kind": str, "prior.amplitude": (float, str), "prior.rho": float,
    "prior.values": list, "prior.probs": list,
}

DEFAULTS = {
    "n": 300, "alpha": 0.9, "delta": 0.5, "matrix_norm": "one_over_m", "seed": 0,
    "itermax": 10, "run_classical": True, "run_rs": True,
    "noise_mapping": "rescaled", "onsager_norm": "n_alpha",
    "prior.kind": "bernoulli-rademacher", "prior.amplitude": "sqrt_noise",
}


class ConfigError(AmpSublinearError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = f"{path or '<config>'}:{line}: " if line is not None else ""
        super().__init__(where + message)


def _check_type(key, value, line, path):
    expected = _TYPES.get(key)
    if expected is None:
        raise ConfigError(f"unknown key {key!r}", line, path)
    types = expected if isinstance(expected, tuple) else (expected,)
    if float in types and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, types) or (bool not in types and isinstance(value, bool)):
        names = "/".join(t.__name__ for t in types)
        raise ConfigError(f"{key} must be {names}, got {value!r}", line, path)
    return value


def parse_config_text(text, path=None):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", lineno, path)
        key, _, value = (part.strip() for part in line.partition("="))
        if not _KEY.match(key):
            raise ConfigError(f"malformed key {key!r}", lineno, path)
        if key in out:
            raise ConfigError(f"duplicate key {key!r}", lineno, path)
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_\-]*", value):
                parsed = value
            else:
                raise ConfigError(f"cannot parse value {value!r}", lineno, path) from None
        out[key] = _check_type(key, parsed, lineno, path)
    return out


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), path=str(path))


def merge(*layers):
    """Later layers win; ``None`` values are skipped."""
    out = dict(DEFAULTS)
    for layer in layers:
        out.update({k: v for k, v in layer.items() if v is not None})
    return out


def params_from_config(cfg):
    if "snr_db" in cfg and "noise_var" in cfg:
        raise ConfigError("give exactly one of snr_db and noise_var")
    try:
        if "noise_var" in cfg:
            noise = float(cfg["noise_var"])
        else:
            noise = 10.0 ** (-float(cfg.get("snr_db", 5.0)) / 10.0)
        return ModelParams(
            n=int(cfg["n"]), alpha=float(cfg["alpha"]), delta=float(cfg["delta"]),
            noise_var=noise, k=cfg.get("k"), matrix_norm=MatrixNorm(cfg["matrix_norm"]),
            seed=int(cfg["seed"]),
        )
    except (ParameterError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
