"""JSON model configuration (schema version 1).

Example::

    {
      "schema_version": 1,
      "n_R": 2, "n_T": 2, "gamma": 1.0,
      "r_measures": [{"kind": "uniform01", "n_atoms": 64}, {"kind": "point", "location": 1.0}],
      "t_measures": [{"kind": "atoms", "atoms": [0.5, 1.5], "weights": [0.5, 0.5]}, ...],
      "covariance": {"blocks": [{"variance": 1.0, "diagonal": [1, 1], "permutation": [0, 1]}]}
    }

Measures describe the law of r_k^2 (``"law_of": "r2"``, the default) or of
r_k itself (``"law_of": "r"``, squared on load).  The covariance is either
``{"blocks": [...]}`` or ``{"entry_variances": [[...]]}``.  Unknown fields
are errors.
"""

from __future__ import annotations

import json

import numpy as np

from .pipeline import Block, ChannelModel, blocks_from_entry_variances
from .scalar import ScalarMeasure, discretize_uniform01

SCHEMA_VERSION = 1
TOP_FIELDS = {"schema_version", "n_R", "n_T", "gamma", "r_measures", "t_measures", "covariance", "description"}
MEASURE_FIELDS = {
    "atoms": {"kind", "atoms", "weights", "law_of", "density_grid", "density_values"},
    "point": {"kind", "location", "law_of"},
    "uniform01": {"kind", "n_atoms", "law_of"},
}


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"config error at {path}: {message}" if path else f"config error: {message}")
        self.path = path


def _require(obj, key, path):
    if key not in obj:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    return obj[key]


def _check_fields(obj, allowed, path):
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise ConfigError(f"{path}.{extra[0]}" if path else extra[0], "unknown field")


def _number(v, path, positive=False, nonneg=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {v!r}")
    v = float(v)
    if not np.isfinite(v):
        raise ConfigError(path, "must be finite")
    if positive and v <= 0:
        raise ConfigError(path, "must be positive")
    if nonneg and v < 0:
        raise ConfigError(path, "must be nonnegative")
    return v


def _int(v, path, minimum=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(path, f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(path, f"must be >= {minimum}")
    return v


def _numbers(v, path):
    if not isinstance(v, list) or not v:
        raise ConfigError(path, "expected a non-empty list of numbers")
    return np.array([_number(x, f"{path}[{i}]") for i, x in enumerate(v)])


def parse_measure(d, path) -> ScalarMeasure:
    if not isinstance(d, dict):
        raise ConfigError(path, "expected a measure object")
    kind = _require(d, "kind", path)
    if kind not in MEASURE_FIELDS:
        raise ConfigError(f"{path}.kind", f"unknown measure kind {kind!r} (expected one of {sorted(MEASURE_FIELDS)})")
    _check_fields(d, MEASURE_FIELDS[kind], path)
    law_of = d.get("law_of", "r2")
    if law_of not in ("r2", "r"):
        raise ConfigError(f"{path}.law_of", "must be 'r2' or 'r'")
    try:
        if kind == "point":
            mu = ScalarMeasure.point(_number(_require(d, "location", path), f"{path}.location"))
        elif kind == "uniform01":
            mu = discretize_uniform01(_int(_require(d, "n_atoms", path), f"{path}.n_atoms", 2))
        else:
            atoms = _numbers(_require(d, "atoms", path), f"{path}.atoms")
            weights = _numbers(d["weights"], f"{path}.weights") if "weights" in d else None
            dg = dv = None
            if ("density_grid" in d) != ("density_values" in d):
                raise ConfigError(path, "density_grid and density_values go together")
            if "density_grid" in d:
                dg = _numbers(d["density_grid"], f"{path}.density_grid")
                dv = _numbers(d["density_values"], f"{path}.density_values")
            if weights is None:
                weights = np.full(atoms.size, 1.0 / atoms.size)
            mu = ScalarMeasure(atoms, weights, dg, dv)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc
    if law_of == "r":
        if mu.has_density:
            raise ConfigError(f"{path}.law_of", "'r' is only supported for atomic measures")
        mu = mu.squared()
    elif mu.support()[0] < 0:
        raise ConfigError(path, "law of a squared correlation must be supported on [0, inf)")
    return mu


def parse_block(d, path, n) -> Block:
    _check_fields(d, {"variance", "diagonal", "permutation"}, path)
    v = _number(_require(d, "variance", path), f"{path}.variance", nonneg=True)
    diag = _numbers(_require(d, "diagonal", path), f"{path}.diagonal")
    perm = _require(d, "permutation", path)
    if not isinstance(perm, list) or not all(isinstance(p, int) and not isinstance(p, bool) for p in perm):
        raise ConfigError(f"{path}.permutation", "expected a list of integers")
    if diag.size != n or len(perm) != n:
        raise ConfigError(path, f"diagonal and permutation must have length n = {n}")
    try:
        return Block(v, diag, np.array(perm, dtype=int))
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def model_from_dict(cfg: dict) -> ChannelModel:
    _check_fields(cfg, TOP_FIELDS, "")
    ver = _require(cfg, "schema_version", "")
    if ver != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {ver!r} (expected {SCHEMA_VERSION})")
    n_R = _int(_require(cfg, "n_R", ""), "n_R", 1)
    n_T = _int(_require(cfg, "n_T", ""), "n_T", 1)
    n = max(n_R, n_T)
    gamma = _number(cfg.get("gamma", 1.0), "gamma", positive=True)
    measures = {}
    for key, m in (("r_measures", n_R), ("t_measures", n_T)):
        lst = _require(cfg, key, "")
        if not isinstance(lst, list) or len(lst) not in (m, n):
            raise ConfigError(key, f"expected a list of {m} measures" + (f" (or {n} including padding)" if n != m else ""))
        measures[key] = [parse_measure(d, f"{key}[{i}]") for i, d in enumerate(lst)]
    cov = _require(cfg, "covariance", "")
    _check_fields(cov, {"blocks", "entry_variances"}, "covariance")
    if ("blocks" in cov) == ("entry_variances" in cov):
        raise ConfigError("covariance", "give exactly one of 'blocks' or 'entry_variances'")
    if "blocks" in cov:
        if not isinstance(cov["blocks"], list) or not cov["blocks"]:
            raise ConfigError("covariance.blocks", "expected a non-empty list")
        blocks = [parse_block(b, f"covariance.blocks[{i}]", n) for i, b in enumerate(cov["blocks"])]
    else:
        rows = cov["entry_variances"]
        if not (isinstance(rows, list) and len(rows) == n and all(isinstance(r, list) and len(r) == n for r in rows)):
            raise ConfigError("covariance.entry_variances", f"expected an {n}x{n} matrix")
        S = np.array([_numbers(r, f"covariance.entry_variances[{i}]") for i, r in enumerate(rows)])
        if np.any(S < 0):
            raise ConfigError("covariance.entry_variances", "variances must be nonnegative")
        blocks = blocks_from_entry_variances(S)
    try:
        return ChannelModel(n_R, n_T, tuple(measures["r_measures"]), tuple(measures["t_measures"]),
                            tuple(blocks), gamma)
    except ValueError as exc:
        raise ConfigError("", str(exc)) from exc


def loads(text: str) -> ChannelModel:
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return model_from_dict(cfg)


def load(path) -> ChannelModel:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc.strerror}") from exc
    return loads(text)


def dump_normalized(model: ChannelModel) -> dict:
    """Fully explicit config (atoms of r^2 laws, padded, explicit blocks)."""
    d = model.to_dict()

    def meas(m):
        out = {"kind": "atoms", "atoms": m["atoms"], "weights": m["weights"], "law_of": "r2"}
        if "density_grid" in m:
            out["density_grid"] = m["density_grid"]
            out["density_values"] = m["density_values"]
        return out

    return {
        "schema_version": SCHEMA_VERSION,
        "n_R": d["n_R"], "n_T": d["n_T"], "gamma": d["gamma"],
        "r_measures": [meas(m) for m in d["r_measures"]],
        "t_measures": [meas(m) for m in d["t_measures"]],
        "covariance": {"blocks": d["blocks"]},
    }
