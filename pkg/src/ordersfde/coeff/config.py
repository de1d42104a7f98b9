"""JSON coefficient configs: either a builtin reference or DSL expressions.

Example::

    {"d": 1, "m": 1, "r0": 1,
     "marks": [{"name": "up", "value": 1.0, "rate": 2.0}],
     "b": ["-x[1](0) + x[1](-1)"],
     "sigma": [["0.5 * x[1](0)"]],
     "gamma": {"up": ["z"]},
     "barred": {"b": ["-x[1](0) + x[1](-1) + 1"]}}

Missing entries are zero; missing barred entries copy the unbarred ones.
``gamma`` is either one vector (the mark value is available as ``z``) or a
map from mark name to vector; unlisted marks then jump by zero.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from ..errors import BadParams, UnknownMark
from ..noise import MarkMeasure
from .builtins import builtin
from .core import CoefficientSet
from .dsl import entry_evaluator, parse_expr


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    return json.loads(resources.files("ordersfde.schemas").joinpath(f"{name}.schema.json").read_text())


def validate(obj: Any, schema: str) -> None:
    try:
        jsonschema.validate(obj, load_schema(schema))
    except jsonschema.ValidationError as exc:
        raise BadParams(f"invalid {schema} config: {exc.message}") from None


def _entries(spec, shape: tuple[int, ...]) -> list[str]:
    if isinstance(spec, (str, int, float)):
        spec = [spec]
    flat = [str(e) for e in np.asarray(spec, dtype=object).reshape(-1)]
    if len(flat) != int(np.prod(shape)):
        raise BadParams(f"expected {int(np.prod(shape))} entries for shape {shape}, got {len(flat)}")
    return flat


def _compile(spec, shape, d, r0, allow_mark=False):
    exprs = [parse_expr(text, d=d, r0=r0, allow_mark=allow_mark) for text in _entries(spec, shape)]
    return entry_evaluator(np.array(exprs, dtype=object).reshape(shape), shape)


def _drift(spec, d, r0):
    f = _compile(spec, (d,), d, r0)
    return lambda t, x: f(t, x)


def _diffusion(spec, d, m, r0):
    f = _compile(spec, (d, m), d, r0)
    return lambda t, x: f(t, x)


def _jump(spec, d, r0, measure: MarkMeasure):
    if not isinstance(spec, dict):
        return _compile(spec, (d,), d, r0, allow_mark=True)
    per_mark = {}
    for name, vec in spec.items():
        k = measure.index(name)
        per_mark[measure.marks[k]] = _compile(vec, (d,), d, r0, allow_mark=True)
    if len(set(measure.marks)) != measure.size:
        raise UnknownMark("per-mark gamma needs distinct mark values")

    def gamma(t, x, z):
        f = per_mark.get(z)
        if f is None:
            return np.zeros(x.batch_shape + (d,))
        return f(t, x, z)

    return gamma


def coefficients_from_config(cfg: dict) -> CoefficientSet:
    validate(cfg, "coefficients")
    if "builtin" in cfg:
        return builtin(cfg["builtin"], **cfg.get("params", {}))
    d = int(cfg["d"])
    m = int(cfg.get("m", 1))
    r0 = float(cfg.get("r0", 0.0))
    measure = MarkMeasure.from_dict(cfg.get("marks", []))
    barred = cfg.get("barred", {})

    def build(part):
        out = {}
        if "b" in part:
            out["drift"] = _drift(part["b"], d, r0)
        if "sigma" in part:
            out["diffusion"] = _diffusion(part["sigma"], d, m, r0)
        if "gamma" in part:
            out["jump"] = _jump(part["gamma"], d, r0, measure)
        return out

    u = build(cfg)
    v = {k + "_bar": f for k, f in build(barred).items()}
    return CoefficientSet.from_functions(d, m, r0, measure=measure, name=cfg.get("name", "config"), **u, **v)


def load_coefficients(ref: str) -> tuple[CoefficientSet, dict]:
    """Resolve ``builtin:name`` or a JSON file path; returns the set and its config."""
    if ref.startswith("builtin:"):
        cfg = {"builtin": ref.split(":", 1)[1]}
    else:
        cfg = json.loads(Path(ref).read_text())
    return coefficients_from_config(cfg), cfg
