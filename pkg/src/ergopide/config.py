"""Experiment configuration: JSON schema, analytic primitives and problem assembly.

Coefficients and sources are given either as numbers or as primitive
strings:

``const:c``                    constant ``c``
``cos1[:axis]``, ``sin1[:axis]``  ``cos(2πx_axis)``, ``sin(2πx_axis)`` (axis defaults to 0)
``cos2d``                      ``cos(2πx_0) cos(2πx_1)``
``shifted-cos[:axis]``         ``1 + cos(2πx_axis)`` (nonnegative, vanishes at ``x = 1/2``)
``bump[:axis]``                ``max(0, sin(2πx_axis))²`` (vanishes on half the cell)
``c*prim``                     scalar multiple
``sum[p, q, ...]``             sum of primitives (nesting allowed)
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from typing import Any

import jsonschema
import numpy as np

from .levy import JumpFunctionSpec, LevyMeasureSpec, NonlocalOperatorSpec
from .scheme import GradientTermSpec, LocalTermSpec, ProblemSpec
from .torus import GridField, TorusGrid, make_grid

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "CONFIG_SCHEMA",
    "MODES",
    "parse_config",
    "parse_primitive",
    "build_problem",
    "build_field",
    "initial_datum",
]

MODES = ("cauchy", "ergodic-vd", "ergodic-lt", "convergence", "audit", "reproduce")

_COEF = {"oneOf": [{"type": "number"}, {"type": "string", "minLength": 1}]}
_BLOCK = {"enum": ["x1", "x2", "full"]}

CONFIG_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["mode"],
    "properties": {
        "mode": {"enum": list(MODES)},
        "name": {"type": "string"},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["d1", "d2"],
            "properties": {
                "d1": {"type": "integer"},
                "d2": {"type": "integer"},
                "n": {"type": "integer"},
            },
        },
        "local": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["block"],
                "properties": {"block": _BLOCK, "a": _COEF},
            },
        },
        "nonlocal": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["block", "beta"],
                "properties": {
                    "block": _BLOCK,
                    "beta": {"type": "number"},
                    "discretization": {"enum": ["spectral", "quadrature"]},
                    "normalization": {"enum": ["normalized-multiplier", "raw-kernel"]},
                    "jump": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["kind"],
                        "properties": {"kind": {"enum": ["identity", "scaled"]}, "a2": _COEF},
                    },
                    "truncation_radius": {"type": "number", "exclusiveMinimum": 0},
                    "inner_cut": {"type": "number", "exclusiveMinimum": 0},
                },
            },
        },
        "gradient": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["block", "k"],
                "properties": {"block": _BLOCK, "b": _COEF, "k": {"type": "number", "minimum": 0}},
            },
        },
        "f": _COEF,
        "m": {"type": "number", "minimum": 0},
        "u0": _COEF,
        "T": {"type": "number", "exclusiveMinimum": 0},
        "window": {"type": "number", "exclusiveMinimum": 0},
        "delta_schedule": {
            "type": "array",
            "minItems": 3,
            "items": {"type": "number", "exclusiveMinimum": 0},
        },
        "snapshot_times": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer"},
        "example_id": {"type": "string"},
        "audit": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "m": {"type": "number"},
                "betas": {"type": "array", "items": {"type": "number"}},
            },
        },
    },
    "allOf": [
        {
            "if": {"properties": {"mode": {"enum": ["cauchy", "ergodic-vd", "ergodic-lt", "convergence"]}}},
            "then": {"required": ["grid", "f"]},
        },
        {"if": {"properties": {"mode": {"const": "reproduce"}}}, "then": {"required": ["example_id"]}},
    ],
}

DEFAULTS: dict[str, Any] = {
    "n": 64,
    "T": 10.0,
    "delta_schedule": [0.2, 0.1, 0.05],
    "tol": 1e-9,
    "seed": 0,
}


class ConfigError(ValueError):
    """Structured configuration error with a JSON pointer to the offending key."""

    def __init__(self, code: str, pointer: str, message: str) -> None:
        super().__init__(f"{code} at {pointer or '/'}: {message}")
        self.code = code
        self.pointer = pointer
        self.message = message

    def to_dict(self) -> dict[str, str]:
        return {"code": self.code, "pointer": self.pointer, "message": self.message}


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


@dataclass
class ExperimentConfig:
    raw: dict[str, Any]
    mode: str
    grid: TorusGrid | None = None
    parameters: dict[str, Any] = field(default_factory=dict)
    seed: int = 0

    def to_dict(self) -> dict[str, Any]:
        return copy.deepcopy(self.raw)


# --------------------------------------------------------------------------
# primitives


def _split_top(body: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in body:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur).strip())
    return [p for p in parts if p]


def _axis(arg: str | None, d: int) -> int:
    ax = 0 if arg is None else int(arg)
    if not 0 <= ax < d:
        raise ValueError(f"axis {ax} out of range for a {d}-dimensional grid")
    return ax


def parse_primitive(expr: str | float | int, grid: TorusGrid) -> GridField:
    """Evaluate a primitive expression (see module docstring) on ``grid``."""
    if isinstance(expr, (int, float)) and not isinstance(expr, bool):
        return GridField(grid, np.full(grid.shape, float(expr)))
    s = str(expr).strip()
    coords = grid.coordinates()
    if s.startswith("sum[") and s.endswith("]"):
        parts = _split_top(s[4:-1])
        if not parts:
            raise ValueError("empty sum[]")
        total = parse_primitive(parts[0], grid)
        for p in parts[1:]:
            total = total + parse_primitive(p, grid)
        return total
    if "*" in s and not s.startswith("sum["):
        head, tail = s.split("*", 1)
        return float(head) * parse_primitive(tail, grid)
    if s.startswith("const:"):
        return GridField(grid, np.full(grid.shape, float(s[6:])))
    name, _, arg = s.partition(":")
    arg = arg or None
    two_pi = 2.0 * np.pi
    if name == "cos1":
        return GridField(grid, np.cos(two_pi * coords[_axis(arg, grid.d)]))
    if name == "sin1":
        return GridField(grid, np.sin(two_pi * coords[_axis(arg, grid.d)]))
    if name == "cos2d":
        if grid.d != 2:
            raise ValueError("cos2d needs a 2-dimensional grid")
        return GridField(grid, np.cos(two_pi * coords[0]) * np.cos(two_pi * coords[1]))
    if name == "shifted-cos":
        return GridField(grid, 1.0 + np.cos(two_pi * coords[_axis(arg, grid.d)]))
    if name == "bump":
        return GridField(grid, np.maximum(0.0, np.sin(two_pi * coords[_axis(arg, grid.d)])) ** 2)
    try:
        return GridField(grid, np.full(grid.shape, float(s)))
    except ValueError:
        raise ValueError(f"unknown primitive {s!r}") from None


def build_field(expr, grid: TorusGrid, pointer: str) -> GridField:
    try:
        return parse_primitive(expr, grid)
    except (ValueError, TypeError) as exc:
        raise ConfigError("bad-primitive", pointer, str(exc)) from None


def _coef(expr, grid: TorusGrid, pointer: str) -> float | GridField:
    if isinstance(expr, (int, float)):
        return float(expr)
    return build_field(expr, grid, pointer)


# --------------------------------------------------------------------------
# parsing


def parse_config(text: str | dict[str, Any]) -> ExperimentConfig:
    """Validate a JSON document and resolve defaults.

    Raises
    ------
    ConfigError
        ``invalid-json``, ``schema-violation``, ``dimension-out-of-range``,
        ``n-not-power-of-two``, ``beta-out-of-range``, ``bad-primitive`` or
        ``inconsistent-block``, each with a JSON pointer.
    """
    if isinstance(text, dict):
        doc = copy.deepcopy(text)
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("invalid-json", "", str(exc)) from None
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = errors[0]
        raise ConfigError("schema-violation", _pointer(err.absolute_path), err.message)

    for i, term in enumerate(doc.get("nonlocal", [])):
        beta = term["beta"]
        if not 1.0 < beta < 2.0:
            raise ConfigError("beta-out-of-range", f"/nonlocal/{i}/beta", f"beta={beta} outside (1, 2)")
    for i, beta in enumerate(doc.get("audit", {}).get("betas", [])):
        if not 1.0 < beta < 2.0:
            raise ConfigError("beta-out-of-range", f"/audit/betas/{i}", f"beta={beta} outside (1, 2)")

    grid = None
    if "grid" in doc:
        g = doc["grid"]
        d1, d2, n = g["d1"], g["d2"], g.get("n", DEFAULTS["n"])
        if d1 not in (0, 1) or d2 not in (0, 1) or d1 + d2 not in (1, 2):
            raise ConfigError("dimension-out-of-range", "/grid", f"d1={d1}, d2={d2}")
        if n < 8 or n & (n - 1):
            raise ConfigError("n-not-power-of-two", "/grid/n", f"n={n}")
        grid = make_grid(d1, d2, n)
        for key in ("local", "nonlocal", "gradient"):
            for i, term in enumerate(doc.get(key, [])):
                if not grid.block_axes(term["block"]):
                    raise ConfigError("inconsistent-block", f"/{key}/{i}/block",
                                      f"block {term['block']!r} is empty for d1={d1}, d2={d2}")

    sched = doc.get("delta_schedule")
    if sched is not None and any(b >= a for a, b in zip(sched, sched[1:])):
        raise ConfigError("schema-violation", "/delta_schedule", "schedule must be strictly decreasing")

    params = {k: doc[k] for k in ("T", "window", "delta_schedule", "snapshot_times", "tol", "example_id", "audit")
              if k in doc}
    for k in ("T", "delta_schedule", "tol"):
        params.setdefault(k, DEFAULTS[k])
    cfg = ExperimentConfig(raw=doc, mode=doc["mode"], grid=grid, parameters=params, seed=doc.get("seed", 0))
    if grid is not None and "f" in doc:
        build_problem(cfg)  # surface primitive and term errors at parse time
    return cfg


def build_problem(cfg: ExperimentConfig) -> ProblemSpec:
    """Assemble the :class:`ProblemSpec` described by ``cfg``."""
    doc, grid = cfg.raw, cfg.grid
    if grid is None or "f" not in doc:
        raise ConfigError("schema-violation", "", "problem needs grid and f")
    local = []
    for i, t in enumerate(doc.get("local", [])):
        try:
            local.append(LocalTermSpec(t["block"], _coef(t.get("a", 1.0), grid, f"/local/{i}/a")))
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError("inconsistent-term", f"/local/{i}/a", str(exc)) from None
    nonlocal_terms = []
    for i, t in enumerate(doc.get("nonlocal", [])):
        jump_doc = t.get("jump", {"kind": "identity"})
        if jump_doc["kind"] == "scaled":
            if "a2" not in jump_doc:
                raise ConfigError("schema-violation", f"/nonlocal/{i}/jump", "scaled jump needs a2")
            jump = JumpFunctionSpec("scaled", build_field(jump_doc["a2"], grid, f"/nonlocal/{i}/jump/a2"))
        else:
            jump = JumpFunctionSpec()
        block_dim = len(grid.block_axes(t["block"]))
        try:
            spec = NonlocalOperatorSpec(
                block=t["block"],
                measure=LevyMeasureSpec(t["beta"], block_dim),
                discretization=t.get("discretization", "spectral"),
                jump=jump,
                truncation_radius=t.get("truncation_radius"),
                inner_cut=t.get("inner_cut"),
                normalization=t.get("normalization"),
            )
        except ValueError as exc:
            raise ConfigError("inconsistent-term", f"/nonlocal/{i}", str(exc)) from None
        nonlocal_terms.append(spec)
    grads = [
        GradientTermSpec(t["block"], _coef(t.get("b", 1.0), grid, f"/gradient/{i}/b"), float(t["k"]))
        for i, t in enumerate(doc.get("gradient", []))
    ]
    f = build_field(doc["f"], grid, "/f")
    try:
        return ProblemSpec(grid, f, local, nonlocal_terms, grads, doc.get("m"), doc.get("name", ""))
    except ValueError as exc:
        raise ConfigError("inconsistent-term", "", str(exc)) from None


def initial_datum(cfg: ExperimentConfig) -> GridField:
    if cfg.grid is None:
        raise ConfigError("schema-violation", "/grid", "grid required")
    return build_field(cfg.raw.get("u0", 0.0), cfg.grid, "/u0")

