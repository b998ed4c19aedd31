"""Worked-example catalog and the ``reproduce`` pipeline.

Each entry is a configuration document plus a list of expected metrics.
Reproducing an entry runs its assumption audits, the vanishing-discount and
long-time constructions, and (where listed) the convergence diagnostics,
then compares every metric against its expectation.
"""

from __future__ import annotations

import copy
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable

from .cauchy import solve_cauchy
from .config import ExperimentConfig, build_problem, initial_datum, parse_config
from .diagnostics import audit_Ha, audit_Hb, audit_propH, convergence_report
from .ergodic import long_time_pair, pair_from_snapshots, vanishing_discount
from .levy import audit_jump, audit_M1, audit_M2
from .scheme import ProblemSpec, ellipticity_coverage

__all__ = [
    "Expected",
    "CatalogEntry",
    "CATALOG",
    "get_entry",
    "UnknownExampleError",
    "run_audits",
    "reproduce",
    "ReproductionReport",
]


class UnknownExampleError(KeyError):
    pass


@dataclass(frozen=True)
class Expected:
    """``kind`` is ``max`` (metric ≤ value + tol), ``min`` (metric ≥ value - tol) or ``abs``."""

    metric: str
    value: float
    tolerance: float
    tag: str
    kind: str = "max"

    def check(self, observed: float) -> bool:
        if not math.isfinite(observed):
            return False
        if self.kind == "max":
            return observed <= self.value + self.tolerance
        if self.kind == "min":
            return observed >= self.value - self.tolerance
        return abs(observed - self.value) <= self.tolerance


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    description: str
    config: dict[str, Any]
    expected: tuple[Expected, ...]
    convergence: bool = False

    def parsed(self) -> ExperimentConfig:
        return parse_config(self.config)


_COMMON = (
    Expected("audits_failed", 0.0, 0.0, "TRIVIAL"),
    Expected("ellipticity_coverage", 0.0, 0.0, "STATED", "min"),
    Expected("lambda_cross_method", 0.0, 1e-3, "DERIVED"),
    Expected("discount_bound_excess", 0.0, 1e-6, "STATED"),
    Expected("long_time_residual", 0.0, 1e-6, "DERIVED"),
    Expected("osc_ratio", 1.0, 1.0, "DERIVED"),
    Expected("lip_ratio", 1.0, 1.0, "DERIVED"),
)

_QUAD_X2 = {"block": "x2", "beta": 1.5, "discretization": "quadrature"}
_SPEC = {"beta": 1.5, "discretization": "spectral"}

CATALOG: dict[str, CatalogEntry] = {
    e.id: e
    for e in [
        CatalogEntry(
            "toy-mixed",
            "Local diffusion in x1, order-1.5 fractional diffusion in x2 (raw kernel, monotone quadrature), "
            "H = |Du|^2, f = cos(2πx1) + cos(2πx2).",
            {
                "mode": "reproduce", "name": "toy-mixed",
                "grid": {"d1": 1, "d2": 1, "n": 64},
                "local": [{"block": "x1", "a": 1.0}],
                "nonlocal": [dict(_QUAD_X2)],
                "gradient": [{"block": "full", "b": 1.0, "k": 2.0}],
                "f": "sum[cos1:0,cos1:1]", "m": 2.0, "T": 10.0,
                "delta_schedule": [0.2, 0.1, 0.05, 0.025],
            },
            _COMMON + (
                Expected("osc_at_T", 0.0, 1e-2, "DERIVED"),
                Expected("osc_increase_excess", 0.0, 0.0, "DERIVED"),
                Expected("m_violation_excess", 0.0, 0.0, "STATED"),
            ),
            convergence=True,
        ),
        CatalogEntry(
            "fractional-drift",
            "Spectral order-1.5 fractional Laplacian with sign-changing drift (0.3 + sin 2πx)|Du|, f = cos(2πx).",
            {
                "mode": "reproduce", "name": "fractional-drift",
                "grid": {"d1": 1, "d2": 0, "n": 64},
                "nonlocal": [dict(_SPEC, block="full")],
                "gradient": [{"block": "full", "b": "sum[const:0.3,sin1]", "k": 1.0}],
                "f": "cos1", "m": 1.0, "T": 10.0,
                "delta_schedule": [0.2, 0.1, 0.05, 0.025],
            },
            _COMMON,
        ),
        CatalogEntry(
            "superlinear",
            "Spectral order-1.5 fractional Laplacian, drift 0.5 sin(2πx)|Du| and H = |Du|^m (m = 2 or 1.5), "
            "f = cos(2πx).",
            {
                "mode": "reproduce", "name": "superlinear",
                "grid": {"d1": 1, "d2": 0, "n": 64},
                "nonlocal": [dict(_SPEC, block="full")],
                "gradient": [{"block": "full", "b": "0.5*sin1", "k": 1.0}, {"block": "full", "b": 1.0, "k": 2.0}],
                "f": "cos1", "m": 2.0, "T": 10.0,
                "delta_schedule": [0.2, 0.1, 0.05, 0.025],
            },
            _COMMON,
        ),
        CatalogEntry(
            "composed",
            "Degenerate mix: a1(x) = 0.2(1 - sin 2πx) local diffusion plus a fractional term with jump "
            "scaled by a2 = max(0, sin 2πx)^2, which vanishes on half the cell; a1 + a2 >= 0.19. H = |Du|^2.",
            {
                "mode": "reproduce", "name": "composed",
                "grid": {"d1": 1, "d2": 0, "n": 64},
                "local": [{"block": "full", "a": "sum[const:0.2,-0.2*sin1]"}],
                "nonlocal": [{"block": "full", "beta": 1.5, "discretization": "quadrature",
                              "normalization": "normalized-multiplier",
                              "jump": {"kind": "scaled", "a2": "bump"}}],
                "gradient": [{"block": "full", "b": 1.0, "k": 2.0}],
                "f": "cos1", "m": 2.0, "T": 10.0,
                "delta_schedule": [0.2, 0.1, 0.05, 0.025],
            },
            _COMMON + (
                Expected("ellipticity_coverage", 0.19, 0.005, "DERIVED", "min"),
                Expected("discounted_residual_max", 0.0, 1e-8, "DERIVED"),
            ),
        ),
        CatalogEntry(
            "mixed-gradients",
            "Variable local diffusion in x1, fractional diffusion in x2, block gradients "
            "b1(x1)|D_x1 u|^1.5 + b2(x2)|D_x2 u|^1.25 with b1, b2 >= 0.5.",
            {
                "mode": "reproduce", "name": "mixed-gradients",
                "grid": {"d1": 1, "d2": 1, "n": 64},
                "local": [{"block": "x1", "a": "sum[const:1,0.5*cos1:0]"}],
                "nonlocal": [dict(_QUAD_X2)],
                "gradient": [
                    {"block": "x1", "b": "sum[const:1,0.5*cos1:0]", "k": 1.5},
                    {"block": "x2", "b": "sum[const:1,0.5*sin1:1]", "k": 1.25},
                ],
                "f": "sum[cos2d,sin1:1]", "m": 1.5, "T": 10.0,
                "delta_schedule": [0.2, 0.1, 0.05, 0.025],
            },
            _COMMON,
        ),
        CatalogEntry(
            "sub-vs-super",
            "Local diffusion in x1, spectral fractional diffusion in x2, sign-changing sublinear "
            "sin(2πx1)|D_x1 u|, superlinear 0.5|D_x2 u|^1.5 and H = |Du|^2, f = cos(2πx1) + sin(2πx2).",
            {
                "mode": "reproduce", "name": "sub-vs-super",
                "grid": {"d1": 1, "d2": 1, "n": 64},
                "local": [{"block": "x1", "a": 1.0}],
                "nonlocal": [dict(_SPEC, block="x2")],
                "gradient": [
                    {"block": "x1", "b": "sin1:0", "k": 1.0},
                    {"block": "x2", "b": 0.5, "k": 1.5},
                    {"block": "full", "b": 1.0, "k": 2.0},
                ],
                "f": "sum[cos1:0,sin1:1]", "m": 2.0, "T": 10.0,
                "delta_schedule": [0.2, 0.1, 0.05, 0.025],
            },
            _COMMON,
        ),
    ]
}
for _entry in CATALOG.values():
    _entry.config["example_id"] = _entry.id


def get_entry(example_id: str, m: float | None = None, n: int | None = None) -> CatalogEntry:
    """Catalog entry, optionally with the H-exponent ``m`` or grid size ``n`` overridden."""
    try:
        entry = CATALOG[example_id]
    except KeyError:
        raise UnknownExampleError(f"unknown id {example_id!r}; known: {sorted(CATALOG)}") from None
    if m is None and n is None:
        return entry
    cfg = copy.deepcopy(entry.config)
    if n is not None:
        cfg["grid"]["n"] = int(n)
    if m is not None:
        if not any(t["block"] == "full" and t.get("b", 1.0) == 1.0 for t in cfg.get("gradient", [])):
            raise ValueError(f"entry {example_id!r} has no overridable H = |Du|^m term")
        for t in cfg["gradient"]:
            if t["block"] == "full" and t.get("b", 1.0) == 1.0:
                t["k"] = float(m)
        cfg["m"] = float(m)
    return CatalogEntry(entry.id, entry.description, cfg, entry.expected, entry.convergence)


def run_audits(problem: ProblemSpec) -> dict[str, dict[str, Any]]:
    """Assumption audits applicable to ``problem``: measures, jumps and H."""
    out: dict[str, dict[str, Any]] = {}
    for i, term in enumerate(problem.nonlocal_terms):
        out[f"M1[{i}]"] = audit_M1(term.measure).to_dict()
        out[f"M2[{i}]"] = audit_M2(term.measure).to_dict()
        if term.jump.kind == "scaled":
            out[f"jump[{i}]"] = audit_jump(term.jump, problem.grid, term.beta).to_dict()
    m = problem.hamiltonian_exponent
    if m is not None:
        if m > 1.0:
            out["H-b"] = audit_Hb(m).to_dict()
            out["propH"] = audit_propH(m).to_dict()
        else:
            out["H-a"] = audit_Ha(m, [[1.0] + [0.0] * (problem.grid.d - 1), [0.3] * problem.grid.d]).to_dict()
    return out


@dataclass
class ReproductionReport:
    example_id: str
    metrics: dict[str, float] = field(default_factory=dict)
    rows: list[dict[str, Any]] = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r["pass"] for r in self.rows)

    def table(self) -> str:
        lines = [f"{'metric':<26} {'observed':>14} {'expected':>10} {'tol':>9} {'kind':>4} {'tag':>8}  result"]
        for r in self.rows:
            lines.append(
                f"{r['metric']:<26} {r['observed']:>14.6g} {r['expected']:>10.4g} {r['tolerance']:>9.2g} "
                f"{r['kind']:>4} {r['tag']:>8}  {'PASS' if r['pass'] else 'FAIL'}"
            )
        return "\n".join(lines)


def reproduce(
    example_id: str,
    m: float | None = None,
    n: int | None = None,
    tol: float | None = None,
    log: Callable[[str], None] | None = None,
) -> ReproductionReport:
    """Run a catalog entry and compare every expected metric."""
    say = log or (lambda _msg: None)
    start = time.perf_counter()
    entry = get_entry(example_id, m=m, n=n)
    cfg = entry.parsed()
    problem = build_problem(cfg)
    params = cfg.parameters
    solver_tol = tol if tol is not None else params["tol"]
    report = ReproductionReport(example_id)
    met = report.metrics

    say(f"[{example_id}] audits")
    audits = run_audits(problem)
    report.details["audits"] = audits
    met["audits_failed"] = float(sum(not a["pass"] for a in audits.values()))
    met["ellipticity_coverage"] = ellipticity_coverage(problem)

    say(f"[{example_id}] vanishing discount over {params['delta_schedule']}")
    vd = vanishing_discount(problem, params["delta_schedule"], solver_tol)
    T = float(params["T"])
    say(f"[{example_id}] long-time run to T={T}")
    u0 = initial_datum(cfg)
    if entry.convergence:
        spacing = 0.25
        times = [k * spacing for k in range(int(round(T / spacing)) + 1)]
        run = solve_cauchy(u0, problem, T, times)
        lt = pair_from_snapshots(problem, run.snapshots, T, max(1.0, T / 8))
        # the profile for m(t) comes from the independent vanishing-discount construction
        conv = convergence_report(run, vd)
        report.details["convergence"] = {
            "times": conv.times, "m": conv.m_series, "min": conv.min_series, "osc": conv.osc_series,
        }
        met["osc_at_T"] = conv.osc_series[-1]
        # v is only an approximate ergodic profile, so both monotonicity checks
        # carry a tolerance proportional to its residual
        slack = 10.0 * vd.residual * spacing
        met["osc_increase"] = conv.osc_violation()
        met["m_violation"] = conv.monotone_violation
        met["monotone_tolerance"] = slack
        met["osc_increase_excess"] = max(0.0, conv.osc_violation() - slack)
        met["m_violation_excess"] = max(0.0, conv.monotone_violation - slack)
    else:
        lt = long_time_pair(problem, u0, T)

    sup_dv = vd.diagnostics["sup_delta_v_series"]
    met["lambda_vd"] = vd.lambda_
    met["lambda_lt"] = lt.lambda_
    met["lambda_cross_method"] = abs(vd.lambda_ - lt.lambda_)
    met["discount_bound_excess"] = max(0.0, max(sup_dv) - vd.diagnostics["bound_M"])
    met["long_time_residual"] = lt.residual
    met["vd_residual"] = vd.residual
    met["osc_ratio"] = vd.diagnostics["osc_ratio"]
    met["lip_ratio"] = vd.diagnostics["lip_ratio"]
    met["discounted_residual_max"] = max(vd.diagnostics["discounted_residuals"])
    report.details["vanishing_discount"] = vd.to_dict()
    report.details["long_time"] = lt.to_dict()
    report.details["pairs"] = {"vanishing-discount": vd, "long-time": lt}

    for exp in entry.expected:
        obs = float(met[exp.metric])
        report.rows.append({
            "metric": exp.metric, "observed": obs, "expected": exp.value, "tolerance": exp.tolerance,
            "kind": exp.kind, "tag": exp.tag, "pass": exp.check(obs),
        })
    report.wall_time = time.perf_counter() - start
    return report
