"""Ergodic pairs ``(λ, v)`` solving ``F[v] + H(Dv) = f - λ`` on the torus.

Two independent constructions are provided: the vanishing-discount limit of
``δ v^δ + F[v^δ] + H(Dv^δ) = f`` and the long-time slope/profile of the
Cauchy problem.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .cauchy import DEFAULT_SAFETY, LIPSCHITZ_HEADROOM, SolverError, solve_cauchy_ensemble
from .scheme import LIPSCHITZ_REFRESH, CFLError, ProblemSpec, discount_bound
from .torus import GridField, _lipschitz, constant, field_to_csv

__all__ = [
    "DiscountedSolution",
    "ErgodicPair",
    "solve_discounted",
    "vanishing_discount",
    "long_time_pair",
    "ergodic_residual",
    "uniqueness_probe",
    "richardson_limit",
    "pair_from_snapshots",
    "DEFAULT_SCHEDULE",
]

DEFAULT_SCHEDULE = (0.2, 0.1, 0.05)
DEFAULT_TOL = 1e-9
MAX_ITER = 2_000_000
_CHECK_EVERY = 8


@dataclass(frozen=True)
class DiscountedSolution:
    delta: float
    v_delta: GridField
    lambda_proxy_point: float
    lambda_proxy_mean: float
    residual: float
    iterations: int
    bound_M: float

    @property
    def normalized(self) -> GridField:
        """``v^δ - v^δ(node 0)``."""
        return self.v_delta - float(self.v_delta.values.flat[0])


@dataclass
class ErgodicPair:
    lambda_: float
    v: GridField
    residual: float
    method: str
    delta_schedule: list[float] | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"lambda": self.lambda_, "residual": self.residual, "method": self.method}
        if self.delta_schedule is not None:
            out["delta_schedule"] = list(self.delta_schedule)
        out["diagnostics"] = self.diagnostics
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write(self, directory: str | Path, prefix: str = "") -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        pj, pv = directory / f"{prefix}pair.json", directory / f"{prefix}v.csv"
        pj.write_text(self.to_json() + "\n")
        pv.write_text(field_to_csv(self.v))
        return [pj, pv]


def _normalize(values: np.ndarray) -> np.ndarray:
    return values - values.flat[0]


def ergodic_residual(pair: ErgodicPair, problem: ProblemSpec) -> float:
    """``sup |apply_spatial_operator(v) + λ|``."""
    return float(np.max(np.abs(problem.operator(pair.v.values) + pair.lambda_)))


def solve_discounted(
    problem: ProblemSpec,
    delta: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = MAX_ITER,
    safety: float = DEFAULT_SAFETY,
) -> DiscountedSolution:
    """Pseudo-time solve of ``δ v + A(v) = 0`` with ``A = apply_spatial_operator``.

    Every term of ``A`` except ``-f`` is invariant under adding constants, so
    writing ``v = c + w`` with ``mean(w) = 0`` decouples the iteration: ``w``
    follows ``w ← w - dτ (δ w + A(w) - mean A(w))`` and the constant solves
    ``δ c = -mean A(w)`` in closed form.  This is the same fixed point as the
    plain march ``v ← v - dτ (δ v + A(v))`` started from zero, without the
    ``1/(δ dτ)`` relaxation time of the constant mode.

    Raises
    ------
    SolverError
        If the residual is still above ``tol`` after ``max_iter`` steps.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not tol > 0:
        raise ValueError("tol must be positive")
    grid = problem.grid
    h = grid.h
    static = problem.static_rate() + delta
    has_gradient = any(t.exponent > 1.0 for t in problem.gradient_terms)

    w = np.zeros(grid.shape)
    dtau = 0.0
    residual = math.inf
    it = 0
    while True:
        Aw = problem.operator(w)
        mA = float(np.mean(Aw))
        upd = delta * w + Aw - mA
        if it % _CHECK_EVERY == 0 or it >= max_iter:
            residual = float(np.max(np.abs(upd)))
            if residual <= tol:
                break
            if it >= max_iter:
                raise SolverError(f"discounted solve (δ={delta}) hit max_iter={max_iter}; residual {residual:.3e}")
            if not math.isfinite(residual):
                raise SolverError("non-finite residual in discounted solve")
        if it % LIPSCHITZ_REFRESH == 0:
            G = LIPSCHITZ_HEADROOM * _lipschitz(w, h) if has_gradient else 0.0
            rate = static + problem.gradient_rate(G)
            if not rate > 0:
                raise CFLError("degenerate: all rates vanish")
            dtau = safety / rate
        w = w - dtau * upd
        w -= np.mean(w)  # keep roundoff from feeding the constant mode
        it += 1

    c = -mA / delta
    v = w + c
    return DiscountedSolution(
        delta=float(delta),
        v_delta=GridField(grid, v),
        lambda_proxy_point=float(delta * v.flat[0]),
        lambda_proxy_mean=float(delta * np.mean(v)),
        residual=residual,
        iterations=it,
        bound_M=discount_bound(problem),
    )


def richardson_limit(deltas: Sequence[float], values: Sequence[float], order: int = 1) -> float:
    """Extrapolate ``values(δ)`` to ``δ = 0`` with a degree-``order`` polynomial
    through the ``order + 1`` smallest ``δ``."""
    pts = sorted(zip(deltas, values))[: order + 1]
    if len(pts) < order + 1:
        raise ValueError(f"need {order + 1} points for order-{order} extrapolation")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    # Lagrange weights at 0
    weights = [np.prod([x[j] / (x[j] - x[i]) for j in range(len(x)) if j != i]) for i in range(len(x))]
    return float(np.dot(weights, y))


def _ratio(series: Sequence[float]) -> float:
    lo, hi = min(series), max(series)
    if hi == 0.0:
        return 1.0
    return math.inf if lo == 0.0 else hi / lo


def vanishing_discount(
    problem: ProblemSpec,
    delta_schedule: Sequence[float] = DEFAULT_SCHEDULE,
    tol: float = DEFAULT_TOL,
    order: int = 1,
    max_iter: int = MAX_ITER,
) -> ErgodicPair:
    """λ from the discounted family, extrapolated to ``δ = 0``.

    The mean proxy ``δ mean(v^δ)`` is extrapolated (linear in ``δ`` by
    default, through the two smallest discounts); the profile is the
    normalized ``ṽ^δ`` at the smallest ``δ``.  The oscillation and discrete
    Lipschitz constant of every ``ṽ^δ`` are recorded, with their max/min
    ratios over the schedule.
    """
    sched = [float(d) for d in delta_schedule]
    if len(sched) < 3:
        raise ValueError("delta schedule needs at least 3 entries")
    if any(d <= 0 for d in sched) or any(b >= a for a, b in zip(sched, sched[1:])):
        raise ValueError("delta schedule must be positive and strictly decreasing")

    sols = [solve_discounted(problem, d, tol, max_iter) for d in sched]
    proxies = [s.lambda_proxy_mean for s in sols]
    lam = richardson_limit(sched, proxies, order)
    tilde = [s.normalized for s in sols]
    osc = [float(np.ptp(t.values)) for t in tilde]
    lip = [_lipschitz(t.values, problem.grid.h) for t in tilde]
    diffs = np.diff(proxies)
    proxy_tol = 10 * tol
    monotone = bool(np.all(diffs >= -proxy_tol) or np.all(diffs <= proxy_tol))

    pair = ErgodicPair(
        lambda_=lam,
        v=tilde[-1],
        residual=0.0,
        method="vanishing-discount",
        delta_schedule=sched,
        diagnostics={
            "osc_series": osc,
            "lip_series": lip,
            "osc_ratio": _ratio(osc),
            "lip_ratio": _ratio(lip),
            "proxy_mean_series": proxies,
            "proxy_point_series": [s.lambda_proxy_point for s in sols],
            "sup_delta_v_series": [float(np.max(np.abs(s.delta * s.v_delta.values))) for s in sols],
            "discounted_residuals": [s.residual for s in sols],
            "iterations": [s.iterations for s in sols],
            "bound_M": sols[0].bound_M,
            "proxies_monotone": monotone,
            "extrapolation_order": order,
        },
    )
    pair.residual = ergodic_residual(pair, problem)
    return pair


def pair_from_snapshots(
    problem: ProblemSpec, snaps: Sequence[tuple[float, GridField]], T: float, window: float, tol: float = 1e-6
) -> ErgodicPair:
    """Long-time pair from snapshots that include ``T - 2 window``, ``T - window`` and ``T``."""
    def at(t: float) -> GridField:
        for s, u in snaps:
            if abs(s - t) <= 1e-9 * max(1.0, T):
                return u
        raise ValueError(f"no snapshot at t={t}")

    mean_at = {t: float(np.mean(at(t).values)) for t in (T - 2 * window, T - window, T)}
    t_prev, t_mid = T - 2 * window, T - window
    lam = (mean_at[T] - mean_at[t_mid]) / window
    lam_prev = (mean_at[t_mid] - mean_at[t_prev]) / window
    rel = abs(lam - lam_prev) / max(1.0, abs(lam))
    final = at(T)
    v = GridField(problem.grid, _normalize(final.values - lam * T))
    pair = ErgodicPair(
        lambda_=lam,
        v=v,
        residual=0.0,
        method="long-time",
        diagnostics={
            "T": T,
            "window": window,
            "slope_previous_window": lam_prev,
            "slope_relative_change": rel,
            "settled": bool(rel <= 10 * tol),
        },
    )
    pair.residual = ergodic_residual(pair, problem)
    return pair


def _lt_times(T: float, window: float) -> list[float]:
    if not window > 0 or T < 4 * window:
        raise ValueError("long-time extraction needs T >= 4*window > 0")
    return [T - 2 * window, T - window, T]


def long_time_pair(
    problem: ProblemSpec,
    u0: GridField | None = None,
    T: float = 10.0,
    window: float | None = None,
    tol: float = 1e-6,
) -> ErgodicPair:
    """λ as the late-time slope of ``mean u`` and ``v = u(T) - λT`` (normalized)."""
    window = max(1.0, T / 8) if window is None else float(window)
    u0 = constant(problem.grid, 0.0) if u0 is None else u0
    run = solve_cauchy_ensemble([u0], problem, T, _lt_times(T, window))[0]
    return pair_from_snapshots(problem, run.snapshots, T, window, tol)


def uniqueness_probe(
    problem: ProblemSpec,
    u0_list: Sequence[GridField],
    T: float = 10.0,
    window: float | None = None,
    tol: float = 1e-6,
) -> dict[str, Any]:
    """Long-time pairs from several initial data; pairwise λ and profile spreads."""
    if len(u0_list) < 2:
        raise ValueError("uniqueness probe needs at least 2 initial data")
    window = max(1.0, T / 8) if window is None else float(window)
    pairs = []
    for u0 in u0_list:
        run = solve_cauchy_ensemble([u0], problem, T, _lt_times(T, window))[0]
        pairs.append(pair_from_snapshots(problem, run.snapshots, T, window, tol))
    lam_spread = max(abs(a.lambda_ - b.lambda_) for a, b in combinations(pairs, 2))
    prof_spread = max(float(np.ptp(a.v.values - b.v.values)) for a, b in combinations(pairs, 2))
    return {
        "lambdas": [p.lambda_ for p in pairs],
        "lambda_spread": lam_spread,
        "profile_spread": prof_spread,
        "settled": [p.diagnostics["settled"] for p in pairs],
        "residuals": [p.residual for p in pairs],
        "pairs": pairs,
    }
