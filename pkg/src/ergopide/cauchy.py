"""Explicit monotone time integration of the Cauchy problem

    ∂_t u + F1 + F2 + H(Du) = f,   u(x, 0) = u0(x)

with snapshot recording and trajectory diagnostics.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .scheme import LIPSCHITZ_REFRESH, CFLError, ProblemSpec, cfl_timestep
from .torus import GridError, GridField, discrete_lipschitz, field_to_csv

__all__ = [
    "SolverError",
    "CauchyRun",
    "step_explicit",
    "solve_cauchy",
    "solve_cauchy_ensemble",
    "default_snapshot_times",
    "write_run",
]

DEFAULT_SAFETY = 0.9
# headroom on the Lipschitz bound while it is frozen between refreshes
LIPSCHITZ_HEADROOM = 1.25
BLOWUP_FACTOR = 1e6


class SolverError(RuntimeError):
    """Blow-up, non-finite update or iteration budget exhausted."""


@dataclass
class CauchyRun:
    problem: ProblemSpec
    u0: GridField
    T: float
    snapshot_times: list[float]
    snapshots: list[tuple[float, GridField]] = field(default_factory=list)
    slope_series: list[tuple[float, float]] = field(default_factory=list)
    steps: int = 0

    def final(self) -> GridField:
        return self.snapshots[-1][1]

    def snapshot_at(self, t: float) -> GridField:
        for s, u in self.snapshots:
            if math.isclose(s, t, rel_tol=0.0, abs_tol=1e-12):
                return u
        raise KeyError(f"no snapshot at t={t}")

    def trajectory_rows(self) -> list[tuple[float, float, float, float, float]]:
        slopes = dict(self.slope_series)
        rows = []
        for t, u in self.snapshots:
            rows.append((t, float(np.max(np.abs(u.values))), float(np.mean(u.values)),
                         slopes.get(t, math.nan), discrete_lipschitz(u)))
        return rows

    def trajectory_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "sup_norm", "mean", "slope", "lipschitz"])
        for row in self.trajectory_rows():
            writer.writerow([format(x, ".17g") for x in row])
        return buf.getvalue()


def step_explicit(u: GridField, problem: ProblemSpec, dt: float) -> GridField:
    """One forward Euler step ``u - dt * apply_spatial_operator(u)``."""
    if u.grid != problem.grid:
        raise GridError("field and problem live on different grids")
    limit = cfl_timestep(problem, u, 1.0)
    if not 0.0 < dt <= limit * (1.0 + 1e-12):
        raise CFLError(f"dt={dt:.6g} violates the CFL bound {limit:.6g}")
    new = u.values - dt * problem.operator(u.values)
    if not np.all(np.isfinite(new)):
        raise SolverError("non-finite update")
    return GridField(u.grid, new)


def default_snapshot_times(T: float) -> list[float]:
    """``0, 1, 2, ...`` up to ``T``, always ending at ``T``."""
    times = [float(k) for k in range(int(math.floor(T)) + 1) if k < T]
    if not times or times[-1] != T:
        times.append(float(T))
    return times


def _batch_lipschitz(values: np.ndarray, d: int, h: float) -> float:
    best = 0.0
    for ax in range(-d, 0):
        best = max(best, float(np.max(np.abs(np.roll(values, -1, axis=ax) - values))))
    return best / h


def _integrate(
    values: np.ndarray,
    problem: ProblemSpec,
    T: float,
    snapshot_times: Sequence[float],
    safety: float,
    extra_rate: float = 0.0,
) -> tuple[list[tuple[float, np.ndarray]], int]:
    """March a (possibly batched) array with one shared step sequence.

    Steps are shortened to land exactly on every snapshot time, so all batch
    members see identical ``dt`` and the discrete comparison principle holds
    between them without interpolation error.
    """
    grid = problem.grid
    h = grid.h
    static = problem.static_rate() + extra_rate
    sup_f = float(np.max(np.abs(problem.source.values)))
    guard = BLOWUP_FACTOR * (float(np.max(np.abs(values))) + T * sup_f + 1.0)
    has_gradient = any(t.exponent > 1.0 for t in problem.gradient_terms)

    out: list[tuple[float, np.ndarray]] = []
    pending = list(snapshot_times)
    while pending and pending[0] <= 0.0:
        out.append((pending.pop(0), values.copy()))

    t = 0.0
    steps = 0
    dt_cfl = 0.0
    while pending:
        if steps % LIPSCHITZ_REFRESH == 0 or not has_gradient:
            G = LIPSCHITZ_HEADROOM * _batch_lipschitz(values, grid.d, h) if has_gradient else 0.0
            rate = static + problem.gradient_rate(G)
            if not rate > 0.0:
                raise CFLError("degenerate: all rates vanish")
            dt_cfl = safety / rate
        target = pending[0]
        dt = dt_cfl
        landing = t + dt >= target * (1.0 - 1e-14)
        if landing:
            dt = target - t
        if dt > 0.0:
            values = values - dt * problem.operator(values)
            steps += 1
        t = target if landing else t + dt
        if not np.all(np.isfinite(values)):
            raise SolverError(f"non-finite update at t={t:.6g}")
        if float(np.max(np.abs(values))) > guard:
            raise SolverError(f"blow-up at t={t:.6g}: sup norm exceeds {guard:.3g}")
        if landing:
            out.append((pending.pop(0), values.copy()))
    return out, steps


def _check_times(T: float, snapshot_times: Sequence[float] | None) -> list[float]:
    if not T > 0:
        raise ValueError("horizon T must be positive")
    times = default_snapshot_times(T) if snapshot_times is None else [float(s) for s in snapshot_times]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("snapshot times must be strictly increasing")
    if times and (times[0] < 0.0 or times[-1] > T):
        raise ValueError("snapshot times must lie in [0, T]")
    return times


def _slopes(snaps: list[tuple[float, GridField]]) -> list[tuple[float, float]]:
    return [
        (t1, (float(np.mean(u1.values)) - float(np.mean(u0.values))) / (t1 - t0))
        for (t0, u0), (t1, u1) in zip(snaps, snaps[1:])
    ]


def solve_cauchy_ensemble(
    u0_list: Sequence[GridField],
    problem: ProblemSpec,
    T: float,
    snapshot_times: Sequence[float] | None = None,
    safety: float = DEFAULT_SAFETY,
) -> list[CauchyRun]:
    """Integrate several initial data with a common step sequence.

    The shared ``dt`` is the CFL step of the whole batch (smallest over
    members), which is what makes ordering between members exact for
    monotone problems.
    """
    if not u0_list:
        raise ValueError("need at least one initial datum")
    for u0 in u0_list:
        if u0.grid != problem.grid:
            raise GridError("initial datum and problem live on different grids")
    times = _check_times(T, snapshot_times)
    batch = np.stack([u.values for u in u0_list])
    raw, steps = _integrate(batch, problem, T, times, safety)
    runs = []
    for i, u0 in enumerate(u0_list):
        snaps = [(t, GridField(problem.grid, arr[i])) for t, arr in raw]
        runs.append(CauchyRun(problem, u0, float(T), times, snaps, _slopes(snaps), steps))
    return runs


def solve_cauchy(
    u0: GridField,
    problem: ProblemSpec,
    T: float,
    snapshot_times: Sequence[float] | None = None,
    safety: float = DEFAULT_SAFETY,
) -> CauchyRun:
    """Integrate from ``u0`` to ``T`` with adaptive CFL steps.

    Parameters
    ----------
    snapshot_times
        Increasing instants in ``[0, T]``; defaults to ``0, 1, ..., T``.
        Steps are shortened to land on them exactly.
    safety
        Fraction of the monotone CFL step actually taken.

    Raises
    ------
    SolverError
        If the sup norm exceeds ``1e6 * (||u0|| + T ||f|| + 1)`` or an update
        becomes non-finite.
    """
    return solve_cauchy_ensemble([u0], problem, T, snapshot_times, safety)[0]


def write_run(run: CauchyRun, directory: str | Path, prefix: str = "") -> list[Path]:
    """Write the trajectory CSV and one torus CSV per snapshot."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = [directory / f"{prefix}trajectory.csv"]
    paths[0].write_text(run.trajectory_csv())
    for k, (_, u) in enumerate(run.snapshots):
        p = directory / f"{prefix}snapshot_{k:04d}.csv"
        p.write_text(field_to_csv(u))
        paths.append(p)
    return paths

