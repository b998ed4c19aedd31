"""Convergence-to-profile instrumentation and audits of the Hamiltonian
``H(p) = |p|^m``."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cauchy import CauchyRun
from .ergodic import ErgodicPair
from .levy import AuditReport
from .torus import GridError

__all__ = [
    "ConvergenceReport",
    "convergence_report",
    "audit_Ha",
    "audit_Hb",
    "audit_propH",
    "ETA_HAT",
]

ETA_HAT = 0.5


@dataclass(frozen=True)
class ConvergenceReport:
    times: list[float]
    m_series: list[float]
    min_series: list[float]
    osc_series: list[float]
    m_bar: float
    monotone_violation: float

    def osc_violation(self) -> float:
        """Largest increase of the oscillation between consecutive snapshots."""
        return max([0.0] + [b - a for a, b in zip(self.osc_series, self.osc_series[1:])])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "m", "min", "osc"])
        for row in zip(self.times, self.m_series, self.min_series, self.osc_series):
            writer.writerow([format(x, ".17g") for x in row])
        return buf.getvalue()


def convergence_report(run: CauchyRun, pair: ErgodicPair) -> ConvergenceReport:
    """Track ``m(t) = max(u - λt - v)``, its min counterpart and the oscillation."""
    if pair.v.grid != run.problem.grid:
        raise GridError("run and pair live on different grids")
    times, m, lo, osc = [], [], [], []
    for t, u in run.snapshots:
        e = u.values - pair.lambda_ * t - pair.v.values
        times.append(t)
        m.append(float(e.max()))
        lo.append(float(e.min()))
        osc.append(float(e.max() - e.min()))
    violation = max([0.0] + [b - a for a, b in zip(m, m[1:])])
    return ConvergenceReport(times, m, lo, osc, m[-1], violation)


def _H(p: np.ndarray, m: float) -> np.ndarray:
    return np.linalg.norm(np.atleast_2d(p), axis=-1) ** m


def audit_Ha(m: float, sample_p: Sequence[Sequence[float]], k_schedule: Sequence[float] = (10, 100, 1000)) -> AuditReport:
    """Recession limit ``lim (1/k) H(kp)`` of ``H(p) = |p|^m``.

    Passes when the sequence has stabilized at the largest ``k`` (relative
    change below ``1e-3``), or when it decays like ``k^{m-1}`` towards the
    zero limit for ``m < 1``.
    """
    P = np.atleast_2d(np.asarray(sample_p, dtype=float))
    if P.size == 0:
        raise ValueError("empty samples")
    ks = np.asarray(k_schedule, dtype=float)
    if len(ks) < 2 or np.any(np.diff(ks) <= 0):
        raise ValueError("k schedule must be increasing with at least 2 entries")
    norms = np.linalg.norm(P, axis=1)
    table = np.array([_H(k * P, m) / k for k in ks])  # (len(k), samples)
    last, prev = table[-1], table[-2]
    rel = np.abs(last - prev) / np.maximum(np.abs(last), 1e-300)
    if m == 1.0:
        limit = last
        passed = bool(np.all(rel < 1e-3))
    elif m < 1.0:
        limit = np.zeros_like(last)
        passed = bool(np.all(np.diff(table, axis=0) <= 0))
    else:
        limit = np.full_like(last, np.inf)
        passed = False
    return AuditReport(
        assumption="H-a",
        parameters={"m": m, "k_schedule": ks.tolist(), "samples": P.tolist()},
        computed_values={
            "values": table.tolist(),
            "limit": [float(x) if math.isfinite(x) else "inf" for x in limit],
            "abs_p": norms.tolist(),
            "relative_change": rel.tolist(),
        },
        passed=passed,
        summary={"limit_equals_abs_p": bool(m == 1.0 and np.allclose(limit, norms, rtol=1e-12))},
    )


def audit_Hb(m: float, mu0: float = 0.5, r0: float = 1.0, samples: int = 200, seed: int = 0) -> AuditReport:
    """Superlinearity constant of ``H(p) = |p|^m``.

    For ``μ ∈ [μ0, 1)`` and ``|p| ∈ [r0, 10 r0]``,
    ``(μH(p/μ) - H(p)) / ((1-μ)|p|^m) = (μ^{1-m} - 1)/(1-μ)``; its minimum
    over the samples is the fitted ``η``.  The infimum over ``μ < 1`` is
    ``m - 1`` (approached as ``μ → 1``).
    """
    if m <= 1.0:
        raise ValueError(f"audit_Hb needs m > 1 (got {m}): H is not superlinear")
    if not 0.0 < mu0 < 1.0:
        raise ValueError("mu0 must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    mu = np.concatenate([np.linspace(mu0, 1.0 - 1e-6, samples), rng.uniform(mu0, 1.0, samples)])
    mu = mu[mu < 1.0]
    r = rng.uniform(r0, 10.0 * r0, mu.size)
    # direct evaluation on sampled |p|; equals the closed-form ratio up to roundoff
    direct = (mu * (r / mu) ** m - r**m) / ((1.0 - mu) * r**m)
    ratio = (mu ** (1.0 - m) - 1.0) / (1.0 - mu)
    eta = float(ratio.min())
    return AuditReport(
        assumption="H-b",
        parameters={"m": m, "mu0": mu0, "r0": r0, "samples": int(mu.size), "seed": seed},
        computed_values={
            "eta_fitted": eta,
            "target": m - 1.0,
            "max_direct_vs_closed_form": float(np.max(np.abs(direct - ratio))),
        },
        passed=bool(eta >= (m - 1.0) * (1.0 - 1e-9)),
        summary={"eta_fitted": eta},
    )


def audit_propH(
    m: float,
    c_schedule: Sequence[float] = (1.0, 2.0, 5.0, 10.0),
    samples: int = 200,
    p_max: float = 10.0,
    eta_hat: float = ETA_HAT,
) -> AuditReport:
    """Check ``c^{-1}H(cp) - H(p) >= η̂ c^{m-1}|p|^m - 1/η̂`` on sampled ``|p|``.

    The inequality is only claimed for ``c >= c0``.  For ``H = |p|^m`` it
    holds for every ``p`` exactly when ``c^{m-1}(1 - η̂) >= 1``, which gives
    ``c0 = (1 - η̂)^{-1/(m-1)}``; below ``c0`` it holds on the ball
    ``|p|^m <= 1 / (η̂ (1 - c^{m-1}(1 - η̂)))`` only.  Samples include ``p = 0``.
    The audit passes when every sampled ``c >= c0`` has nonnegative margin.
    """
    if m <= 1.0:
        raise ValueError(f"audit_propH needs m > 1 (got {m})")
    if not 0.0 < eta_hat < 1.0:
        raise ValueError("eta_hat must lie in (0, 1)")
    cs = np.asarray(c_schedule, dtype=float)
    if np.any(cs < 1.0):
        raise ValueError("c must be >= 1")
    c0 = (1.0 - eta_hat) ** (-1.0 / (m - 1.0))
    r = np.linspace(0.0, p_max, samples)
    C, R = np.meshgrid(cs, r, indexing="ij")
    lhs = C ** (m - 1.0) * R**m - R**m
    rhs = eta_hat * C ** (m - 1.0) * R**m - 1.0 / eta_hat
    margin = lhs - rhs
    per_c = margin.min(axis=1)
    covered = cs >= c0 * (1.0 - 1e-12)
    worst = float(per_c[covered].min()) if covered.any() else math.inf
    slack = 1.0 - cs ** (m - 1.0) * (1.0 - eta_hat)
    with np.errstate(divide="ignore"):
        radius = np.where(slack > 0, (1.0 / (eta_hat * np.where(slack > 0, slack, 1.0))) ** (1.0 / m), np.inf)
    return AuditReport(
        assumption="propH",
        parameters={"m": m, "c_schedule": cs.tolist(), "samples": samples, "p_max": p_max, "eta_hat": eta_hat},
        computed_values={
            "c0": c0,
            "worst_margin_per_c": per_c.tolist(),
            "valid_radius_per_c": [float(x) if math.isfinite(x) else "inf" for x in radius],
            "worst_margin": worst if math.isfinite(worst) else "n/a",
        },
        passed=bool(covered.any() and worst >= 0.0),
        summary={"c0": c0},
    )
