from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ergopide.cauchy import solve_cauchy
from ergopide.diagnostics import audit_Ha, audit_Hb, audit_propH, convergence_report
from ergopide.ergodic import ErgodicPair, vanishing_discount
from ergopide.torus import GridError, constant, make_grid

from problems import cos1, heat, symbol, toy


def exact_pair():
    p = heat(32, f=lambda g: cos1(g) * symbol(32) + 0.5)
    v = cos1(p.grid) - 1.0
    return p, ErgodicPair(0.5, v, 0.0, "long-time")


def test_report_from_exact_pair_is_zero():
    p, pair = exact_pair()
    run = solve_cauchy(pair.v, p, 2.0)
    rep = convergence_report(run, pair)
    assert np.max(np.abs(rep.m_series)) < 1e-10
    assert np.max(rep.osc_series) < 1e-10
    assert len(rep.times) == len(rep.m_series) == len(rep.min_series) == len(rep.osc_series)


def test_report_from_shifted_pair_is_constant():
    p, pair = exact_pair()
    run = solve_cauchy(pair.v + 5.0, p, 2.0)
    rep = convergence_report(run, pair)
    np.testing.assert_allclose(rep.m_series, 5.0, atol=1e-10)
    np.testing.assert_allclose(rep.osc_series, 0.0, atol=1e-10)
    assert rep.m_bar == pytest.approx(5.0)
    assert rep.monotone_violation < 1e-10


def test_report_grid_mismatch():
    p, pair = exact_pair()
    run = solve_cauchy(constant(p.grid, 0.0), p, 1.0)
    other = ErgodicPair(0.0, constant(make_grid(1, 0, 16), 0.0), 0.0, "long-time")
    with pytest.raises(GridError):
        convergence_report(run, other)


def test_report_on_small_toy_contracts():
    p = toy(16)
    pair = vanishing_discount(p, [0.2, 0.1, 0.05, 0.025], tol=1e-10)
    run = solve_cauchy(constant(p.grid, 0.0), p, 10.0)
    rep = convergence_report(run, pair)
    spacing = 1.0
    slack = 10 * pair.residual * spacing
    assert rep.monotone_violation <= slack
    assert rep.osc_violation() <= slack
    assert rep.osc_series[-1] < 1e-2
    lines = rep.to_csv().splitlines()
    assert lines[0] == "t,m,min,osc" and len(lines) == 12


# ---------------------------------------------------------------- H-a


def test_Ha_linear_growth_limit():
    rep = audit_Ha(1.0, [[1.0, 0.0], [0.3, -2.0], [3.0, 4.0]])
    assert rep.passed
    assert rep.summary["limit_equals_abs_p"]
    np.testing.assert_allclose(rep.computed_values["limit"], [1.0, math.hypot(0.3, 2.0), 5.0])


def test_Ha_sublinear_decays():
    rep = audit_Ha(0.5, [[1.0, 0.0]])
    np.testing.assert_allclose([row[0] for row in rep.computed_values["values"]], [10**-0.5, 0.1, 1000**-0.5])
    assert rep.passed and rep.computed_values["limit"] == [0.0]


def test_Ha_superlinear_fails():
    assert not audit_Ha(2.0, [[1.0, 1.0]]).passed


def test_Ha_errors():
    with pytest.raises(ValueError):
        audit_Ha(1.0, [])
    with pytest.raises(ValueError):
        audit_Ha(1.0, [[1.0]], k_schedule=[10])


# ---------------------------------------------------------------- H-b


@pytest.mark.parametrize("m", [1.5, 2.0])
def test_Hb_fitted_eta(m):
    rep = audit_Hb(m)
    assert rep.passed
    assert rep.summary["eta_fitted"] >= m - 1
    assert rep.summary["eta_fitted"] == pytest.approx(m - 1, rel=1e-4)
    assert rep.computed_values["max_direct_vs_closed_form"] < 1e-9


def test_Hb_eta_is_minimum_over_mu():
    # the ratio decreases in μ, so a box starting at μ0 = 0.5 tops out at 2 for m = 2
    rep = audit_Hb(2.0, mu0=0.5)
    assert 1.0 <= rep.summary["eta_fitted"] < 2.0


def test_Hb_requires_superlinear():
    with pytest.raises(ValueError):
        audit_Hb(1.0)


@given(st.floats(1.01, 3.0), st.floats(0.05, 0.95), st.integers(0, 1000))
def test_Hb_eta_never_below_m_minus_one(m, mu0, seed):
    assert audit_Hb(m, mu0=mu0, samples=50, seed=seed).passed


# ---------------------------------------------------------------- propH


def test_propH_examples():
    rep = audit_propH(2.0, c_schedule=[1.0, 2.0, 10.0])
    assert rep.passed
    c0 = rep.computed_values["c0"]
    assert c0 == pytest.approx(2.0)
    margins = rep.computed_values["worst_margin_per_c"]
    # c = 10, |p| = 1: 9 >= 5 - 2
    assert 9 - (5 - 2) > 0 and margins[2] >= 0
    # c = 1 only holds on |p|^m <= η̂^{-2}
    assert rep.computed_values["valid_radius_per_c"][0] == pytest.approx(2.0)
    assert margins[0] < 0


def test_propH_zero_gradient_margin():
    rep = audit_propH(1.5, c_schedule=[10.0], samples=3)
    assert rep.passed and rep.computed_values["worst_margin"] >= 0


def test_propH_errors():
    with pytest.raises(ValueError):
        audit_propH(1.0)
    with pytest.raises(ValueError):
        audit_propH(2.0, c_schedule=[0.5])
