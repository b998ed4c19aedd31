from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ergopide.torus import (
    GridError,
    GridField,
    constant,
    discrete_lipschitz,
    field_from_csv,
    field_to_csv,
    make_grid,
    mean,
    oscillation,
    sample,
    sup_norm,
)


def test_make_grid_2d():
    g = make_grid(1, 1, 64)
    assert g.d == 2 and g.h == 1 / 64 and g.shape == (64, 64)
    assert g.h * g.n == 1.0


def test_make_grid_pure_x2():
    g = make_grid(0, 1, 32)
    assert g.d == 1
    assert g.block_axes("x2") == (0,) and g.block_axes("x1") == ()


@pytest.mark.parametrize("args", [(1, 1, 7), (1, 0, 4), (1, 0, 48)])
def test_make_grid_rejects_bad_n(args):
    with pytest.raises(GridError, match="n-not-power-of-two"):
        make_grid(*args)


@pytest.mark.parametrize("args", [(0, 0, 8), (2, 0, 8), (1, 2, 8)])
def test_make_grid_rejects_bad_dimensions(args):
    with pytest.raises(GridError, match="dimension-out-of-range"):
        make_grid(*args)


def test_sample_constant_and_cos():
    g = make_grid(1, 0, 8)
    assert np.all(sample(lambda x: 3.0, g).values == 3.0)
    c = sample(lambda x: np.cos(2 * np.pi * x), g)
    np.testing.assert_array_equal(c.values, np.cos(2 * np.pi * np.arange(8) / 8))
    np.testing.assert_array_equal(sample(lambda x: x, g).values, np.arange(8) / 8)


def test_sample_rejects_non_finite():
    with pytest.raises(ValueError, match="non-finite"), np.errstate(divide="ignore"):
        sample(lambda x: 1.0 / x, make_grid(1, 0, 8))


def test_field_is_immutable():
    u = constant(make_grid(1, 0, 8), 1.0)
    with pytest.raises(ValueError):
        u.values[0] = 2.0
    with pytest.raises(AttributeError):
        u.grid = None


def test_norms_of_constant():
    u = constant(make_grid(1, 1, 8), 3.0)
    assert (sup_norm(u), oscillation(u), mean(u)) == (3.0, 0.0, 3.0)


def test_mean_of_cos_vanishes():
    u = sample(lambda x: np.cos(2 * np.pi * x), make_grid(1, 0, 8))
    assert abs(mean(u)) < 1e-16


def test_oscillation_two_values():
    # the smallest grid is n = 8; the two-value field is padded with repeats
    u = GridField(make_grid(1, 0, 8), [-1, 2, -1, 2, -1, 2, -1, 2])
    assert oscillation(u) == 3.0


def test_discrete_lipschitz_examples():
    g = make_grid(1, 0, 64)
    assert discrete_lipschitz(constant(g, 2.0)) == 0.0
    lip = discrete_lipschitz(sample(lambda x: np.cos(2 * np.pi * x), g))
    assert 6.0 <= lip <= 2 * math.pi
    spike = GridField(make_grid(1, 0, 8), [0, 1, 0, 0, 0, 0, 0, 0])
    assert discrete_lipschitz(spike) == 8.0


def test_csv_header_and_order():
    g = make_grid(1, 1, 8)
    u = sample(lambda x, y: x + 10 * y, g)
    lines = field_to_csv(u).splitlines()
    assert lines[0] == "i0,i1,value"
    assert lines[2] == "0,1,1.25"
    assert len(lines) == 65


def test_csv_rejects_wrong_header():
    g = make_grid(1, 0, 8)
    with pytest.raises(GridError):
        field_from_csv("x,value\n", g)


def test_grid_mismatch():
    a = constant(make_grid(1, 0, 8), 1.0)
    b = constant(make_grid(1, 0, 16), 1.0)
    with pytest.raises(GridError):
        a + b


values_1d = arrays(np.float64, 16, elements=st.floats(-1e6, 1e6, allow_nan=False))
values_2d = arrays(np.float64, (8, 8), elements=st.floats(-1e6, 1e6, allow_nan=False))


@given(values_2d)
def test_csv_roundtrip_is_bit_exact(vals):
    g = make_grid(1, 1, 8)
    u = GridField(g, vals)
    assert field_from_csv(field_to_csv(u), g) == u


@given(values_1d, st.floats(-1e3, 1e3), st.integers(-20, 20))
def test_oscillation_and_lipschitz_invariances(vals, c, k):
    g = make_grid(1, 0, 16)
    u = GridField(g, vals)
    assert oscillation(u + c) == pytest.approx(oscillation(u), rel=1e-9, abs=1e-6)
    assert sup_norm(u - mean(u)) <= oscillation(u) * (1 + 1e-12) + 1e-9
    assert discrete_lipschitz(u.shift([k])) == discrete_lipschitz(u)


@given(st.integers(0, 15), st.integers(0, 15))
def test_shift_matches_translated_sampling(k0, k1):
    g = make_grid(1, 1, 16)
    f = lambda x, y: np.sin(2 * np.pi * x) * np.cos(4 * np.pi * y) + np.cos(2 * np.pi * (x + 2 * y))  # noqa: E731
    shifted = sample(f, g).shift([k0, k1])
    direct = sample(lambda x, y: f(x + k0 * g.h, y + k1 * g.h), g)
    np.testing.assert_allclose(shifted.values, direct.values, atol=1e-12)
