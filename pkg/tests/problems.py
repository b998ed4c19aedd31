"""Small problem builders shared by the test modules."""

from __future__ import annotations

import numpy as np

from ergopide.levy import JumpFunctionSpec, LevyMeasureSpec, NonlocalOperatorSpec
from ergopide.scheme import GradientTermSpec, LocalTermSpec, ProblemSpec
from ergopide.torus import constant, make_grid, sample


def cos1(grid, axis=0):
    return sample(lambda *x: np.cos(2 * np.pi * x[axis]), grid)


def heat(n=64, f=None, a=1.0):
    g = make_grid(1, 0, n)
    return ProblemSpec(g, constant(g, 0.0) if f is None else f(g), local_terms=[LocalTermSpec("x1", a)])


def symbol(n, k=1):
    """3-point Laplacian symbol for mode k on an n-point grid."""
    h = 1.0 / n
    return 2.0 * (1.0 - np.cos(2 * np.pi * k * h)) / h**2


def spectral(block="x1", beta=1.5):
    return NonlocalOperatorSpec(block, LevyMeasureSpec(beta), discretization="spectral")


def quadrature(block="x1", beta=1.5, jump=None):
    return NonlocalOperatorSpec(block, LevyMeasureSpec(beta), discretization="quadrature",
                                jump=jump or JumpFunctionSpec())


def toy(n=16, m=2.0, nonlocal_kind="quadrature", f=None):
    g = make_grid(1, 1, n)
    nl = quadrature("x2") if nonlocal_kind == "quadrature" else spectral("x2")
    src = f(g) if f is not None else cos1(g, 0) + cos1(g, 1)
    return ProblemSpec(g, src, local_terms=[LocalTermSpec("x1")], nonlocal_terms=[nl],
                       gradient_terms=[GradientTermSpec("full", 1.0, m)], hamiltonian_exponent=m)
