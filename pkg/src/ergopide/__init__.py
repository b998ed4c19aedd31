"""Numerical toolkit for ergodic problems and long-time behavior of mixed
local/nonlocal parabolic equations on the periodic torus."""

from __future__ import annotations

__version__ = "0.1.0"

from .torus import (  # noqa: E402
    GridError,
    GridField,
    TorusGrid,
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
from .levy import (  # noqa: E402
    AuditReport,
    JumpFunctionSpec,
    LevyMeasureSpec,
    NonlocalOperatorSpec,
    apply_quadrature_levy,
    apply_spectral_fractional,
    audit_jump,
    audit_M1,
    audit_M2,
    compile_nonlocal,
    kernel_constant,
)
from .scheme import (  # noqa: E402
    CFLError,
    GradientTermSpec,
    LocalTermSpec,
    ProblemSpec,
    apply_spatial_operator,
    cfl_timestep,
)
from .cauchy import CauchyRun, SolverError, solve_cauchy, solve_cauchy_ensemble, step_explicit  # noqa: E402
from .ergodic import (  # noqa: E402
    ErgodicPair,
    ergodic_residual,
    long_time_pair,
    solve_discounted,
    uniqueness_probe,
    vanishing_discount,
)
from .diagnostics import audit_Ha, audit_Hb, audit_propH, convergence_report  # noqa: E402
