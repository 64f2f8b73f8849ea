"""Energy-minimizing radial profiles for the dark monopole reduced functional.

The package solves for the profile pair (u, f) minimizing

    I(u, f) = ∫ 2u'² + (1 - u²)²/r² + α(r²f'² + β f²u²) + (αγ/2) r²(f² - 1)² dr

on a truncated, graded radial mesh, and checks the result against the
closed-form BPS solution, the energy bounds, and the asymptotic estimates.
"""

from .errors import (
    InvalidParameters,
    NonConvergence,
    SingularJacobian,
    WindowTooShort,
)
from .grid import RadialGrid, build_grid, derivative_stencil, second_derivative_stencil
from .energy import (
    INFINITY,
    EnergyBreakdown,
    Parameters,
    Profile,
    el_residual,
    energy,
    energy_gradient,
)
from .bps import (
    BpsConstants,
    bps_constants,
    bps_energy,
    bps_profile,
    bps_residual,
    energy_lower_bound,
    nonbps_upper_bound,
)
from .minimizer import (
    EnergyReport,
    InitKind,
    SolveConfig,
    SolvedProfile,
    initial_guess,
    newton_refine,
    project_box,
    solve,
)
from .gamma_inf import (
    GammaInfSolution,
    energy_bounds_gamma_inf,
    georgi_glashow_C,
    solve_gamma_inf,
    trial_energy,
    uniqueness_cross_check,
    virial_gap,
)
from .diagnostics import (
    BoundCheck,
    DiagnosticsReport,
    check_box_and_monotone,
    fit_asymptotics,
    run_diagnostics,
    verify_energy_bounds,
)

__version__ = "0.1.0"
