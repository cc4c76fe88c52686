"""prabrelax: Prabhakar/Mittag-Leffler special functions and anomalous-relaxation solvers.

Evaluates the three-parameter Mittag-Leffler function and the Prabhakar
kernel, solves the associated memory-kernel relaxation equation by two
complementary series, closed forms and numerical Laplace inversion, and
cross-validates everything with physical-admissibility diagnostics.
"""

from .laplace import (
    BranchViolation,
    NonAgreement,
    OscillationDetected,
    SDomainFn,
    certified_invert,
    check_kochubei_conditions,
    invert_dehoog,
    invert_talbot,
    kernel_transform,
    mittag_leffler_2p,
    solution_transform,
)
from .relaxation import (
    AsymptoticBreakdown,
    Curve,
    InsufficientGrid,
    NoMethodConverged,
    ParameterViolation,
    RelaxationModel,
    default_grid,
    make_grid,
    residual,
    residual_report,
    solve_auto,
    solve_closed_gamma1,
    solve_debye,
    solve_series_large_regime,
    solve_series_small_regime,
    tau_star,
)
from .report import Check, DiagnosticsReport
from .special import (
    NonConvergence,
    PrabhakarParams,
    SeriesEval,
    mittag_leffler_3p,
    mittag_leffler_neg_int,
    prabhakar_kernel,
    reciprocal_gamma,
)
from .validation import complete_monotonicity_check, cross_validate

__version__ = "0.1.0"

__all__ = [
    "AsymptoticBreakdown",
    "BranchViolation",
    "Check",
    "Curve",
    "DiagnosticsReport",
    "InsufficientGrid",
    "NoMethodConverged",
    "NonAgreement",
    "NonConvergence",
    "OscillationDetected",
    "ParameterViolation",
    "PrabhakarParams",
    "RelaxationModel",
    "SDomainFn",
    "SeriesEval",
    "certified_invert",
    "check_kochubei_conditions",
    "complete_monotonicity_check",
    "cross_validate",
    "default_grid",
    "invert_dehoog",
    "invert_talbot",
    "kernel_transform",
    "make_grid",
    "mittag_leffler_2p",
    "mittag_leffler_3p",
    "mittag_leffler_neg_int",
    "prabhakar_kernel",
    "reciprocal_gamma",
    "residual",
    "residual_report",
    "solution_transform",
    "solve_auto",
    "solve_closed_gamma1",
    "solve_debye",
    "solve_series_large_regime",
    "solve_series_small_regime",
    "tau_star",
    "__version__",
]
