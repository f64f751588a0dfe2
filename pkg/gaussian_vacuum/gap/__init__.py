from .closed_form import (
    branch_argument,
    has_broken_solutions,
    mean_field,
    solve_broken,
    solve_closed_form,
    solve_symmetric,
)
from .generic import GenericSolveResult, solve_generic
from .residual import (
    exact_gap_system,
    gap_residual,
    log_mass_jacobian,
    residual_norm,
    residual_tolerance,
)
from .scan import PhaseScan, critical_couplings, phase_scan
from .stability import classify_stability, rank_solutions, selected_phase, solve_all

__all__ = [
    "GenericSolveResult",
    "PhaseScan",
    "branch_argument",
    "classify_stability",
    "critical_couplings",
    "exact_gap_system",
    "gap_residual",
    "has_broken_solutions",
    "log_mass_jacobian",
    "mean_field",
    "phase_scan",
    "rank_solutions",
    "residual_norm",
    "residual_tolerance",
    "selected_phase",
    "solve_all",
    "solve_broken",
    "solve_closed_form",
    "solve_generic",
    "solve_symmetric",
]
