"""Normalized ground states of nonlinear Schrödinger systems on radial grids."""

from .dynamics import WaveState, conservation_report, evolve, orbital_distance
from .functional import (
    MassSpec,
    check_thresholds,
    energy,
    energy_gradient,
    gn_check,
    multipliers,
    pde_residual,
    pohozaev_residual,
    solve_soliton,
    trial_negative,
)
from .grid import Domain, Field
from .nonlinearity import (
    LogCusp,
    MinIntegral,
    Nonlinearity,
    PiecewiseCritical,
    Power,
    PowerProduct,
    Tabulated,
    check_hypotheses,
    eta_estimate,
)
from .rearrange import generalized_inverse, merge_star, property_suite, schwarz
from .solver import (
    MinimizeOptions,
    MinimizeResult,
    ThresholdViolation,
    minimize,
    project_D,
    scan_energy_map,
    subadditivity_check,
    verify_ground_state,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
