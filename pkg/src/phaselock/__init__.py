"""Long-term behaviour of phi' + sin phi = f for periodic f via a 2x2 monodromy."""

from .bias import BiasSpec, dc_component, evaluate, jump_points
from .errors import (
    CoincidentSolutions,
    ConfigError,
    DegenerateDenominator,
    InconsistentOrder,
    NegativeRadicand,
    NotNearInteger,
    PhaseLockError,
    StepSizeUnderflow,
    WrongRegime,
)
from .integrator import (
    GroundSolution,
    SolverConfig,
    Trajectory,
    integrate_ground,
    integrate_phase,
    integrate_rsj,
)
from .moebius import FValue, ProjectiveC, apply_solution_transport, c_functional, transport_F
from .monodromy import Monodromy, Regime, RegimeReport, analyze, build

__all__ = [
    "BiasSpec", "evaluate", "jump_points", "dc_component",
    "SolverConfig", "GroundSolution", "Trajectory",
    "integrate_ground", "integrate_phase", "integrate_rsj",
    "ProjectiveC", "FValue", "apply_solution_transport", "transport_F", "c_functional",
    "Monodromy", "Regime", "RegimeReport", "build", "analyze",
    "PhaseLockError", "StepSizeUnderflow", "DegenerateDenominator", "CoincidentSolutions",
    "WrongRegime", "NotNearInteger", "InconsistentOrder", "NegativeRadicand", "ConfigError",
]
