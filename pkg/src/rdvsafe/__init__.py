"""Safety verification of a two-phase autonomous spacecraft rendezvous.

The package builds linear and nonlinear hybrid models of a chaser approaching
an orbiting target under a switched LQR controller, computes reachable sets
with generalized star sets, and proves or refutes the mission's geometric and
physical safety requirements, including collision avoidance along passive
abort trajectories.
"""

__version__ = "0.1.0"

from .hybrid import (
    HybridAutomaton,
    SafetyProperty,
    build_rendezvous_automaton,
    initial_thrust_box,
    los_halfspaces,
    octagon_halfspaces,
    separation_property,
    thrust_properties,
    velocity_polytope,
)
from .lqr import GainMatrix, Weights, bryson_weights, design_mode_gains, solve_care
from .numsim import (
    StepPropagator,
    Trajectory,
    build_propagator,
    matrix_exp,
    simulate_linear,
    simulate_nonlinear,
)
from .orbital import (
    LinearModel,
    OrbitalParams,
    closed_loop_matrix,
    cwh_matrices,
    mean_motion,
    nonlinear_field,
)
from .starset import (
    Box,
    StarSet,
    bounding_box,
    from_box,
    hull_boxes,
    propagate,
    support,
    violates_halfspace,
)
from .verifier import (
    FlowpipeSegment,
    Scenario,
    VerificationReport,
    default_scenario,
    falsify,
    monte_carlo_containment,
    partition_window,
    sweep_passive_time,
    verify,
    verify_windowed,
)

__all__ = [
    "Box",
    "FlowpipeSegment",
    "GainMatrix",
    "HybridAutomaton",
    "LinearModel",
    "OrbitalParams",
    "SafetyProperty",
    "Scenario",
    "StarSet",
    "StepPropagator",
    "Trajectory",
    "VerificationReport",
    "Weights",
    "bounding_box",
    "bryson_weights",
    "build_propagator",
    "build_rendezvous_automaton",
    "closed_loop_matrix",
    "cwh_matrices",
    "default_scenario",
    "design_mode_gains",
    "falsify",
    "from_box",
    "hull_boxes",
    "initial_thrust_box",
    "los_halfspaces",
    "matrix_exp",
    "mean_motion",
    "monte_carlo_containment",
    "nonlinear_field",
    "octagon_halfspaces",
    "partition_window",
    "propagate",
    "separation_property",
    "simulate_linear",
    "simulate_nonlinear",
    "solve_care",
    "support",
    "sweep_passive_time",
    "thrust_properties",
    "velocity_polytope",
    "verify",
    "verify_windowed",
    "violates_halfspace",
]
