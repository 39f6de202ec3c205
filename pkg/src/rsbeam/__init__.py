"""Globally optimal precoding for rate-splitting MISO downlinks.

Maximizes the weighted sum rate or energy efficiency of 1-layer rate
splitting over a Gaussian MISO downlink to a certified tolerance, via
branch-reduce-and-bound over SINR targets with SOCP bounding.
"""

from .bench import ExperimentSpec, generate_channels, run_experiment
from .boxes import Box, DegenerateBoxError, branch
from .conic import ConicSolveError
from .model import (
    Candidate,
    FeasibilityReport,
    ProblemInstance,
    RateReport,
    check_primal_feasible,
    compute_sinrs,
    initial_box,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    save_instance,
)
from .oracle import closed_form_special_cases, grid_certify
from .reduction import reduce_box
from .solver import (
    SolveResult,
    SolverConfig,
    SolveStats,
    Status,
    recover_dual_point,
    solve,
)
from .subproblems import (
    BoundingProblem,
    BoundOutcome,
    DualPoint,
    PowerMinProblem,
    PrimalCheckProblem,
    RawSolution,
    argument_cuts,
    best_common_split,
    improve_common_allocation,
)

__all__ = [
    "Box", "BoundOutcome", "BoundingProblem", "Candidate", "ConicSolveError",
    "DegenerateBoxError", "DualPoint", "ExperimentSpec", "FeasibilityReport",
    "PowerMinProblem", "PrimalCheckProblem", "ProblemInstance", "RateReport",
    "RawSolution", "SolveResult", "SolveStats", "SolverConfig", "Status",
    "argument_cuts", "best_common_split", "branch", "check_primal_feasible",
    "closed_form_special_cases", "compute_sinrs", "generate_channels",
    "grid_certify", "improve_common_allocation", "initial_box",
    "instance_from_dict", "instance_to_dict", "load_instance", "reduce_box",
    "recover_dual_point", "run_experiment", "save_instance", "solve",
]

__version__ = "0.1.0"
