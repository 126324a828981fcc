"""Derivative-free trust-region minimization on 2-D subspaces.

The solver explores the search space through a sequence of affine planes,
fitting quadratic interpolation models whose axis restriction is inherited
from one iteration to the next.  The package also ships the poisedness
analysis of the 3-point plane fit, a classic test-problem collection, a
simplex baseline and a benchmark harness producing performance and data
profiles.
"""

from .benchmark import (ProfileCurve, RunRecord, baseline_solve, data_profile,
                        facc, n_to_accuracy, performance_profile, run_benchmark)
from .geometry import (Frame, PlaneCoords, derive_next_frame, from_plane,
                       orthonormal_complement, project_1d, to_plane)
from .models import (InterpPoint, LagrangeBasis, Quad1D, Quad2D, build_full_2d,
                     build_qk, eval1d, eval2d, fit_initial_1d, lagrange_basis,
                     layout_case, poisedness_lambda, restrict_to_axis,
                     select_poised_subset)
from .problems import Problem, make_problem, nearest_valid_dim, registry
from .solver import (BudgetExhausted, CountingObjective, EvaluationError,
                     IterationRecord, SolveResult, SolverConfig, solve)
from .trustregion import TRSResult, solve_trs

__version__ = "0.1.0"

__all__ = [
    "BudgetExhausted", "CountingObjective", "EvaluationError", "Frame",
    "InterpPoint", "IterationRecord", "LagrangeBasis", "PlaneCoords",
    "Problem", "ProfileCurve", "Quad1D", "Quad2D", "RunRecord", "SolveResult",
    "SolverConfig", "TRSResult", "baseline_solve", "build_full_2d", "build_qk",
    "data_profile", "derive_next_frame", "eval1d", "eval2d", "facc",
    "fit_initial_1d", "from_plane", "lagrange_basis", "layout_case",
    "make_problem", "n_to_accuracy", "nearest_valid_dim",
    "orthonormal_complement", "performance_profile", "poisedness_lambda",
    "project_1d", "registry", "restrict_to_axis", "run_benchmark",
    "select_poised_subset", "solve", "solve_trs", "to_plane",
]
