"""Track-to-track association with dimension-reduced estimates."""
from .assignment import (Assignment, AssignmentMatrix, MatrixKind, build_approx_matrix,
                         build_full_matrix, build_reduced_matrix, count_incorrect, md_full,
                         md_reduced, solve_lap)
from .estimates import (Estimate, FusedEstimate, NumericalError, ReducedEstimate, ReductionMap,
                        TrackSet, fusion_loss, kalman_fuse, reduce_estimate)
from .gevo import GevoSolution, fusion_optimal_reduction, gen_eig_spd
from .maximin import (MomentPrediction, OptimizerState, RatioObjective, ScenarioError,
                      StepBounds, association_optimal_maps, association_optimal_reduction,
                      fixed_step_reduction, predict_moments, ratio_argmax, ratio_eval,
                      ratio_linearize, select_step, worst_index)

__version__ = "0.1.0"

__all__ = [
    "Assignment", "AssignmentMatrix", "MatrixKind", "build_approx_matrix", "build_full_matrix",
    "build_reduced_matrix", "count_incorrect", "md_full", "md_reduced", "solve_lap",
    "Estimate", "FusedEstimate", "NumericalError", "ReducedEstimate", "ReductionMap",
    "TrackSet", "fusion_loss", "kalman_fuse", "reduce_estimate",
    "GevoSolution", "fusion_optimal_reduction", "gen_eig_spd",
    "MomentPrediction", "OptimizerState", "RatioObjective", "ScenarioError", "StepBounds",
    "association_optimal_maps", "association_optimal_reduction", "fixed_step_reduction",
    "predict_moments", "ratio_argmax", "ratio_eval", "ratio_linearize", "select_step",
    "worst_index",
]
