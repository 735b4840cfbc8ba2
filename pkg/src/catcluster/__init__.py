"""Clustering categories of categorical predictors in GLMs."""
from .clustering import (
    CategoryOrdering,
    Clustering,
    apply_clustering,
    build_design,
    enumerate_feasible_clusterings,
    order_by_coefficients,
    order_natural,
    relative_complexity,
)
from .data import Dataset, PredictorSpec, Schema, SplitPlan, binarize_majority_vs_rest, load_csv, load_schema, split
from .glm import DesignMatrix, Family, FitConfig, FittedGlm, ccr, fit_irls, predict_mean, rmse
from .grasp import GraspConfig, GraspOutput, IterationResult, eligible_predictors, grasp_run
from .proximity import ProximityMatrix, compute_proximity, export_dot

__version__ = "0.1.0"
