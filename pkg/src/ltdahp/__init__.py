"""Two-stage sigmoid-network regression with deterministically assigned hidden parameters.

The hidden layer is fixed before any data is seen: inner weights are
equal-area points on the sphere and thresholds form an equally spaced grid.
Only the output layer is fitted, by ridge least squares.  The random
assignment baseline (an extreme learning machine) shares that second stage.
"""

from .activation import ActivationSpec, ScaledActivation, choose_K_logistic, tail_threshold_L
from .bench import gen_toy, load_csv
from .estimator import (
    Dataset,
    LtDaHPRegressor,
    LtRaHPRegressor,
    fit_ltdahp,
    fit_ltrahp,
    load_model,
    predict,
    save_model,
)
from .features import HypothesisSpec, LtDaHPFeatures, Normalizer, build_space, design_matrix, thresholds
from .modelsel import CvPlan, CvReport, kfold_cv
from .solver import ridge_solve, truncate
from .sphere import RieszParams, SphereConfig, eq_points, min_pairwise_distance, refine_energy, riesz_energy

__version__ = "0.1.0"

__all__ = [
    "ActivationSpec",
    "ScaledActivation",
    "choose_K_logistic",
    "tail_threshold_L",
    "gen_toy",
    "load_csv",
    "CvPlan",
    "CvReport",
    "kfold_cv",
    "Dataset",
    "LtDaHPRegressor",
    "LtRaHPRegressor",
    "fit_ltdahp",
    "fit_ltrahp",
    "load_model",
    "predict",
    "save_model",
    "HypothesisSpec",
    "LtDaHPFeatures",
    "Normalizer",
    "build_space",
    "design_matrix",
    "thresholds",
    "ridge_solve",
    "truncate",
    "RieszParams",
    "SphereConfig",
    "eq_points",
    "min_pairwise_distance",
    "refine_energy",
    "riesz_energy",
]
