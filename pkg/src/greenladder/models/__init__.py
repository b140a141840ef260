"""Trainable regressors mapping (anchor value, resolution, qp) to a target."""

from .base import (
    ALLOWED_HYPERPARAMETERS,
    FAMILIES,
    TARGETS,
    DegenerateDesignMatrix,
    FeatureVector,
    ModelSpec,
    NonFiniteInput,
    Scaler,
    TrainedPredictor,
    as_matrix,
    fit,
    original_coefficients,
    predict,
)
from .mlp import mlp_gradient_check
from .search import (
    DEFAULT_SPECS,
    SEARCH_GRIDS,
    CvResult,
    EmptyGrid,
    TooFewSamples,
    enumerate_grid,
    features_for_target,
    grid_search_cv,
    kfold_indices,
    search_families,
    train_all,
)
from .store import ModelFileError, load_model, model_from_document, model_to_document, save_model

__all__ = [
    "ALLOWED_HYPERPARAMETERS",
    "FAMILIES",
    "TARGETS",
    "DegenerateDesignMatrix",
    "FeatureVector",
    "ModelSpec",
    "NonFiniteInput",
    "Scaler",
    "TrainedPredictor",
    "as_matrix",
    "fit",
    "original_coefficients",
    "predict",
    "mlp_gradient_check",
    "DEFAULT_SPECS",
    "SEARCH_GRIDS",
    "CvResult",
    "EmptyGrid",
    "TooFewSamples",
    "enumerate_grid",
    "features_for_target",
    "grid_search_cv",
    "kfold_indices",
    "search_families",
    "train_all",
    "ModelFileError",
    "load_model",
    "model_from_document",
    "model_to_document",
    "save_model",
]
