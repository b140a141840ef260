"""Shared predictor types: feature vectors, model specs, scaling, dispatch."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from ..core import GreenLadderError

FAMILIES = ("linear", "ridge", "random_forest", "gbm_depthwise", "gbm_leafwise", "mlp")

TARGETS = ("enc_energy", "dec_energy", "psnr", "vmaf")

ALLOWED_HYPERPARAMETERS: dict[str, frozenset[str]] = {
    "linear": frozenset(),
    "ridge": frozenset({"alpha"}),
    "random_forest": frozenset(
        {"n_trees", "d_max", "min_samples_split", "min_samples_leaf"}
    ),
    "gbm_depthwise": frozenset({"n_trees", "d_max", "learning_rate", "subsample"}),
    "gbm_leafwise": frozenset({"n_trees", "d_max", "learning_rate", "num_leaves"}),
    "mlp": frozenset({"h_size", "h_num", "learning_rate"}),
}


class NonFiniteInput(GreenLadderError):
    pass


class DegenerateDesignMatrix(GreenLadderError):
    pass


@dataclass(frozen=True)
class FeatureVector:
    """Model input: the anchor's measured value plus the target (r, qp)."""

    anchor_value: float
    height: int
    qp: int

    def __post_init__(self):
        if self.anchor_value < 0:
            raise ValueError("anchor_value must be >= 0")


def as_matrix(X) -> np.ndarray:
    """Accept a list of FeatureVector or an (n, 3) array; return float matrix."""
    if isinstance(X, np.ndarray):
        mat = np.asarray(X, dtype=float)
        if mat.ndim != 2:
            raise ValueError("feature matrix must be 2-d")
        return mat
    return np.array(
        [(fv.anchor_value, fv.height, fv.qp) for fv in X], dtype=float
    ).reshape(len(X), 3)


@dataclass(frozen=True)
class ModelSpec:
    """A model family plus one concrete hyperparameter assignment."""

    family: str
    hyperparameters: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family '{self.family}'")
        allowed = ALLOWED_HYPERPARAMETERS[self.family]
        extra = set(self.hyperparameters) - allowed
        if extra:
            raise ValueError(
                f"hyperparameters {sorted(extra)} not in the '{self.family}' grid"
            )

    def get(self, name: str, default):
        return self.hyperparameters.get(name, default)


@dataclass
class Scaler:
    """Per-feature standardization; zero-variance features keep sd = 1."""

    mean: np.ndarray
    sd: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Scaler":
        mean = X.mean(axis=0)
        sd = X.std(axis=0)
        sd = np.where(sd == 0, 1.0, sd)
        return cls(mean=mean, sd=sd)

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.sd

    def to_state(self) -> dict:
        return {"mean": self.mean.tolist(), "sd": self.sd.tolist()}

    @classmethod
    def from_state(cls, state: dict) -> "Scaler":
        return cls(mean=np.asarray(state["mean"], dtype=float),
                   sd=np.asarray(state["sd"], dtype=float))


SCALED_FAMILIES = frozenset({"linear", "ridge", "mlp"})


@dataclass
class TrainedPredictor:
    """A fitted regressor bound to its spec, target name and input scaler."""

    spec: ModelSpec
    target: str
    scaler: Scaler | None
    model: Any

    @property
    def learned_state(self) -> dict:
        return self.model.to_state()


def _check_finite(arr: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput(f"{what} contains non-finite values")


def fit(spec: ModelSpec, X, y, target: str = "") -> TrainedPredictor:
    """Train one predictor; linear/ridge/mlp standardize features internally."""
    from . import boosting, forest, linear, mlp  # deferred to avoid cycles

    mat = as_matrix(X)
    yarr = np.asarray(y, dtype=float)
    if mat.shape[0] != yarr.shape[0]:
        raise ValueError("X and y lengths differ")
    if mat.shape[0] < 2:
        raise ValueError("need at least 2 training points")
    _check_finite(mat, "X")
    _check_finite(yarr, "y")

    scaler = Scaler.fit(mat) if spec.family in SCALED_FAMILIES else None
    Xs = scaler.transform(mat) if scaler is not None else mat

    if spec.family == "linear":
        model = linear.LinearModel.train(Xs, yarr)
    elif spec.family == "ridge":
        model = linear.RidgeModel.train(Xs, yarr, alpha=float(spec.get("alpha", 1.0)))
    elif spec.family == "random_forest":
        model = forest.ForestModel.train(Xs, yarr, spec)
    elif spec.family in ("gbm_depthwise", "gbm_leafwise"):
        model = boosting.BoostingModel.train(Xs, yarr, spec)
    elif spec.family == "mlp":
        model = mlp.MlpModel.train(Xs, yarr, spec)
    else:  # pragma: no cover - guarded by ModelSpec validation
        raise ValueError(spec.family)
    return TrainedPredictor(spec=spec, target=target, scaler=scaler, model=model)


def predict(p: TrainedPredictor, X) -> np.ndarray:
    """Apply the stored scaler, then the learned function. Pure."""
    mat = as_matrix(X)
    _check_finite(mat, "X")
    if p.scaler is not None:
        mat = p.scaler.transform(mat)
    return p.model.predict(mat)


def original_coefficients(p: TrainedPredictor) -> tuple[np.ndarray, float]:
    """Linear-family coefficients mapped back to unstandardized feature space."""
    coef = np.asarray(p.model.coef_, dtype=float)
    intercept = float(p.model.intercept_)
    if p.scaler is None:
        return coef, intercept
    orig = coef / p.scaler.sd
    return orig, intercept - float(np.dot(orig, p.scaler.mean))
