"""Versioned JSON persistence for trained predictors."""

from __future__ import annotations

import json
from pathlib import Path

from ..core import GreenLadderError
from .base import ModelSpec, Scaler, TrainedPredictor

MODEL_SCHEMA_VERSION = 1


class ModelFileError(GreenLadderError):
    def __init__(self, path, reason: str):
        self.path = str(path)
        super().__init__(f"bad model file '{path}': {reason}")


def _model_class(family: str):
    from .boosting import BoostingModel
    from .forest import ForestModel
    from .linear import LinearModel, RidgeModel
    from .mlp import MlpModel

    return {
        "linear": LinearModel,
        "ridge": RidgeModel,
        "random_forest": ForestModel,
        "gbm_depthwise": BoostingModel,
        "gbm_leafwise": BoostingModel,
        "mlp": MlpModel,
    }[family]


def model_to_document(p: TrainedPredictor) -> dict:
    return {
        "schema_version": MODEL_SCHEMA_VERSION,
        "family": p.spec.family,
        "hyperparameters": dict(p.spec.hyperparameters),
        "seed": p.spec.seed,
        "target": p.target,
        "scaler": p.scaler.to_state() if p.scaler is not None else None,
        "state": p.learned_state,
    }


def model_from_document(doc: dict, source: str = "<document>") -> TrainedPredictor:
    try:
        if doc["schema_version"] != MODEL_SCHEMA_VERSION:
            raise ModelFileError(source, f"unsupported schema_version {doc['schema_version']}")
        spec = ModelSpec(
            family=doc["family"],
            hyperparameters=doc["hyperparameters"],
            seed=doc["seed"],
        )
        scaler = Scaler.from_state(doc["scaler"]) if doc["scaler"] is not None else None
        model = _model_class(spec.family).from_state(doc["state"])
    except ModelFileError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFileError(source, str(exc)) from exc
    return TrainedPredictor(spec=spec, target=doc["target"], scaler=scaler, model=model)


def save_model(p: TrainedPredictor, path) -> None:
    text = json.dumps(model_to_document(p), sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_model(path) -> TrainedPredictor:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ModelFileError(path, f"cannot read: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelFileError(path, f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelFileError(path, "top-level JSON value must be an object")
    return model_from_document(doc, source=str(path))
