"""Seeded k-fold grid search and whole-dataset training across targets."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from ..core import ConfigSpace, Dataset, GreenLadderError, anchor_of
from ..metrics import r_squared
from .base import FAMILIES, TARGETS, FeatureVector, ModelSpec, TrainedPredictor, as_matrix, fit, predict


class EmptyGrid(GreenLadderError):
    pass


class TooFewSamples(GreenLadderError):
    pass


# Search spaces per family. Grid enumeration follows the key order below and
# each list's order, via the Cartesian product.
SEARCH_GRIDS: dict[str, dict[str, list]] = {
    "linear": {},
    "ridge": {"alpha": [0.1, 1.0, 10.0, 100.0]},
    "random_forest": {
        "n_trees": [50, 100, 200],
        "d_max": [None, 10, 20],
        "min_samples_split": [2, 5],
        "min_samples_leaf": [1, 2],
    },
    "gbm_depthwise": {
        "n_trees": [50, 100, 200],
        "d_max": [3, 6, 9],
        "learning_rate": [0.01, 0.1, 0.2],
        "subsample": [0.8, 1.0],
    },
    "gbm_leafwise": {
        "n_trees": [50, 100, 200],
        "d_max": [3, 6, 9],
        "learning_rate": [0.01, 0.1, 0.2],
        "num_leaves": [31, 50, 100],
    },
    "mlp": {
        "h_size": [64, 128, 256],
        "h_num": [1, 2],
        "learning_rate": [0.001, 0.01],
    },
}

# Single-spec defaults used where a full search is not warranted (anchor
# sweeps, quick demos).
DEFAULT_SPECS: dict[str, dict] = {
    "linear": {},
    "ridge": {"alpha": 1.0},
    "random_forest": {"n_trees": 100, "d_max": None,
                      "min_samples_split": 2, "min_samples_leaf": 1},
    "gbm_depthwise": {"n_trees": 100, "d_max": 6, "learning_rate": 0.1,
                      "subsample": 1.0},
    "gbm_leafwise": {"n_trees": 100, "d_max": 6, "learning_rate": 0.1,
                     "num_leaves": 31},
    "mlp": {"h_size": 64, "h_num": 1, "learning_rate": 0.01},
}


@dataclass
class CvResult:
    """Outcome of one grid search: the argmax spec plus the full audit."""

    best_spec: ModelSpec
    mean_score: float
    per_fold_scores: list[float]
    evaluated: list[tuple[ModelSpec, float]] = field(default_factory=list)


def enumerate_grid(family: str, grid: dict[str, list], seed: int = 0) -> list[ModelSpec]:
    """Cartesian product of the grid in deterministic (key, value) order."""
    if not grid:
        return [ModelSpec(family=family, hyperparameters={}, seed=seed)]
    names = list(grid.keys())
    specs = []
    for combo in itertools.product(*(grid[n] for n in names)):
        specs.append(ModelSpec(family=family, hyperparameters=dict(zip(names, combo)), seed=seed))
    return specs


def kfold_indices(n: int, k: int, seed: int) -> list[np.ndarray]:
    """Shuffle 0..n-1 with PCG64(seed) and cut into k near-equal folds."""
    order = np.random.Generator(np.random.PCG64(seed)).permutation(n)
    return [np.sort(chunk) for chunk in np.array_split(order, k)]


def _cv_score(spec: ModelSpec, X: np.ndarray, y: np.ndarray, folds: list[np.ndarray]) -> list[float]:
    n = X.shape[0]
    scores = []
    for val_idx in folds:
        mask = np.zeros(n, dtype=bool)
        mask[val_idx] = True
        model = fit(spec, X[~mask], y[~mask])
        scores.append(r_squared(y[mask], predict(model, X[mask])))
    return scores


def grid_search_cv(
    family: str,
    grid: dict[str, list],
    X,
    y,
    k: int,
    seed: int,
    n_jobs: int = 1,
) -> CvResult:
    """Exhaustive search scored by mean held-out R^2 across shared folds.

    Fold assignment is computed once from `seed` and reused for every spec;
    ties in the mean score go to the earlier spec in enumeration order.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family '{family}'")
    if grid is None:
        grid = SEARCH_GRIDS[family]
    if family != "linear" and not grid:
        raise EmptyGrid(f"no hyperparameter grid given for '{family}'")
    if k < 2:
        raise ValueError("k must be >= 2")
    mat = as_matrix(X)
    yarr = np.asarray(y, dtype=float)
    if mat.shape[0] < k:
        raise TooFewSamples(f"need at least k={k} samples, got {mat.shape[0]}")

    specs = enumerate_grid(family, grid, seed)
    folds = kfold_indices(mat.shape[0], k, seed)
    if n_jobs == 1:
        all_scores = [_cv_score(spec, mat, yarr, folds) for spec in specs]
    else:
        all_scores = Parallel(n_jobs=n_jobs)(
            delayed(_cv_score)(spec, mat, yarr, folds) for spec in specs
        )

    means = [float(np.mean(s)) for s in all_scores]
    best_i = 0
    for i, m in enumerate(means):
        if m > means[best_i]:
            best_i = i
    return CvResult(
        best_spec=specs[best_i],
        mean_score=means[best_i],
        per_fold_scores=[float(s) for s in all_scores[best_i]],
        evaluated=list(zip(specs, means)),
    )


ANCHOR_FIELD_FOR_TARGET = {
    "enc_energy": "enc_time",
    "dec_energy": "dec_time",
    "psnr": "psnr",
    "vmaf": "vmaf",
}


def features_for_target(ds: Dataset, space: ConfigSpace, target: str):
    """Build (FeatureVector list, y) for one target over every record.

    The anchor value is the video's anchor-row measurement matching the
    target: encode time for encoding energy, decode time for decoding
    energy, and the anchor's own quality score for quality targets.
    """
    if target not in TARGETS:
        raise ValueError(f"unknown target '{target}'")
    anchor_field = ANCHOR_FIELD_FOR_TARGET[target]
    anchors = {v: anchor_of(ds, v, space) for v in ds.video_ids}
    X, y = [], []
    for rec in ds.records:
        anchor = anchors[rec.video_id]
        X.append(
            FeatureVector(
                anchor_value=getattr(anchor, anchor_field),
                height=rec.rep.height,
                qp=rec.rep.qp,
            )
        )
        y.append(getattr(rec, target))
    return X, np.asarray(y, dtype=float)


def search_families(
    X,
    y,
    *,
    families=FAMILIES,
    grids: dict[str, dict] | None = None,
    k: int = 5,
    seed: int = 0,
    n_jobs: int = 1,
) -> dict[str, CvResult]:
    """Grid-search each family on the same data and folds."""
    grids = grids or {}
    return {
        family: grid_search_cv(
            family, grids.get(family, SEARCH_GRIDS[family]), X, y, k, seed, n_jobs
        )
        for family in families
    }


def train_all(
    ds_train: Dataset,
    space: ConfigSpace,
    seed: int,
    *,
    targets=TARGETS,
    families=FAMILIES,
    grids: dict[str, dict] | None = None,
    k: int = 5,
    n_jobs: int = 1,
) -> dict[str, tuple[CvResult, TrainedPredictor]]:
    """Per target: search every family, refit the overall best on all data.

    The winner is the spec with the highest mean CV score across families;
    ties go to the earlier family in `families` order.
    """
    out: dict[str, tuple[CvResult, TrainedPredictor]] = {}
    for target in targets:
        X, y = features_for_target(ds_train, space, target)
        results = search_families(
            X, y, families=families, grids=grids, k=k, seed=seed, n_jobs=n_jobs
        )
        best_family = None
        for family in families:
            if best_family is None or results[family].mean_score > results[best_family].mean_score:
                best_family = family
        best = results[best_family]
        out[target] = (best, fit(best.best_spec, X, y, target=target))
    return out
