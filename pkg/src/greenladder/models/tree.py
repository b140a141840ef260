"""Binned regression trees shared by the forest and boosting models.

Features are binned once per fit: exact midpoint thresholds when a feature
has at most `max_bins` distinct values, quantile thresholds otherwise. A
sample goes left iff x <= threshold, which in bin space is code <= bin.
Growth and traversal run in compiled kernels; `grow_levelwise` caps depth
(equivalent to level-by-level growth, since greedy splits depend only on
each node's own samples) and `grow_leafwise` expands best-gain-first under
a leaf budget.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels

_UNBOUNDED = 1 << 30


@dataclass
class FeatureBins:
    """Per-feature ascending candidate thresholds."""

    thresholds: list[np.ndarray]

    @classmethod
    def fit(cls, X: np.ndarray, max_bins: int = 256) -> "FeatureBins":
        thresholds = []
        for f in range(X.shape[1]):
            uniq = np.unique(X[:, f])
            if uniq.size <= 1:
                thresholds.append(np.empty(0))
            elif uniq.size <= max_bins:
                thresholds.append((uniq[:-1] + uniq[1:]) / 2.0)
            else:
                qs = np.quantile(X[:, f], np.linspace(0, 1, max_bins + 1)[1:-1])
                thresholds.append(np.unique(qs))
        return cls(thresholds=thresholds)

    def codes(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(X.shape, dtype=np.int32)
        for f, thr in enumerate(self.thresholds):
            out[:, f] = np.searchsorted(thr, X[:, f], side="left")
        return out

    @property
    def bins_per_feature(self) -> np.ndarray:
        return np.asarray([t.size + 1 for t in self.thresholds], dtype=np.int64)


@dataclass
class Tree:
    """Flat-array binary regression tree; feature == -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    thr_bin: np.ndarray | None = None  # bin-space thresholds, fit-time only
    train_pred: np.ndarray | None = None  # leaf values of the fitting samples

    def predict(self, X: np.ndarray) -> np.ndarray:
        return _kernels.predict_real(
            self.feature, self.threshold, self.left, self.right, self.value,
            np.ascontiguousarray(X, dtype=np.float64),
        )

    def predict_from_codes(self, codes: np.ndarray) -> np.ndarray:
        return _kernels.predict_binned(
            self.feature, self.thr_bin, self.left, self.right, self.value, codes
        )

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))

    def to_state(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_state(cls, state: dict) -> "Tree":
        return cls(
            feature=np.asarray(state["feature"], dtype=np.int32),
            threshold=np.asarray(state["threshold"], dtype=float),
            left=np.asarray(state["left"], dtype=np.int32),
            right=np.asarray(state["right"], dtype=np.int32),
            value=np.asarray(state["value"], dtype=float),
        )


def _finalize(bins: FeatureBins, raw) -> Tree:
    feature, thr_bin, left, right, value, train_pred = raw
    threshold = np.zeros(feature.size, dtype=float)
    for f, thr in enumerate(bins.thresholds):
        mask = feature == f
        if mask.any():
            threshold[mask] = thr[thr_bin[mask]]
    return Tree(
        feature=feature,
        threshold=threshold,
        left=left,
        right=right,
        value=value,
        thr_bin=thr_bin,
        train_pred=train_pred,
    )


def grow_levelwise(
    codes: np.ndarray,
    bins: FeatureBins,
    y: np.ndarray,
    *,
    max_depth: int | None,
    min_samples_split: int = 2,
    min_samples_leaf: int = 1,
) -> Tree:
    raw = _kernels.build_tree(
        np.ascontiguousarray(codes),
        np.ascontiguousarray(y, dtype=np.float64),
        bins.bins_per_feature,
        _UNBOUNDED if max_depth is None else int(max_depth),
        int(min_samples_split),
        int(min_samples_leaf),
        codes.shape[0],
        False,
    )
    return _finalize(bins, raw)


def grow_leafwise(
    codes: np.ndarray,
    bins: FeatureBins,
    y: np.ndarray,
    *,
    max_leaves: int,
    max_depth: int | None,
    min_samples_split: int = 2,
    min_samples_leaf: int = 1,
) -> Tree:
    raw = _kernels.build_tree(
        np.ascontiguousarray(codes),
        np.ascontiguousarray(y, dtype=np.float64),
        bins.bins_per_feature,
        _UNBOUNDED if max_depth is None else int(max_depth),
        int(min_samples_split),
        int(min_samples_leaf),
        int(max_leaves),
        True,
    )
    return _finalize(bins, raw)
