"""Random forest: bootstrap-sampled variance-reduction trees, mean-aggregated."""

from __future__ import annotations

import numpy as np

from .base import ModelSpec
from .tree import FeatureBins, Tree, grow_levelwise

DEFAULTS = {"n_trees": 100, "d_max": None, "min_samples_split": 2, "min_samples_leaf": 1}


class ForestModel:
    def __init__(self, trees: list[Tree]):
        self.trees = trees

    @classmethod
    def train(cls, X: np.ndarray, y: np.ndarray, spec: ModelSpec) -> "ForestModel":
        n_trees = int(spec.get("n_trees", DEFAULTS["n_trees"]))
        d_max = spec.get("d_max", DEFAULTS["d_max"])
        mss = int(spec.get("min_samples_split", DEFAULTS["min_samples_split"]))
        msl = int(spec.get("min_samples_leaf", DEFAULTS["min_samples_leaf"]))
        bins = FeatureBins.fit(X)
        codes = bins.codes(X)
        n = X.shape[0]
        seeds = np.random.SeedSequence(spec.seed).spawn(n_trees)
        trees = []
        for seq in seeds:
            rng = np.random.Generator(np.random.PCG64(seq))
            boot = rng.integers(0, n, n)
            trees.append(
                grow_levelwise(
                    codes[boot],
                    bins,
                    y[boot],
                    max_depth=d_max,
                    min_samples_split=mss,
                    min_samples_leaf=msl,
                )
            )
        return cls(trees=trees)

    def predict(self, X: np.ndarray) -> np.ndarray:
        preds = np.stack([t.predict(X) for t in self.trees])
        return preds.mean(axis=0)

    def tree_predictions(self, X: np.ndarray) -> np.ndarray:
        """Per-tree predictions, one row per member tree."""
        return np.stack([t.predict(X) for t in self.trees])

    def to_state(self) -> dict:
        return {"trees": [t.to_state() for t in self.trees]}

    @classmethod
    def from_state(cls, state: dict) -> "ForestModel":
        return cls(trees=[Tree.from_state(s) for s in state["trees"]])
