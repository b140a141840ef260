"""Squared-error gradient boosting in two growth flavors.

`gbm_depthwise` grows each round's tree level by level up to d_max with
optional row subsampling; `gbm_leafwise` grows best-first, capped by
num_leaves. Both start from the target mean and add shrunken tree outputs.
"""

from __future__ import annotations

import numpy as np

from .base import ModelSpec
from .tree import FeatureBins, Tree, grow_leafwise, grow_levelwise

DEPTHWISE_DEFAULTS = {"n_trees": 100, "d_max": 6, "learning_rate": 0.1, "subsample": 1.0}
LEAFWISE_DEFAULTS = {"n_trees": 100, "d_max": 6, "learning_rate": 0.1, "num_leaves": 31}


class BoostingModel:
    def __init__(self, variant: str, init: float, learning_rate: float, trees: list[Tree],
                 train_mse: np.ndarray | None = None):
        self.variant = variant
        self.init = init
        self.learning_rate = learning_rate
        self.trees = trees
        # Training-set MSE after each boosting round, recorded during fit.
        self.train_mse_ = train_mse

    @classmethod
    def train(cls, X: np.ndarray, y: np.ndarray, spec: ModelSpec) -> "BoostingModel":
        leafwise = spec.family == "gbm_leafwise"
        defaults = LEAFWISE_DEFAULTS if leafwise else DEPTHWISE_DEFAULTS
        n_trees = int(spec.get("n_trees", defaults["n_trees"]))
        d_max = spec.get("d_max", defaults["d_max"])
        eta = float(spec.get("learning_rate", defaults["learning_rate"]))
        subsample = float(spec.get("subsample", 1.0)) if not leafwise else 1.0
        num_leaves = int(spec.get("num_leaves", LEAFWISE_DEFAULTS["num_leaves"]))

        bins = FeatureBins.fit(X)
        codes = bins.codes(X)
        n = X.shape[0]
        rng = np.random.Generator(np.random.PCG64(spec.seed))
        m_sub = max(1, round(subsample * n))

        current = np.full(n, y.mean())
        trees: list[Tree] = []
        mse_path = np.empty(n_trees)
        for m in range(n_trees):
            residual = y - current
            if subsample < 1.0:
                rows = rng.permutation(n)[:m_sub]
            else:
                rows = slice(None)
            if leafwise:
                tree = grow_leafwise(
                    codes[rows], bins, residual[rows],
                    max_leaves=num_leaves, max_depth=d_max,
                )
            else:
                tree = grow_levelwise(
                    codes[rows], bins, residual[rows], max_depth=d_max,
                )
            current = current + eta * tree.predict_from_codes(codes)
            mse_path[m] = np.mean((y - current) ** 2)
            trees.append(tree)
        return cls(
            variant="leafwise" if leafwise else "depthwise",
            init=float(y.mean()),
            learning_rate=eta,
            trees=trees,
            train_mse=mse_path,
        )

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = np.full(X.shape[0], self.init)
        for tree in self.trees:
            out += self.learning_rate * tree.predict(X)
        return out

    def to_state(self) -> dict:
        return {
            "variant": self.variant,
            "init": self.init,
            "learning_rate": self.learning_rate,
            "trees": [t.to_state() for t in self.trees],
        }

    @classmethod
    def from_state(cls, state: dict) -> "BoostingModel":
        return cls(
            variant=state["variant"],
            init=float(state["init"]),
            learning_rate=float(state["learning_rate"]),
            trees=[Tree.from_state(s) for s in state["trees"]],
        )
