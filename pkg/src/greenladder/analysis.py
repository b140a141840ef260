"""Cross-configuration encoding-time correlations and anchor-candidate sweeps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigSpace, Dataset, GreenLadderError, Representation, split_by_video
from .metrics import r_squared
from .models import DEFAULT_SPECS, FeatureVector, ModelSpec, fit, predict


class MissingCell(GreenLadderError):
    def __init__(self, video_id: str, rep: Representation):
        self.video_id = video_id
        self.rep = rep
        super().__init__(
            f"video '{video_id}' has no record for ({rep.height}p, qp={rep.qp})"
        )


class ZeroVariance(GreenLadderError):
    def __init__(self, rep: Representation):
        self.rep = rep
        super().__init__(
            f"encoding times for ({rep.height}p, qp={rep.qp}) are constant across videos"
        )


@dataclass(frozen=True)
class CorrelationMatrix:
    """Pearson coefficients between configurations' per-video encoding times."""

    configs: tuple[Representation, ...]
    values: np.ndarray

    def __post_init__(self):
        k = len(self.configs)
        if self.values.shape != (k, k):
            raise ValueError("matrix dimension must match the config count")


@dataclass(frozen=True)
class AnchorSweepRow:
    """One anchor candidate: its average cost and the accuracy it enables."""

    anchor: Representation
    mean_anchor_time: float
    r2: float


def _time_matrix(ds: Dataset, reps: list[Representation]) -> np.ndarray:
    """Encoding times, one row per video (sorted ids), one column per config."""
    videos = ds.video_ids
    times = np.empty((len(videos), len(reps)))
    for j, rep in enumerate(reps):
        for i, v in enumerate(videos):
            rec = ds.record_at(v, rep)
            if rec is None:
                raise MissingCell(v, rep)
            times[i, j] = rec.enc_time
    return times


def pairwise_correlation(ds: Dataset, space: ConfigSpace) -> CorrelationMatrix:
    """Pearson correlation of encoding times across videos, per config pair.

    The upper triangle is computed once and mirrored, so the matrix is
    exactly symmetric with an exact unit diagonal.
    """
    reps = list(space.grid())
    times = _time_matrix(ds, reps)
    centered = times - times.mean(axis=0)
    norms = np.sqrt(np.sum(centered**2, axis=0))
    for j, rep in enumerate(reps):
        if norms[j] == 0:
            raise ZeroVariance(rep)
    k = len(reps)
    values = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            r = float(np.dot(centered[:, i], centered[:, j]) / (norms[i] * norms[j]))
            values[i, j] = values[j, i] = r
    return CorrelationMatrix(configs=tuple(reps), values=values)


def anchor_ranking(cm: CorrelationMatrix, ds: Dataset) -> list[tuple[Representation, float, float]]:
    """(config, mean off-diagonal correlation, mean encoding time), cheapest first."""
    k = len(cm.configs)
    times = _time_matrix(ds, list(cm.configs))
    rows = []
    for j, rep in enumerate(cm.configs):
        if k > 1:
            mean_corr = float((cm.values[j].sum() - cm.values[j, j]) / (k - 1))
        else:
            mean_corr = 1.0
        rows.append((rep, mean_corr, float(times[:, j].mean())))
    rows.sort(key=lambda r: (r[2], r[0].height, r[0].qp))
    return rows


def default_anchor_candidates(space: ConfigSpace) -> list[Representation]:
    """Low/medium/high resolutions crossed with the extreme QPs, deduplicated."""
    rs = space.resolutions
    picks = {rs[0], rs[len(rs) // 2], rs[-1]}
    qps = {space.qps[0], space.qps[-1]}
    return [
        Representation(r, qp)
        for r in sorted(picks, key=lambda x: x.height)
        for qp in sorted(qps)
    ]


def anchor_sweep(
    ds: Dataset,
    candidates: list[Representation],
    family: str = "gbm_leafwise",
    seed: int = 0,
    train_fraction: float = 0.7,
) -> list[AnchorSweepRow]:
    """Refit the encoding-energy model per candidate anchor; report test R^2.

    Each candidate's encoding time replaces the anchor value in the feature
    vectors; the model is the family's documented default spec trained on a
    seeded video-level split. Rows come back in candidate order.
    """
    train, test = split_by_video(ds, train_fraction, seed)
    spec = ModelSpec(family=family, hyperparameters=DEFAULT_SPECS[family], seed=seed)
    rows = []
    for cand in candidates:
        def xy(part: Dataset):
            anchor_time = {}
            for v in part.video_ids:
                rec = part.record_at(v, cand)
                if rec is None:
                    raise MissingCell(v, cand)
                anchor_time[v] = rec.enc_time
            X = [
                FeatureVector(anchor_value=anchor_time[r.video_id],
                              height=r.rep.height, qp=r.rep.qp)
                for r in part.records
            ]
            y = np.asarray([r.enc_energy for r in part.records])
            return X, y

        X_train, y_train = xy(train)
        X_test, y_test = xy(test)
        model = fit(spec, X_train, y_train, target="enc_energy")
        r2 = r_squared(y_test, predict(model, X_test))
        mean_time = float(np.mean(
            [_req(ds, v, cand).enc_time for v in ds.video_ids]
        ))
        rows.append(AnchorSweepRow(anchor=cand, mean_anchor_time=mean_time, r2=r2))
    return rows


def _req(ds: Dataset, video_id: str, rep: Representation):
    rec = ds.record_at(video_id, rep)
    if rec is None:
        raise MissingCell(video_id, rep)
    return rec
