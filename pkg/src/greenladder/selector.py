"""Prediction-grid construction and quality-bounded minimum-energy selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    AnchorMeasurement,
    ConfigSpace,
    Dataset,
    GreenLadderError,
    InvariantViolation,
    Representation,
    anchor_of,
)
from .metrics import PolicyReport, energy_savings_pct
from .models import FeatureVector, TrainedPredictor, predict


class EmptyGrid(GreenLadderError):
    pass


class MissingModel(GreenLadderError):
    def __init__(self, target: str):
        self.target = target
        super().__init__(f"no trained model for target '{target}'")


class MissingGroundTruth(GreenLadderError):
    def __init__(self, video_id: str, rep: Representation):
        self.video_id = video_id
        self.rep = rep
        super().__init__(
            f"no ground-truth record for ({video_id}, {rep.height}p, qp={rep.qp})"
        )


@dataclass(frozen=True)
class Rho:
    """Acceptable quality degradation: the selector may give up this fraction
    of the maximum predicted quality."""

    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise InvariantViolation("rho", "must lie in [0, 1]")


def _as_rho(rho) -> Rho:
    return rho if isinstance(rho, Rho) else Rho(float(rho))


@dataclass(frozen=True)
class GridCell:
    """Predicted energies and quality for one representation."""

    e_enc_hat: float
    e_dec_hat: float
    e_total_hat: float
    q_hat: float


def make_cell(e_enc_hat: float, e_dec_hat: float, q_hat: float,
              weights: tuple[float, float] = (1.0, 1.0)) -> GridCell:
    w_enc, w_dec = weights
    return GridCell(
        e_enc_hat=e_enc_hat,
        e_dec_hat=e_dec_hat,
        e_total_hat=w_enc * e_enc_hat + w_dec * e_dec_hat,
        q_hat=q_hat,
    )


@dataclass
class PredictionGrid:
    """Per-representation predictions for one video. Quality values are
    non-negative scores so the multiplicative rho threshold is meaningful."""

    video_id: str
    cells: dict[Representation, GridCell]


@dataclass
class SelectionResult:
    """The chosen representation plus the feasibility audit trail."""

    chosen: Representation
    q_max_hat: float
    feasible: list[Representation]
    predicted: GridCell

    def to_dict(self) -> dict:
        return {
            "chosen": {"height": self.chosen.height, "qp": self.chosen.qp},
            "q_max_hat": self.q_max_hat,
            "feasible": [{"height": r.height, "qp": r.qp} for r in self.feasible],
            "predicted": {
                "e_enc_hat": self.predicted.e_enc_hat,
                "e_dec_hat": self.predicted.e_dec_hat,
                "e_total_hat": self.predicted.e_total_hat,
                "q_hat": self.predicted.q_hat,
            },
        }


def build_grid(
    models: dict[str, TrainedPredictor],
    anchor: AnchorMeasurement,
    space: ConfigSpace,
    quality_metric: str = "vmaf",
    weights: tuple[float, float] = (1.0, 1.0),
) -> PredictionGrid:
    """Predict every (r, qp) cell from the anchor's measured triple.

    Each predictor receives its matching anchor value; one batched call per
    target covers the |R| x |QP| grid. Quality predictions are clamped into
    the metric's valid range ([0, 100] for vmaf, >= 0 for psnr) so the
    selector's multiplicative threshold keeps its endpoint semantics. The
    optional `weights` pair rescales the encode/decode contributions to the
    total (an extension; (1, 1) reproduces the plain sum).
    """
    if quality_metric not in ("vmaf", "psnr"):
        raise ValueError(f"unknown quality metric '{quality_metric}'")
    for target in ("enc_energy", "dec_energy", quality_metric):
        if target not in models:
            raise MissingModel(target)

    reps = list(space.grid())
    feats = {
        "enc_energy": anchor.enc_time,
        "dec_energy": anchor.dec_time,
        quality_metric: anchor.quality(quality_metric),
    }
    preds = {}
    for target, anchor_value in feats.items():
        X = [FeatureVector(anchor_value=anchor_value, height=r.height, qp=r.qp) for r in reps]
        preds[target] = predict(models[target], X)
    q = np.asarray(preds[quality_metric], dtype=float)
    q = np.clip(q, 0.0, 100.0) if quality_metric == "vmaf" else np.maximum(q, 0.0)

    cells = {
        rep: make_cell(
            float(preds["enc_energy"][i]), float(preds["dec_energy"][i]), float(q[i]), weights
        )
        for i, rep in enumerate(reps)
    }
    return PredictionGrid(video_id=anchor.video_id, cells=cells)


def select(grid: PredictionGrid, rho) -> SelectionResult:
    """Pick the minimum-predicted-energy cell within the quality budget.

    Feasible cells satisfy q_hat >= (1 - rho) * max(q_hat); the energy
    argmin breaks ties by higher q_hat, then lower height, then higher qp.
    """
    rho = _as_rho(rho)
    if not grid.cells:
        raise EmptyGrid("prediction grid has no cells")
    q_max = max(c.q_hat for c in grid.cells.values())
    if q_max < 0:
        raise InvariantViolation("q_hat", "grid quality scores must be non-negative")
    threshold = (1.0 - rho.value) * q_max
    feasible = [rep for rep, c in grid.cells.items() if c.q_hat >= threshold]
    chosen = min(
        feasible,
        key=lambda rep: (
            grid.cells[rep].e_total_hat,
            -grid.cells[rep].q_hat,
            rep.height,
            -rep.qp,
        ),
    )
    return SelectionResult(
        chosen=chosen,
        q_max_hat=q_max,
        feasible=feasible,
        predicted=grid.cells[chosen],
    )


def evaluate_policy(
    ds_test: Dataset,
    models: dict[str, TrainedPredictor],
    space: ConfigSpace,
    rho_list,
    quality_metric: str = "vmaf",
    weights: tuple[float, float] = (1.0, 1.0),
) -> list[PolicyReport]:
    """Score the selection policy against ground truth at each quality budget.

    Every test video gets one prediction grid (built from its measured
    anchor) reused across budgets; the chosen cell's ground-truth energies
    and qualities are averaged per budget and compared to the rho = 0
    baseline. Savings are per-video percentages averaged across videos.
    """
    rhos = [_as_rho(r) for r in rho_list]
    videos = ds_test.video_ids
    grids = {
        v: build_grid(models, anchor_of(ds_test, v, space), space, quality_metric, weights)
        for v in videos
    }

    def ground_truth(rho: Rho):
        enc, dec, vmaf_scores, psnr_scores = [], [], [], []
        for v in videos:
            rep = select(grids[v], rho).chosen
            rec = ds_test.record_at(v, rep)
            if rec is None:
                raise MissingGroundTruth(v, rep)
            enc.append(rec.enc_energy)
            dec.append(rec.dec_energy)
            vmaf_scores.append(rec.vmaf)
            psnr_scores.append(rec.psnr)
        return (np.asarray(enc), np.asarray(dec),
                np.asarray(vmaf_scores), np.asarray(psnr_scores))

    base_enc, base_dec, base_vmaf, base_psnr = ground_truth(Rho(0.0))
    reports = []
    for rho in rhos:
        enc, dec, vmaf_scores, psnr_scores = ground_truth(rho)
        reports.append(
            PolicyReport(
                rho=rho.value,
                avg_vmaf=float(vmaf_scores.mean()),
                avg_psnr=float(psnr_scores.mean()),
                vmaf_drop=float(base_vmaf.mean() - vmaf_scores.mean()),
                psnr_drop=float(base_psnr.mean() - psnr_scores.mean()),
                enc_savings_pct=float(
                    np.mean([energy_savings_pct(b, v) for b, v in zip(base_enc, enc)])
                ),
                dec_savings_pct=float(
                    np.mean([energy_savings_pct(b, v) for b, v in zip(base_dec, dec)])
                ),
            )
        )
    return reports
