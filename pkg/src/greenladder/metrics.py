"""Evaluation metrics for regression predictions and green-policy outcomes."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .core import GreenLadderError


class EmptyInput(GreenLadderError):
    pass


class ConstantTruth(GreenLadderError):
    pass


class NonPositiveBaseline(GreenLadderError):
    pass


def _pair(y, yhat) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(y, dtype=float)
    b = np.asarray(yhat, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("y and yhat must be 1-d arrays of equal length")
    return a, b


def r_squared(y, yhat) -> float:
    """Coefficient of determination: 1 - SS_res / SS_tot."""
    a, b = _pair(y, yhat)
    if a.size < 2:
        raise EmptyInput("need at least 2 points")
    ss_tot = float(np.sum((a - a.mean()) ** 2))
    if ss_tot == 0:
        raise ConstantTruth("ground truth has zero variance")
    ss_res = float(np.sum((a - b) ** 2))
    return 1.0 - ss_res / ss_tot


def mae(y, yhat) -> float:
    a, b = _pair(y, yhat)
    if a.size == 0:
        raise EmptyInput("need at least 1 point")
    return float(np.mean(np.abs(a - b)))


def rmse(y, yhat) -> float:
    a, b = _pair(y, yhat)
    if a.size == 0:
        raise EmptyInput("need at least 1 point")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def sdae(y, yhat) -> float:
    """Population standard deviation of absolute errors.

    Population (divide-by-n) keeps rmse^2 = mae^2 + sdae^2 exact, which the
    test suite uses to cross-check all three implementations.
    """
    a, b = _pair(y, yhat)
    if a.size == 0:
        raise EmptyInput("need at least 1 point")
    e = np.abs(a - b)
    return float(np.sqrt(np.mean((e - e.mean()) ** 2)))


def energy_savings_pct(baseline: float, value: float) -> float:
    """Percent reduction of `value` relative to `baseline`."""
    if baseline <= 0:
        raise NonPositiveBaseline(f"baseline must be > 0, got {baseline}")
    return 100.0 * (baseline - value) / baseline


def quality_drop(baseline_q: float, q: float) -> float:
    return baseline_q - q


@dataclass(frozen=True)
class RegressionReport:
    """Accuracy summary of one predictor on one target."""

    r2: float
    rmse: float
    mae: float
    sdae: float
    n: int

    @classmethod
    def from_predictions(cls, y, yhat) -> "RegressionReport":
        a, _ = _pair(y, yhat)
        return cls(
            r2=r_squared(y, yhat),
            rmse=rmse(y, yhat),
            mae=mae(y, yhat),
            sdae=sdae(y, yhat),
            n=int(a.size),
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PolicyReport:
    """Green-policy outcome at one quality-degradation budget.

    Drops and savings are measured against the rho = 0 selections; savings
    are per-video percentage reductions averaged across videos.
    """

    rho: float
    avg_vmaf: float
    avg_psnr: float
    vmaf_drop: float
    psnr_drop: float
    enc_savings_pct: float
    dec_savings_pct: float

    def to_dict(self) -> dict:
        return asdict(self)


POLICY_COLUMNS = (
    "rho",
    "avg_vmaf",
    "avg_psnr",
    "vmaf_drop",
    "psnr_drop",
    "enc_savings_pct",
    "dec_savings_pct",
)

REGRESSION_COLUMNS = ("r2", "rmse", "mae", "sdae")


def _render_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(header)]
    def line(cells):
        return "  ".join(c.rjust(w) for c, w in zip(cells, widths))
    out = [line(header), line(["-" * w for w in widths])]
    out.extend(line(r) for r in rows)
    return "\n".join(out)


def format_regression_table(results: dict[str, dict[str, RegressionReport]],
                            targets: tuple[str, ...]) -> str:
    """Aligned text table: one row per model family, metric block per target."""
    header = ["model"]
    for t in targets:
        header.extend(f"{t}:{m}" for m in REGRESSION_COLUMNS)
    rows = []
    for family, per_target in results.items():
        row = [family]
        for t in targets:
            rep = per_target.get(t)
            if rep is None:
                row.extend(["-"] * len(REGRESSION_COLUMNS))
            else:
                row.extend(f"{getattr(rep, m):.4g}" for m in REGRESSION_COLUMNS)
        rows.append(row)
    return _render_table(header, rows)


def format_policy_table(reports: list[PolicyReport]) -> str:
    """Aligned text table with one row per quality budget."""
    rows = [[f"{getattr(r, c):.4g}" for c in POLICY_COLUMNS] for r in reports]
    return _render_table(list(POLICY_COLUMNS), rows)


def policy_csv(reports: list[PolicyReport]) -> str:
    lines = [",".join(POLICY_COLUMNS)]
    for r in reports:
        lines.append(",".join(repr(float(getattr(r, c))) for c in POLICY_COLUMNS))
    return "\n".join(lines) + "\n"
