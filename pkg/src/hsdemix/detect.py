"""Detection scoring, matched-filter baselines, ROC curves and AUC."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .dictionary import Dictionary
from .errors import DegenerateMaskError, RankError, ShapeError
from .hsio import GroundTruthMask
from .solver import ApgConfig, DemixResult, demix

logger = logging.getLogger(__name__)

FIXED_GRID_SIZE = 1000


@dataclass
class ScoreVector:
    values: np.ndarray
    method: str
    flipped: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(self.values)):
            raise ShapeError("scores must be finite")


@dataclass
class RocCurve:
    thresholds: np.ndarray  # per interior point; +/-inf at the endpoints
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float
    best_threshold: float
    best_tpr: float
    best_fpr: float
    flipped: bool

    def to_dict(self) -> dict:
        return {
            "auc": self.auc,
            "flipped": self.flipped,
            "best_point": {
                "threshold": self.best_threshold,
                "tpr": self.best_tpr,
                "fpr": self.best_fpr,
            },
            "points": [
                {"threshold": t, "fpr": x, "tpr": y}
                for t, x, y in zip(self.thresholds, self.fpr, self.tpr)
            ],
        }


def column_norm_scores(A_hat: np.ndarray) -> ScoreVector:
    """Euclidean norm of each coefficient column."""
    A_hat = np.asarray(A_hat, dtype=float)
    return ScoreVector(np.linalg.norm(A_hat, axis=0), method="XpRA")


def matched_filter(Y: np.ndarray, R: Dictionary) -> ScoreVector:
    """Max absolute inner product of each column-normalized voxel with the
    atoms."""
    Y = np.asarray(Y, dtype=float)
    norms = np.linalg.norm(Y, axis=0)
    zero = norms == 0
    if np.any(zero):
        logger.info("matched_filter: %d zero columns scored 0", int(zero.sum()))
    safe = np.where(zero, 1.0, norms)
    scores = np.max(np.abs(R.atoms.T @ (Y / safe)), axis=0)
    scores[zero] = 0.0
    return ScoreVector(scores, method="MF")


def matched_filter_dagger(Y: np.ndarray, R: Dictionary) -> ScoreVector:
    """Matched filtering in pseudo-inverse-transformed coordinates: max
    absolute entry per column-normalized column of R^+ Y."""
    if R.pinv is None:
        raise RankError("matched_filter_dagger requires full column rank")
    Yt = R.pinv @ np.asarray(Y, dtype=float)
    norms = np.linalg.norm(Yt, axis=0)
    zero = norms == 0
    if np.any(zero):
        logger.info("matched_filter_dagger: %d zero columns scored 0", int(zero.sum()))
    safe = np.where(zero, 1.0, norms)
    scores = np.max(np.abs(Yt / safe), axis=0)
    scores[zero] = 0.0
    return ScoreVector(scores, method="MF†")


def _curve_points(scores, labels, thresholds):
    """(fpr, tpr) per threshold with the strict 'score > t' rule, plus the
    (0,0)/(1,1) endpoints, ordered by non-decreasing FPR."""
    pos_sorted = np.sort(scores[labels == 1])
    neg_sorted = np.sort(scores[labels == 0])
    p, n = pos_sorted.size, neg_sorted.size
    thresholds = np.sort(np.asarray(thresholds, dtype=float))[::-1]
    tp = p - np.searchsorted(pos_sorted, thresholds, side="right")
    fp = n - np.searchsorted(neg_sorted, thresholds, side="right")
    th = np.concatenate([[np.inf], thresholds, [-np.inf]])
    tpr = np.concatenate([[0.0], tp / p, [1.0]])
    fpr = np.concatenate([[0.0], fp / n, [1.0]])
    return th, fpr, tpr


def roc(
    scores: ScoreVector,
    mask: GroundTruthMask,
    sweep: str = "score-values",
    allow_flip: bool = False,
) -> RocCurve:
    """ROC curve over detection thresholds.

    sweep = "score-values" uses the sorted distinct score values (exact
    curve); sweep = "fixed-grid" uses 1000 thresholds in (0, 1]. With
    allow_flip, a curve with AUC < 0.5 is recomputed on negated scores."""
    labels = mask.labels
    if labels.size != scores.values.size:
        raise ShapeError(
            f"mask length {labels.size} != score length {scores.values.size}"
        )
    p = int(labels.sum())
    if p == 0 or p == labels.size:
        raise DegenerateMaskError("mask must contain both classes")

    def build(vals, negated):
        if sweep == "score-values":
            thresholds = np.unique(vals)
        elif sweep == "fixed-grid":
            grid = np.arange(1, FIXED_GRID_SIZE + 1) / FIXED_GRID_SIZE
            # The grid lives in (0, 1]; sweeping negated scores uses its
            # mirror image so the same cut points are visited.
            thresholds = -grid if negated else grid
        else:
            raise ValueError(f"unknown sweep '{sweep}'")
        th, fpr, tpr = _curve_points(vals, labels, thresholds)
        return th, fpr, tpr, float(np.trapezoid(tpr, fpr))

    vals = scores.values
    th, fpr, tpr, auc = build(vals, negated=False)
    flipped = False
    if allow_flip and auc < 0.5:
        th, fpr, tpr, auc = build(-vals, negated=True)
        flipped = True

    j = tpr - fpr
    best = int(np.argmax(j))
    return RocCurve(
        thresholds=th,
        fpr=fpr,
        tpr=tpr,
        auc=auc,
        best_threshold=float(th[best]),
        best_tpr=float(tpr[best]),
        best_fpr=float(fpr[best]),
        flipped=flipped,
    )


def best_auc_over_lambda(
    Y: np.ndarray,
    R: Dictionary,
    mask: GroundTruthMask,
    grid,
    cfg: ApgConfig | None = None,
    allow_flip: bool = False,
):
    """Demix at every lambda in the grid, score by column norms, and return
    (lambda*, RocCurve, DemixResult) for the AUC-maximizing lambda (ties go
    to the smaller lambda)."""
    from dataclasses import replace

    grid = list(grid)
    if not grid:
        raise ValueError("lambda grid is empty")
    if cfg is None:
        cfg = ApgConfig(lam=grid[0])
    best = None
    failures = []
    for lam in sorted(grid):
        try:
            result = demix(Y, R, replace(cfg, lam=float(lam)))
            curve = roc(
                column_norm_scores(result.A_hat), mask, allow_flip=allow_flip
            )
        except Exception as e:  # noqa: BLE001 - recorded per lambda
            logger.warning("lambda=%g failed: %s", lam, e)
            failures.append((lam, e))
            continue
        if best is None or curve.auc > best[1].auc:
            best = (float(lam), curve, result)
    if best is None:
        raise RuntimeError(
            f"all {len(failures)} lambdas failed; first: {failures[0][1]}"
        )
    return best
