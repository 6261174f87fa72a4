import logging
from typing import Optional, Tuple

import numpy as np

from app.models.domain import MembershipMap, RocCurve
from app.utils.errors import InputError

logger = logging.getLogger(__name__)

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


def _prepare(scores, truth, mask=None) -> Tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(truth).astype(bool)
    if scores.shape != truth.shape:
        raise InputError(f"scores {scores.shape} and truth {truth.shape} differ in shape")
    if mask is not None:
        mask = np.asarray(mask).astype(bool)
        if mask.shape != truth.shape:
            raise InputError(f"mask {mask.shape} and truth {truth.shape} differ in shape")
        scores, truth = scores[mask], truth[mask]
    scores, truth = scores.ravel(), truth.ravel()
    if not np.all(np.isfinite(scores)):
        raise InputError("scores must be finite")
    if truth.all() or not truth.any():
        raise InputError("truth must contain both positive and negative pixels")
    return scores, truth


def roc_curve(scores, truth, mask=None) -> RocCurve:
    """Pixel-level ROC: a pixel is called positive when its score is >= the threshold.

    Thresholds run from +inf through every distinct score (descending) to -inf,
    so the curve starts at (0, 0) and ends at (1, 1). Tied scores move together,
    which makes the trapezoid area equal the pair-counting AUC with ties worth 1/2.
    """
    scores, truth = _prepare(scores, truth, mask)
    order = np.argsort(-scores, kind="mergesort")
    scores, truth = scores[order], truth[order]

    distinct = np.nonzero(np.diff(scores))[0]
    ends = np.r_[distinct, scores.size - 1]
    tp = np.cumsum(truth)[ends]
    fp = np.cumsum(~truth)[ends]

    n_pos, n_neg = truth.sum(), (~truth).sum()
    tpr = np.r_[0.0, tp / n_pos, 1.0]
    fpr = np.r_[0.0, fp / n_neg, 1.0]
    thresholds = np.r_[np.inf, scores[ends], -np.inf]
    auc = float(_trapezoid(tpr, fpr))
    return RocCurve(fpr=fpr, tpr=tpr, thresholds=thresholds, auc=min(max(auc, 0.0), 1.0))


def pick_topic_for_class(mmap: MembershipMap, truth, topic: Optional[int] = None) -> int:
    """Topic whose membership map best detects ``truth`` (highest AUC, lowest index on ties)."""
    truth = np.asarray(truth).astype(bool)
    if truth.shape != mmap.coverage.shape:
        raise InputError("truth mask does not match the membership map")
    covered_truth = truth[mmap.coverage]
    if covered_truth.all() or not covered_truth.any():
        raise InputError("truth must contain both classes on covered pixels")
    if topic is not None:
        if not 0 <= topic < mmap.K:
            raise InputError(f"topic {topic} out of range for K={mmap.K}")
        return topic
    aucs = [roc_curve(mmap.values[k], truth, mmap.coverage).auc for k in range(mmap.K)]
    best = int(np.argmax(aucs))
    logger.info(f"Per-topic AUC {[round(a, 4) for a in aucs]}, picked topic {best}")
    return best


def crisp_operating_point(labels, topic: int, truth) -> Tuple[float, float]:
    """(FPR, TPR) of a crisp segmentation that calls ``topic`` the positive class."""
    labels = np.asarray(labels)
    covered = labels >= 0
    detected = labels == topic
    _, truth_flat = _prepare(detected.astype(np.float64), truth, covered)
    detected = detected[covered].ravel()
    tpr = float(np.sum(detected & truth_flat) / truth_flat.sum())
    fpr = float(np.sum(detected & ~truth_flat) / (~truth_flat).sum())
    return fpr, tpr
