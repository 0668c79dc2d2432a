"""Scalar uncertainty metrics computed from a pooled probability matrix.

Covers the proper scoring rules (log-likelihood, Brier), classification
error, binned calibration errors (ECE with equal-width bins, TACE with
thresholded per-class adaptive bins), misclassification-detection AUCs, and
accuracy-rejection curves with their area.

A word of caution on the detection AUCs: correct/incorrect predictions are
specific to each model, so every model induces its own detection problem.
The values are meaningful for one model but not directly comparable across
models; reports generated by this package always carry that caveat.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .probs import PROB_FLOOR, confidence_argmax, predictive_entropy
from .types import ValidationError

CONFIDENCE = "confidence"
NEGATIVE_ENTROPY = "negative-entropy"
DETECTION_SCORES = (CONFIDENCE, NEGATIVE_ENTROPY)


@dataclass(frozen=True)
class BinningConfig:
    """Bin count for ECE/TACE and the per-class probability threshold for TACE."""

    bin_count: int = 15
    threshold: float = 1e-3

    def __post_init__(self):
        if self.bin_count < 1:
            raise ValidationError(f"bin_count must be >= 1; got {self.bin_count}")
        if not 0.0 <= self.threshold < 1.0:
            raise ValidationError(f"threshold must be in [0, 1); got {self.threshold}")


def _check_shapes(probs: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(probs, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if p.ndim != 2:
        raise ValidationError(f"probability matrix must be 2-D; got shape {p.shape}")
    if y.shape != (p.shape[0],):
        raise ValidationError(f"labels shape {y.shape} does not match {p.shape[0]} samples")
    return p, y


def log_likelihood(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean log-probability assigned to the true labels (always <= 0)."""
    p, y = _check_shapes(probs, labels)
    true_p = np.clip(p[np.arange(len(y)), y], PROB_FLOOR, 1.0)
    return float(np.log(true_p).mean())


def brier_score(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean squared distance to the one-hot target, normalized by class count.

    Ranges over [0, 2/C]: zero for perfect one-hot predictions, 2/C for a
    fully confident wrong prediction.
    """
    p, y = _check_shapes(probs, labels)
    n, c = p.shape
    sq = (p * p).sum(axis=1) - 2.0 * p[np.arange(n), y] + 1.0
    return float(sq.mean() / c)


def classification_error(probs: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of samples whose argmax (lowest index on ties) misses the label."""
    p, y = _check_shapes(probs, labels)
    _, pred = confidence_argmax(p)
    return float((pred != y).mean())


def ece(probs: np.ndarray, labels: np.ndarray, config: BinningConfig = BinningConfig()) -> float:
    """Expected calibration error over equal-width confidence bins.

    Confidence c lands in bin ceil(c * M) (right-closed bins); c = 0 goes to
    bin 1. Empty bins contribute nothing. Note the degenerate optimum: a
    constant uniform predictor on a balanced dataset scores 0.
    """
    p, y = _check_shapes(probs, labels)
    m = config.bin_count
    conf, pred = confidence_argmax(p)
    correct = (pred == y).astype(np.float64)
    bins = np.ceil(conf * m).astype(np.int64)
    bins = np.clip(bins, 1, m) - 1
    counts = np.bincount(bins, minlength=m).astype(np.float64)
    acc_sum = np.bincount(bins, weights=correct, minlength=m)
    conf_sum = np.bincount(bins, weights=conf, minlength=m)
    occupied = counts > 0
    gaps = np.zeros(m)
    gaps[occupied] = np.abs(
        acc_sum[occupied] / counts[occupied] - conf_sum[occupied] / counts[occupied]
    )
    return float((counts * gaps).sum() / len(y))


def tace(probs: np.ndarray, labels: np.ndarray, config: BinningConfig = BinningConfig()) -> float:
    """Thresholded adaptive calibration error.

    Per class, probabilities above the threshold are sorted ascending and cut
    into `bin_count` near-equal-count bins (the first r mod M bins take one
    extra element). Each bin compares the observed frequency of the class
    against the mean predicted probability; bin weights use the full sample
    count, and the total is averaged over classes and bins.
    """
    p, y = _check_shapes(probs, labels)
    n, c = p.shape
    m = config.bin_count
    total = 0.0
    for cls in range(c):
        col = p[:, cls]
        keep = np.flatnonzero(col > config.threshold)
        r = keep.size
        if r == 0:
            continue
        order = keep[np.argsort(col[keep], kind="stable")]
        hits = (y[order] == cls).astype(np.float64)
        vals = col[order]
        base, extra = divmod(r, m)
        start = 0
        for b in range(m):
            size = base + (1 if b < extra else 0)
            if size == 0:
                continue
            sel = slice(start, start + size)
            start += size
            objs = hits[sel].mean()
            conf = vals[sel].mean()
            total += (size / n) * abs(objs - conf)
    return total / (c * m)


def misclassification_auc(
    probs: np.ndarray, labels: np.ndarray, score: str = CONFIDENCE
) -> tuple[float, float]:
    """(AUC-ROC, AUC-PR) for detecting this model's own misclassifications.

    Positives are the misclassified samples; the detection score is
    1 - confidence (score="confidence") or the predictive entropy
    (score="negative-entropy"). AUC-ROC uses the rank statistic with ties
    counted half, AUC-PR integrates precision over recall increments.
    Raises if every prediction is correct or every prediction is wrong.
    """
    p, y = _check_shapes(probs, labels)
    if score not in DETECTION_SCORES:
        raise ValidationError(f"unknown detection score {score!r}; expected one of {DETECTION_SCORES}")
    conf, pred = confidence_argmax(p)
    positive = pred != y
    n_pos = int(positive.sum())
    if n_pos == 0 or n_pos == len(y):
        raise ValidationError("degenerate detection problem: need both correct and incorrect predictions")
    detect = (1.0 - conf) if score == CONFIDENCE else predictive_entropy(p)
    return _auc_roc(detect, positive), _auc_pr(detect, positive)


def _auc_roc(scores: np.ndarray, positive: np.ndarray) -> float:
    # Midrank statistic: ties between a positive and a negative count 1/2.
    order = np.argsort(scores, kind="stable")
    s = scores[order]
    ranks = np.empty(len(s), dtype=np.float64)
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and s[j + 1] == s[i]:
            j += 1
        ranks[i : j + 1] = 0.5 * (i + j) + 1.0  # average of 1-based ranks
        i = j + 1
    pos = positive[order]
    n_pos = int(pos.sum())
    n_neg = len(s) - n_pos
    rank_sum = float(ranks[pos].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def _auc_pr(scores: np.ndarray, positive: np.ndarray) -> float:
    # Step integration: precision at each distinct threshold, rectangle rule
    # over recall increments (thresholds swept from the highest score down).
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    pos = positive[order].astype(np.float64)
    n_pos = pos.sum()
    tp = np.cumsum(pos)
    fp = np.cumsum(1.0 - pos)
    # Last index of each tie group marks the cumulative counts at that threshold.
    boundary = np.flatnonzero(np.append(s[1:] != s[:-1], True))
    area = 0.0
    prev_recall = 0.0
    for b in boundary:
        recall = tp[b] / n_pos
        precision = tp[b] / (tp[b] + fp[b])
        area += (recall - prev_recall) * precision
        prev_recall = recall
    return float(area)


def accuracy_rejection(probs: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, float]:
    """Accuracy-rejection curve and its area (AU-ARC).

    Samples are ranked by confidence; at rejection rate j/n the j least
    confident are dropped and accuracy is taken over the rest. Confidence
    ties are resolved pessimistically (tied correct samples are rejected
    before tied incorrect ones). The full-rejection point is pinned to
    accuracy 1 so a perfect rejector scores exactly 1. Returns an
    (n+1, 2) array of (rejection_rate, accuracy) points and the trapezoidal
    area under them.
    """
    p, y = _check_shapes(probs, labels)
    n = len(y)
    conf, pred = confidence_argmax(p)
    correct = (pred == y).astype(np.float64)
    # Descending confidence; within ties incorrect first, so correct ties sit
    # at the bottom and are removed first.
    order = np.lexsort((correct, -conf))
    kept_correct = np.cumsum(correct[order])  # correct count among the top j+1
    accuracies = np.empty(n + 1, dtype=np.float64)
    # At rejection j/n the n-j most confident remain.
    accuracies[:n] = kept_correct[::-1] / np.arange(n, 0, -1, dtype=np.float64)
    accuracies[n] = 1.0
    rates = np.arange(n + 1, dtype=np.float64) / n
    curve = np.column_stack([rates, accuracies])
    au_arc = float(np.trapezoid(accuracies, rates))
    return curve, au_arc
