"""Independent reference implementations used to cross-check the library.

Everything here is written as plain loops (or extended precision) on purpose:
these oracles must not share code paths with the implementations they verify.
"""

import math

import numpy as np


def softmax_longdouble(logits, temperature=1.0):
    """Direct exp/normalize in extended precision, no max-subtraction."""
    z = np.asarray(logits, dtype=np.longdouble) / np.longdouble(temperature)
    e = np.exp(z)
    return (e / e.sum(axis=-1, keepdims=True)).astype(np.float64)


def log_likelihood_loop(probs, labels):
    total = 0.0
    for row, label in zip(probs, labels):
        total += math.log(max(row[int(label)], 1e-300))
    return total / len(labels)


def brier_loop(probs, labels):
    n, c = np.asarray(probs).shape
    total = 0.0
    for i in range(n):
        for j in range(c):
            target = 1.0 if j == int(labels[i]) else 0.0
            total += (target - probs[i][j]) ** 2
    return total / (n * c)


def ece_loop(probs, labels, bins):
    n = len(labels)
    conf, pred = [], []
    for row in probs:
        best = 0
        for j in range(1, len(row)):
            if row[j] > row[best]:
                best = j
        conf.append(row[best])
        pred.append(best)
    total = 0.0
    for m in range(1, bins + 1):
        members = []
        for i in range(n):
            b = math.ceil(conf[i] * bins)
            if b < 1:
                b = 1
            if b > bins:
                b = bins
            if b == m:
                members.append(i)
        if not members:
            continue
        acc = sum(1.0 for i in members if pred[i] == int(labels[i])) / len(members)
        avg_conf = sum(conf[i] for i in members) / len(members)
        total += (len(members) / n) * abs(acc - avg_conf)
    return total


def tace_loop(probs, labels, bins, threshold):
    probs = np.asarray(probs)
    n, c = probs.shape
    total = 0.0
    for cls in range(c):
        entries = [(probs[i][cls], i) for i in range(n) if probs[i][cls] > threshold]
        entries.sort(key=lambda pair: pair[0])
        r = len(entries)
        if r == 0:
            continue
        base, extra = divmod(r, bins)
        start = 0
        for b in range(bins):
            size = base + (1 if b < extra else 0)
            if size == 0:
                continue
            chunk = entries[start : start + size]
            start += size
            objs = sum(1.0 for _, i in chunk if int(labels[i]) == cls) / size
            conf = sum(p for p, _ in chunk) / size
            total += (size / n) * abs(objs - conf)
    return total / (c * bins)


def auc_roc_pairs(scores, positives):
    """Pairwise counting: wins plus half-ties over all (positive, negative) pairs."""
    pos = [s for s, flag in zip(scores, positives) if flag]
    neg = [s for s, flag in zip(scores, positives) if not flag]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def auc_pr_sweep(scores, positives):
    """Threshold sweep: precision at each distinct score, rectangles over recall."""
    n_pos = sum(1 for flag in positives if flag)
    thresholds = sorted(set(scores), reverse=True)
    area = 0.0
    prev_recall = 0.0
    for t in thresholds:
        tp = sum(1 for s, flag in zip(scores, positives) if flag and s >= t)
        fp = sum(1 for s, flag in zip(scores, positives) if not flag and s >= t)
        recall = tp / n_pos
        precision = tp / (tp + fp)
        area += (recall - prev_recall) * precision
        prev_recall = recall
    return area


def accuracy_rejection_loop(probs, labels):
    """Hand-sorted rejection sweep with explicit trapezoid integration."""
    conf, pred = [], []
    for row in probs:
        best = 0
        for j in range(1, len(row)):
            if row[j] > row[best]:
                best = j
        conf.append(row[best])
        pred.append(best)
    n = len(labels)
    correct = [1.0 if pred[i] == int(labels[i]) else 0.0 for i in range(n)]
    order = sorted(range(n), key=lambda i: (-conf[i], correct[i]))
    ys = []
    for j in range(n):
        kept = order[: n - j]
        ys.append(sum(correct[i] for i in kept) / len(kept))
    ys.append(1.0)
    xs = [j / n for j in range(n + 1)]
    area = 0.0
    for j in range(n):
        area += (xs[j + 1] - xs[j]) * (ys[j] + ys[j + 1]) / 2.0
    return ys, area


def entropy_loop(row):
    total = 0.0
    for p in row:
        if p > 0.0:
            total += p * math.log(p)
    return -total
