"""Numerically stable probability operations on logits.

All functions upcast to float64 and use max-subtraction inside the
log-sum-exp so nothing overflows for |logit| up to about 1e4 / T.
"""

from __future__ import annotations

import numpy as np

from .types import LogitTensor, ValidationError

SCALE_THEN_POOL = "scale-then-pool"
POOL_THEN_SCALE = "pool-then-scale"
POOL_MODES = (SCALE_THEN_POOL, POOL_THEN_SCALE)

# Floor applied to probabilities before logarithms; avoids -inf from
# float32-scale underflow in inputs.
PROB_FLOOR = 1e-300

TEMPERATURE_MIN = 1e-2
TEMPERATURE_MAX = 1e2


def check_temperature(temperature: float) -> float:
    t = float(temperature)
    if not np.isfinite(t) or t <= 0.0:
        raise ValidationError(f"temperature must be a positive finite number; got {temperature}")
    return t


def log_softmax_temp(logits: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    """Row-wise log(Softmax(z / T)) for a (samples, classes) logit slice."""
    t = check_temperature(temperature)
    z = np.asarray(logits, dtype=np.float64) / t
    z -= z.max(axis=-1, keepdims=True)
    with np.errstate(divide="ignore"):  # exact zeros are fine in log space
        return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def softmax_temp(logits: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    """Row-wise Softmax(z / T); rows sum to 1 up to float rounding."""
    t = check_temperature(temperature)
    z = np.asarray(logits, dtype=np.float64) / t
    z -= z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    e /= e.sum(axis=-1, keepdims=True)
    return e


def pool_members(
    logits: LogitTensor, temperature: float = 1.0, mode: str = SCALE_THEN_POOL
) -> np.ndarray:
    """Pool ensemble members into one (samples, classes) probability matrix.

    scale-then-pool (default): mean over members of Softmax(z_k / T); each
    member's predictive distribution is formed at temperature T, then
    averaged. pool-then-scale: members are averaged at T=1 and the scalar
    temperature is applied to the log of the pooled distribution. The two
    modes coincide for a single member.
    """
    if mode not in POOL_MODES:
        raise ValidationError(f"unknown pool mode {mode!r}; expected one of {POOL_MODES}")
    check_temperature(temperature)
    if mode == SCALE_THEN_POOL:
        stacked = np.stack([softmax_temp(logits.member(k), temperature) for k in range(logits.members)])
        return stacked.mean(axis=0)
    pooled = np.stack([softmax_temp(logits.member(k), 1.0) for k in range(logits.members)]).mean(axis=0)
    with np.errstate(divide="ignore"):  # pooled zeros map to -inf, then to 0
        return softmax_temp(np.log(pooled), temperature)


def validate_prob_matrix(probs: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Check that rows are probability vectors (entries in [0,1], sums ~1)."""
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 2 or p.shape[1] < 2:
        raise ValidationError(f"probability matrix must be (samples, classes>=2); got {p.shape}")
    if not np.isfinite(p).all():
        raise ValidationError("probability matrix contains non-finite entries")
    if p.min(initial=0.0) < 0.0 or p.max(initial=0.0) > 1.0 + tol:
        raise ValidationError("probability entries must lie in [0, 1]")
    sums = p.sum(axis=1)
    worst = float(np.abs(sums - 1.0).max(initial=0.0))
    if worst > tol:
        raise ValidationError(f"probability rows must sum to 1 (worst deviation {worst:.3e})")
    return p


def predictive_entropy(probs: np.ndarray) -> np.ndarray:
    """Shannon entropy per row in nats, with 0 * log(0) taken as 0."""
    p = np.asarray(probs, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, p * np.log(p), 0.0)
    return -terms.sum(axis=-1)


def confidence_argmax(probs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-row (max probability, predicted class); ties go to the lowest index."""
    p = np.asarray(probs, dtype=np.float64)
    pred = p.argmax(axis=-1)
    conf = p[np.arange(p.shape[0]), pred]
    return conf, pred
