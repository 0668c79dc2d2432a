"""Synthetic model zoos for desk-scale validation.

Builds pools of single-member datasets whose labels are drawn from the
softmax of known ground-truth logits, so the data is perfectly calibrated
against those logits by construction. Member logits are the truth plus
correlated Gaussian perturbations, scaled by a distortion factor that the
temperature search should recover (asymptotically, the optimal temperature
equals the distortion).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .probs import softmax_temp
from .rng import CounterRng
from .types import EvalDataset, LogitTensor, ValidationError


@dataclass(frozen=True)
class ZooConfig:
    samples: int
    classes: int
    members: int
    signal: float = 3.0         # size of the true-class logit bump
    base_noise: float = 1.0     # spread of the shared true logits
    member_noise: float = 1.0   # spread of per-member perturbations
    correlation: float = 0.0    # correlation of perturbations across members
    distortion: float = 1.0     # logit scale factor; optimal temperature
    seed: int = 0

    def __post_init__(self):
        if self.samples < 1 or self.classes < 2 or self.members < 1:
            raise ValidationError("need samples >= 1, classes >= 2, members >= 1")
        if self.signal <= 0.0:
            raise ValidationError("signal must be positive")
        if self.base_noise < 0.0 or self.member_noise < 0.0:
            raise ValidationError("noise scales must be non-negative")
        if not 0.0 <= self.correlation <= 1.0:
            raise ValidationError("correlation must lie in [0, 1]")
        if self.distortion <= 0.0:
            raise ValidationError("distortion must be positive")


def _categorical(probs: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw per row: smallest class whose cumulative prob exceeds u."""
    cum = np.cumsum(probs, axis=1)
    idx = (uniforms[:, None] >= cum).sum(axis=1)
    return np.minimum(idx, probs.shape[1] - 1)


def generate_zoo(config: ZooConfig) -> tuple[list[EvalDataset], LogitTensor]:
    """Pool of single-member datasets plus the ground-truth logits.

    Stream draw order (fixed for reproducibility): provisional labels, base
    noise, label-redraw uniforms, shared member noise, independent member
    noise. Labels are redrawn from softmax(truth) so the stored labels are
    exactly calibrated against the returned truth tensor.
    """
    cfg = config
    n, c, s = cfg.samples, cfg.classes, cfg.members
    stream = CounterRng(cfg.seed)

    provisional = stream.integers(c, n)
    base = stream.normal((n, c))
    truth = cfg.base_noise * base
    truth[np.arange(n), provisional] += cfg.signal

    redraw_u = stream.uniform(n)
    labels = _categorical(softmax_temp(truth, 1.0), redraw_u)

    shared = stream.normal((n, c))
    independent = stream.normal((s, n, c))
    rho = cfg.correlation
    perturb = cfg.member_noise * (
        np.sqrt(rho) * shared[None, :, :] + np.sqrt(1.0 - rho) * independent
    )
    member_values = (cfg.distortion * (truth[None, :, :] + perturb)).astype(np.float32)

    pool = [
        EvalDataset(LogitTensor(member_values[k : k + 1]), labels.astype(np.uint32))
        for k in range(s)
    ]
    true_logits = LogitTensor(truth[None, :, :].astype(np.float32))
    return pool, true_logits
