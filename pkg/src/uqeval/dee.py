"""Deep-ensemble-equivalent scoring.

A reference pool of independently obtained single-member datasets defines,
for each ensemble size l, the mean and standard deviation of the calibrated
log-likelihood over randomly resampled size-l sub-ensembles. A method's
score is then the (real-valued, linearly interpolated) reference size whose
mean first reaches the method's value; bands from mean +/- std give lower
and upper bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calibration import (
    HIGHER_IS_BETTER,
    LL,
    CalibratedResult,
    TempSearchConfig,
    calibrated_ll_for_subsets,
    calibrated_metric,
)
from .metrics import BinningConfig
from .probs import SCALE_THEN_POOL
from .rng import CounterRng
from .types import EvalDataset, ValidationError, stack_members


@dataclass(frozen=True)
class DeBaseline:
    """Per-size calibrated-metric statistics for the reference ensemble pool."""

    sizes: tuple[int, ...]
    mean: tuple[float, ...]
    std: tuple[float, ...]
    pool_size: int
    resamples: int
    seed: int
    mode: str
    repeats: int
    metric: str = LL

    def __post_init__(self):
        if self.sizes != tuple(range(1, len(self.sizes) + 1)):
            raise ValidationError("baseline sizes must be 1..L")
        if len(self.mean) != len(self.sizes) or len(self.std) != len(self.sizes):
            raise ValidationError("baseline mean/std must align with sizes")
        if self.sizes and self.sizes[-1] > self.pool_size:
            raise ValidationError("baseline max size exceeds pool size")


@dataclass(frozen=True)
class DeeScore:
    """Equivalent reference-ensemble size with interpolated bounds (all >= 1)."""

    value: float
    lower: float
    upper: float
    saturated: bool
    lower_saturated: bool
    upper_saturated: bool
    k: int | None = None
    method_mean: float | None = None  # the metric level that was looked up


def _validate_pool(pool: list[EvalDataset]) -> None:
    if not pool:
        raise ValidationError("pool must not be empty")
    first = pool[0]
    for i, ds in enumerate(pool):
        if ds.members != 1:
            raise ValidationError(f"pool dataset {i} has {ds.members} members; expected 1")
        if ds.samples != first.samples or ds.classes != first.classes:
            raise ValidationError(f"pool dataset {i} shape does not match dataset 0")
        if not np.array_equal(ds.labels, first.labels):
            raise ValidationError(f"pool dataset {i} labels do not match dataset 0")


def _draw_subsets(stream: CounterRng, sizes: list[int], pool_size: int, resamples: int):
    """R index subsets per size, drawn sequentially from the stream."""
    plan: dict[int, list[tuple[int, ...]]] = {}
    for size in sizes:
        plan[size] = [tuple(stream.subset(size, pool_size)) for _ in range(resamples)]
    return plan


def _resampled_cll(
    pool: list[EvalDataset],
    plan: dict[int, list[tuple[int, ...]]],
    eval_seed: int,
    mode: str,
    repeats: int,
    metric: str,
    binning: BinningConfig | None,
    search: TempSearchConfig | None,
) -> dict[int, list[CalibratedResult]]:
    member_logits = [ds.logits.member(0) for ds in pool]
    labels = pool[0].labels
    all_subsets = [s for size in plan for s in plan[size]]
    if metric == LL:
        flat = calibrated_ll_for_subsets(
            member_logits, labels, all_subsets, mode=mode, repeats=repeats,
            seed=eval_seed, search=search,
        )
    else:
        flat = [
            calibrated_metric(
                stack_members([pool[k] for k in subset]), metric, mode=mode,
                repeats=repeats, seed=eval_seed, binning=binning, search=search,
            )
            for subset in all_subsets
        ]
    out: dict[int, list[CalibratedResult]] = {}
    i = 0
    for size in plan:
        out[size] = flat[i : i + len(plan[size])]
        i += len(plan[size])
    return out


def build_de_baseline(
    pool: list[EvalDataset],
    max_size: int,
    resamples: int = 20,
    seed: int = 0,
    mode: str = SCALE_THEN_POOL,
    repeats: int = 5,
    metric: str = LL,
    binning: BinningConfig | None = None,
    search: TempSearchConfig | None = None,
) -> DeBaseline:
    """Reference statistics for sizes 1..max_size from a pool of single models.

    For each size, `resamples` subsets of distinct pool indices are drawn
    (without replacement inside a subset, independently across draws); every
    subset's pooled prediction is scored with the calibrated metric and the
    mean/std across draws is recorded. One evaluation seed is derived from
    the stream before the draws, so identical subsets always score
    identically (the size = pool_size std is exactly zero).
    """
    _validate_pool(pool)
    if not 1 <= max_size <= len(pool):
        raise ValidationError(f"max_size must be in [1, {len(pool)}]; got {max_size}")
    if resamples < 1:
        raise ValidationError("resamples must be >= 1")
    stream = CounterRng(seed)
    eval_seed = stream.next_u64()
    sizes = list(range(1, max_size + 1))
    plan = _draw_subsets(stream, sizes, len(pool), resamples)
    scored = _resampled_cll(pool, plan, eval_seed, mode, repeats, metric, binning, search)
    means = tuple(float(np.mean([r.mean for r in scored[size]])) for size in sizes)
    stds = tuple(float(np.std([r.mean for r in scored[size]])) for size in sizes)
    return DeBaseline(
        sizes=tuple(sizes), mean=means, std=stds, pool_size=len(pool),
        resamples=resamples, seed=seed, mode=mode, repeats=repeats, metric=metric,
    )


def _first_crossing(levels: np.ndarray, target: float) -> tuple[float, bool]:
    """Smallest real size l >= 1 where the piecewise-linear curve reaches target.

    levels[i] is the curve value at size i+1. Returns (size, saturated);
    below the first level clamps to 1, never reaching it saturates at L.
    """
    if levels[0] >= target:
        return 1.0, False
    for j in range(len(levels) - 1):
        a, b = levels[j], levels[j + 1]
        if b >= target:
            # a < target <= b, so the segment rises through the target.
            t = (target - a) / (b - a)
            return (j + 1) + t, False
    return float(len(levels)), True


def dee_lookup(metric_mean: float, baseline: DeBaseline, k: int | None = None) -> DeeScore:
    """Interpolated equivalent size of `metric_mean` against a baseline.

    The smallest crossing is used even if the baseline is non-monotone. The
    upper bound reads the mean-minus-std curve (a weaker reference needs more
    members), the lower bound the mean-plus-std curve; for metrics where
    lower is better the curves flip accordingly.
    """
    if len(baseline.sizes) < 2:
        raise ValidationError("baseline needs at least 2 sizes for interpolation")
    sign = 1.0 if HIGHER_IS_BETTER[baseline.metric] else -1.0
    mean = sign * np.asarray(baseline.mean)
    std = np.asarray(baseline.std)
    target = sign * metric_mean
    value, saturated = _first_crossing(mean, target)
    lower, lower_sat = _first_crossing(mean + std, target)
    upper, upper_sat = _first_crossing(mean - std, target)
    return DeeScore(
        value=value, lower=lower, upper=upper, saturated=saturated,
        lower_saturated=lower_sat, upper_saturated=upper_sat, k=k,
        method_mean=metric_mean,
    )


def dee_curve(
    method_pool: list[EvalDataset],
    baseline: DeBaseline,
    k_grid: list[int] | tuple[int, ...] | None = None,
    resamples: int = 20,
    seed: int = 0,
    mode: str = SCALE_THEN_POOL,
    repeats: int = 5,
    binning: BinningConfig | None = None,
    search: TempSearchConfig | None = None,
) -> list[DeeScore]:
    """Equivalent-size scores of a method pool for each member count k.

    The method's calibrated metric at each k is estimated with the same
    resampling scheme as the baseline, then looked up against the baseline
    curve. The method pool must score the same samples and labels as the
    baseline pool did.
    """
    _validate_pool(method_pool)
    if k_grid is None:
        k_grid = list(range(1, min(baseline.sizes[-1], len(method_pool)) + 1))
    k_grid = [int(k) for k in k_grid]
    if len(set(k_grid)) != len(k_grid):
        raise ValidationError("k grid must not contain duplicates")
    for k in k_grid:
        if not 1 <= k <= len(method_pool):
            raise ValidationError(f"k={k} exceeds method pool size {len(method_pool)}")
    stream = CounterRng(seed)
    eval_seed = stream.next_u64()
    plan = _draw_subsets(stream, k_grid, len(method_pool), resamples)
    scored = _resampled_cll(
        method_pool, plan, eval_seed, mode, repeats, baseline.metric, binning, search
    )
    out = []
    for k in k_grid:
        level = float(np.mean([r.mean for r in scored[k]]))
        out.append(dee_lookup(level, baseline, k=k))
    return out
