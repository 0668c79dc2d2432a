"""Optimal-temperature search and test-time cross-validation.

The temperature that maximizes validation log-likelihood is located by a
uniform grid in log-temperature (to bracket the optimum robustly, since the
pooled-ensemble likelihood need not be unimodal) followed by golden-section
refinement inside the best bracket.

Calibrated metrics are estimated without a held-out set: the test set is
repeatedly split into two halves, the temperature is fitted on one half and
the metric evaluated on the other, both ways, and all half-evaluations are
aggregated. Fixed seed means bit-identical results, independent of thread
count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import metrics as _metrics
from .metrics import BinningConfig
from .probs import PROB_FLOOR, POOL_MODES, SCALE_THEN_POOL, pool_members
from .rng import CounterRng
from .types import EvalDataset, ValidationError

LL = "ll"
BRIER = "brier"
ERROR = "error"
ECE = "ece"
TACE = "tace"
METRIC_IDS = (LL, BRIER, ERROR, ECE, TACE)

# Orientation matters when a metric drives an equivalent-ensemble-size lookup.
HIGHER_IS_BETTER = {LL: True, BRIER: False, ERROR: False, ECE: False, TACE: False}

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def metric_value(
    metric: str, probs: np.ndarray, labels: np.ndarray, binning: BinningConfig | None = None
) -> float:
    """Evaluate one metric id on a pooled probability matrix."""
    binning = binning or BinningConfig()
    if metric == LL:
        return _metrics.log_likelihood(probs, labels)
    if metric == BRIER:
        return _metrics.brier_score(probs, labels)
    if metric == ERROR:
        return _metrics.classification_error(probs, labels)
    if metric == ECE:
        return _metrics.ece(probs, labels, binning)
    if metric == TACE:
        return _metrics.tace(probs, labels, binning)
    raise ValidationError(f"unknown metric {metric!r}; expected one of {METRIC_IDS}")


def thread_limit() -> int:
    """Worker cap for internal parallelism; UQEVAL_THREADS overrides."""
    cpu = os.cpu_count() or 1
    env = os.environ.get("UQEVAL_THREADS", "").strip()
    if env:
        try:
            return max(1, min(int(env), cpu))
        except ValueError:
            pass
    return min(cpu, 4)


def parallel_map(fn, items: list):
    """Map preserving order; results are schedule-independent by construction."""
    if thread_limit() == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=thread_limit()) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class TempSearchConfig:
    lower: float = 1e-2
    upper: float = 1e2
    tolerance: float = 1e-4  # final bracket width in natural-log temperature
    grid_points: int = 50

    def __post_init__(self):
        if not 0.0 < self.lower < self.upper:
            raise ValidationError("need 0 < lower < upper temperature bounds")
        if self.tolerance <= 0.0:
            raise ValidationError("tolerance must be positive")
        if self.grid_points < 3:
            raise ValidationError("grid needs at least 3 points")


@dataclass(frozen=True)
class TemperatureFit:
    temperature: float
    log_likelihood: float
    boundary: bool = False


@dataclass(frozen=True)
class CalibratedResult:
    """Aggregate of the 2 x repeats half-evaluations of one metric."""

    metric: str
    mean: float
    std: float
    values: tuple[float, ...]
    temperatures: tuple[float, ...]
    seed: int
    repeats: int
    mode: str


class _PooledTrueProb:
    """log-likelihood of pooled member subsets as a function of temperature.

    Per member, the row-max-shifted float64 logits are precomputed once, so a
    single temperature evaluation costs one exp pass. A grid cache keyed by
    (member, grid index) lets many subsets share the bracketing stage.
    """

    def __init__(self, member_logits: list[np.ndarray], labels: np.ndarray):
        self.labels = np.asarray(labels, dtype=np.int64)
        self._rows = np.arange(len(self.labels))
        self.shifted = []
        for z in member_logits:
            z64 = np.asarray(z, dtype=np.float64)
            self.shifted.append(z64 - z64.max(axis=1, keepdims=True))

    def member_true_prob(self, k: int, temperature: float) -> np.ndarray:
        e = np.exp(self.shifted[k] / temperature)
        return e[self._rows, self.labels] / e.sum(axis=1)

    def ll(self, subset, temperature: float, grid_cols=None, grid_index=None) -> float:
        if grid_cols is not None and grid_index is not None:
            cols = [grid_cols[k][grid_index] for k in subset]
        else:
            cols = [self.member_true_prob(k, temperature) for k in subset]
        pooled = np.mean(np.stack(cols), axis=0) if len(cols) > 1 else cols[0]
        return float(np.log(np.clip(pooled, PROB_FLOOR, 1.0)).mean())

    def grid_cache(self, temperatures: np.ndarray) -> list[list[np.ndarray]]:
        return [
            [self.member_true_prob(k, float(t)) for t in temperatures]
            for k in range(len(self.shifted))
        ]


def _grid_temperatures(config: TempSearchConfig) -> np.ndarray:
    grid = np.exp(np.linspace(math.log(config.lower), math.log(config.upper), config.grid_points))
    grid[0] = config.lower  # exp(log(x)) drifts by an ulp; pin the bounds exactly
    grid[-1] = config.upper
    return grid


def _golden_section(ll_fn, log_lo: float, log_hi: float, tolerance: float) -> tuple[float, float]:
    """Maximize ll_fn(exp(x)) for x in [log_lo, log_hi]; returns (t, ll)."""
    a, b = log_lo, log_hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc = ll_fn(math.exp(c))
    fd = ll_fn(math.exp(d))
    while (b - a) > tolerance:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = ll_fn(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = ll_fn(math.exp(d))
    t = math.exp(0.5 * (a + b))
    return t, ll_fn(t)


def _fit_temperature(ll_fn, config: TempSearchConfig, grid_lls: list[float]) -> TemperatureFit:
    grid = _grid_temperatures(config)
    best = int(np.argmax(grid_lls))
    if best == 0 or best == len(grid) - 1:
        return TemperatureFit(float(grid[best]), grid_lls[best], boundary=True)
    t_gs, ll_gs = _golden_section(
        ll_fn, math.log(grid[best - 1]), math.log(grid[best + 1]), config.tolerance
    )
    # The refined point can only be trusted if it beats the best grid point
    # (the bracket is not guaranteed unimodal).
    if ll_gs >= grid_lls[best]:
        return TemperatureFit(t_gs, ll_gs)
    return TemperatureFit(float(grid[best]), grid_lls[best])


def find_temperature(
    dataset: EvalDataset,
    mode: str = SCALE_THEN_POOL,
    config: TempSearchConfig | None = None,
) -> TemperatureFit:
    """Temperature maximizing the pooled log-likelihood on `dataset`.

    The achieved log-likelihood is >= the value at every grid point; if the
    grid maximum sits at a search bound, the bound is returned flagged as
    `boundary`.
    """
    config = config or TempSearchConfig()
    if mode not in POOL_MODES:
        raise ValidationError(f"unknown pool mode {mode!r}; expected one of {POOL_MODES}")
    if mode == SCALE_THEN_POOL:
        evaluator = _PooledTrueProb(
            [dataset.logits.member(k) for k in range(dataset.members)], dataset.labels
        )
        subset = tuple(range(dataset.members))
    else:
        # Pool once at T=1; the scalar temperature then acts on the pooled
        # log-distribution, which behaves like a single member.
        pooled = pool_members(dataset.logits, 1.0, mode=SCALE_THEN_POOL)
        with np.errstate(divide="ignore"):
            evaluator = _PooledTrueProb([np.log(pooled)], dataset.labels)
        subset = (0,)

    ll_fn = lambda t: evaluator.ll(subset, t)  # noqa: E731
    grid = _grid_temperatures(config)
    cache = evaluator.grid_cache(grid)
    grid_lls = [evaluator.ll(subset, float(t), cache, g) for g, t in enumerate(grid)]
    return _fit_temperature(ll_fn, config, grid_lls)


def _split_halves(perm: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    half = (len(perm) + 1) // 2  # first half takes the extra sample on odd n
    return perm[:half], perm[half:]


def calibrated_metrics(
    dataset: EvalDataset,
    metric_ids: list[str] | tuple[str, ...] = (LL,),
    mode: str = SCALE_THEN_POOL,
    repeats: int = 5,
    seed: int = 0,
    binning: BinningConfig | None = None,
    search: TempSearchConfig | None = None,
) -> dict[str, CalibratedResult]:
    """Test-time cross-validation for several metrics sharing temperature fits.

    Each repeat splits the samples into halves A/B from the seeded stream,
    fits the temperature on A to score B and vice versa; every metric is
    evaluated on the same pooled matrices, so all results share the same
    2 x repeats temperatures.
    """
    n = dataset.samples
    if n < 4:
        raise ValidationError(f"test-time cross-validation needs at least 4 samples; got {n}")
    if repeats < 1:
        raise ValidationError("repeats must be >= 1")
    for metric in metric_ids:
        if metric not in METRIC_IDS:
            raise ValidationError(f"unknown metric {metric!r}; expected one of {METRIC_IDS}")

    stream = CounterRng(seed)
    contexts: list[tuple[np.ndarray, np.ndarray]] = []
    for _ in range(repeats):
        a, b = _split_halves(stream.permutation(n))
        contexts.append((a, b))
        contexts.append((b, a))

    def run(context):
        fit_idx, eval_idx = context
        fit = find_temperature(dataset.take_samples(fit_idx), mode=mode, config=search)
        probs = pool_members(
            dataset.take_samples(eval_idx).logits, fit.temperature, mode=mode
        )
        eval_labels = dataset.labels[eval_idx]
        values = {m: metric_value(m, probs, eval_labels, binning) for m in metric_ids}
        return fit.temperature, values

    outcomes = parallel_map(run, contexts)
    temperatures = tuple(t for t, _ in outcomes)
    results = {}
    for metric in metric_ids:
        values = tuple(vals[metric] for _, vals in outcomes)
        results[metric] = CalibratedResult(
            metric=metric,
            mean=float(np.mean(values)),
            std=float(np.std(values)),
            values=values,
            temperatures=temperatures,
            seed=seed,
            repeats=repeats,
            mode=mode,
        )
    return results


def calibrated_metric(
    dataset: EvalDataset,
    metric: str = LL,
    mode: str = SCALE_THEN_POOL,
    repeats: int = 5,
    seed: int = 0,
    binning: BinningConfig | None = None,
    search: TempSearchConfig | None = None,
) -> CalibratedResult:
    """Single-metric convenience wrapper around `calibrated_metrics`."""
    return calibrated_metrics(dataset, (metric,), mode, repeats, seed, binning, search)[metric]


def calibrated_ll_for_subsets(
    member_logits: list[np.ndarray],
    labels: np.ndarray,
    subsets: list[tuple[int, ...]],
    mode: str = SCALE_THEN_POOL,
    repeats: int = 5,
    seed: int = 0,
    search: TempSearchConfig | None = None,
) -> list[CalibratedResult]:
    """Calibrated log-likelihood for many member subsets of one pool.

    Produces bit-identical results to calling `calibrated_metric` on each
    stacked subset, but shares the split plan and the grid-stage member
    probabilities across subsets, which is what makes resampled
    ensemble-size sweeps tractable.
    """
    search = search or TempSearchConfig()
    n = len(labels)
    if n < 4:
        raise ValidationError(f"test-time cross-validation needs at least 4 samples; got {n}")
    if mode not in POOL_MODES:
        raise ValidationError(f"unknown pool mode {mode!r}; expected one of {POOL_MODES}")

    stream = CounterRng(seed)
    halves: list[tuple[np.ndarray, np.ndarray]] = []
    for _ in range(repeats):
        a, b = _split_halves(stream.permutation(n))
        halves.append((a, b))
        halves.append((b, a))

    unique = {}
    for s in subsets:
        unique.setdefault(tuple(s), len(unique))
    unique_subsets = list(unique.keys())

    grid = _grid_temperatures(search)
    labels_arr = np.asarray(labels, dtype=np.int64)
    per_subset_values: list[list[float]] = [[] for _ in unique_subsets]
    per_subset_temps: list[list[float]] = [[] for _ in unique_subsets]

    for fit_idx, eval_idx in halves:
        if mode == SCALE_THEN_POOL:
            fit_eval = _PooledTrueProb(
                [z[fit_idx] for z in member_logits], labels_arr[fit_idx]
            )
            cache = fit_eval.grid_cache(grid)

            def fit_subset(subset):
                grid_lls = [fit_eval.ll(subset, float(t), cache, g) for g, t in enumerate(grid)]
                ll_fn = lambda t: fit_eval.ll(subset, t)  # noqa: E731
                return _fit_temperature(ll_fn, search, grid_lls)

            fits = parallel_map(fit_subset, unique_subsets)
        else:
            def fit_subset(subset):
                stacked = np.stack([member_logits[k][fit_idx] for k in subset])
                ds = _subset_dataset(stacked, labels_arr[fit_idx])
                return find_temperature(ds, mode=mode, config=search)

            fits = parallel_map(fit_subset, unique_subsets)

        def score_subset(args):
            subset, fit = args
            stacked = np.stack([member_logits[k][eval_idx] for k in subset])
            ds = _subset_dataset(stacked, labels_arr[eval_idx])
            probs = pool_members(ds.logits, fit.temperature, mode=mode)
            return metric_value(LL, probs, ds.labels)

        values = parallel_map(score_subset, list(zip(unique_subsets, fits)))
        for i, (fit, value) in enumerate(zip(fits, values)):
            per_subset_temps[i].append(fit.temperature)
            per_subset_values[i].append(value)

    results = []
    for s in subsets:
        i = unique[tuple(s)]
        values = tuple(per_subset_values[i])
        results.append(
            CalibratedResult(
                metric=LL,
                mean=float(np.mean(values)),
                std=float(np.std(values)),
                values=values,
                temperatures=tuple(per_subset_temps[i]),
                seed=seed,
                repeats=repeats,
                mode=mode,
            )
        )
    return results


def _subset_dataset(stacked_values: np.ndarray, labels: np.ndarray) -> EvalDataset:
    from .types import LogitTensor

    return EvalDataset(LogitTensor(stacked_values.astype(np.float32)), labels.astype(np.uint32))
