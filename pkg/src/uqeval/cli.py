"""Command-line interface.

Subcommands: evaluate (full metric report for pooled members), calibrate
(print the fitted temperature), pool (write pooled log-probabilities as a
single-member container), synth (generate a synthetic zoo), dee (baseline +
equivalent-size curve). Every run is reproducible from the input digests,
the flags, and the seed, all of which are echoed into the report.

Exit codes: 0 success, 1 validation/format error, 2 I/O or usage error.
Set UQEVAL_THREADS to cap internal parallelism (results do not depend on it).
"""

from __future__ import annotations

import functools
import hashlib
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .calibration import METRIC_IDS, calibrated_metrics, find_temperature
from .containers import read_container, read_csv, write_container
from .metrics import (
    CONFIDENCE,
    DETECTION_SCORES,
    BinningConfig,
    accuracy_rejection,
    brier_score,
    classification_error,
    ece,
    log_likelihood,
    misclassification_auc,
    tace,
)
from .probs import PROB_FLOOR, POOL_MODES, SCALE_THEN_POOL, pool_members
from .report import (
    AUC_COMPARABILITY_CAVEAT,
    MetricEntry,
    MetricReport,
    auc_entry,
    emit_report,
)
from .dee import build_de_baseline, dee_curve
from .synth import ZooConfig, generate_zoo
from .types import EvalDataset, LogitTensor, ValidationError, stack_members


def _load_dataset(path: str) -> EvalDataset:
    if str(path).endswith(".csv"):
        return read_csv(path)
    return read_container(path)


def _digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _load_members(paths: tuple[str, ...]) -> tuple[EvalDataset, tuple[tuple[str, str], ...]]:
    datasets = []
    for p in paths:
        try:
            datasets.append(_load_dataset(p))
        except ValueError as exc:
            raise ValidationError(f"{p}: {exc}") from exc
    merged = stack_members(datasets)
    digests = tuple((Path(p).name, _digest(p)) for p in paths)
    return merged, digests


def _load_pool_dir(directory: str) -> tuple[list[EvalDataset], tuple[tuple[str, str], ...]]:
    files = sorted(Path(directory).glob("*.uqeb"))
    if not files:
        raise ValidationError(f"no .uqeb files found in {directory}")
    pool = []
    for f in files:
        ds = read_container(f)
        if ds.members != 1:
            raise ValidationError(f"{f.name}: pool files must hold a single member; got {ds.members}")
        pool.append(ds)
    digests = tuple((f.name, _digest(str(f))) for f in files)
    return pool, digests


def _write_output(data: bytes, output: str | None) -> None:
    if output is None:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        Path(output).write_bytes(data)


def _exit_codes(fn):
    @functools.wraps(fn)
    def wrapped(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except ValueError as exc:  # includes validation and container errors
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapped


@click.group()
@click.version_option(version=__version__)
def main():
    """Uncertainty evaluation for classifier logits."""


_common = [
    click.option("--mode", type=click.Choice(POOL_MODES), default=SCALE_THEN_POOL,
                 show_default=True, help="how temperature and member pooling compose"),
    click.option("--seed", type=int, default=0, show_default=True),
]


def _add(options):
    def deco(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn

    return deco


@main.command()
@click.argument("inputs", nargs=-1, required=True, type=click.Path())
@_add(_common)
@click.option("--bins", "-M", type=int, default=15, show_default=True,
              help="bin count for calibration errors")
@click.option("--tace-threshold", type=float, default=1e-3, show_default=True,
              help="per-class probability threshold for adaptive bins")
@click.option("--repeats", type=int, default=5, show_default=True,
              help="test-time cross-validation repeats")
@click.option("--auc-score", type=click.Choice(DETECTION_SCORES), default=CONFIDENCE,
              show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
@click.option("--output", "-o", type=click.Path(), default=None)
@click.option("--train-cost", type=float, default=None,
              help="optional training-cost metadata passed through to the report")
@_exit_codes
def evaluate(inputs, mode, seed, bins, tace_threshold, repeats, auc_score, fmt, output, train_cost):
    """Full metric report for one or more member files pooled together."""
    dataset, digests = _load_members(inputs)
    binning = BinningConfig(bin_count=bins, threshold=tace_threshold)
    probs = pool_members(dataset.logits, 1.0, mode=mode)
    labels = dataset.labels

    bin_params = {"bins": bins}
    tace_params = {"bins": bins, "threshold": tace_threshold}
    entries = [
        MetricEntry("ll", log_likelihood(probs, labels)),
        MetricEntry("brier", brier_score(probs, labels)),
        MetricEntry("error", classification_error(probs, labels)),
        MetricEntry("ece", ece(probs, labels, binning), params=bin_params),
        MetricEntry("tace", tace(probs, labels, binning), params=tace_params),
    ]
    caveats = []
    try:
        auc_roc, auc_pr = misclassification_auc(probs, labels, score=auc_score)
        entries.append(auc_entry("auc_roc", auc_roc, {"score": auc_score}))
        entries.append(auc_entry("auc_pr", auc_pr, {"score": auc_score}))
        caveats.append(AUC_COMPARABILITY_CAVEAT)
    except ValidationError as exc:
        caveats.append(f"detection AUCs omitted: {exc}")
    _, au_arc = accuracy_rejection(probs, labels)
    entries.append(MetricEntry("au_arc", au_arc, params={"ties": "pessimistic"}))

    calibrated = calibrated_metrics(
        dataset, METRIC_IDS, mode=mode, repeats=repeats, seed=seed, binning=binning
    )
    cal_params = {"repeats": repeats, "std": "population"}
    for metric in METRIC_IDS:
        result = calibrated[metric]
        params = dict(cal_params)
        if metric in ("ece", "tace"):
            params.update(tace_params if metric == "tace" else bin_params)
        entries.append(
            MetricEntry(f"calibrated_{metric}", result.mean, std=result.std, params=params)
        )
    temperatures = calibrated["ll"].temperatures

    report = MetricReport(
        tool_version=__version__, pool_mode=mode, seed=seed, entries=tuple(entries),
        input_digests=digests, temperatures=temperatures, caveats=tuple(caveats),
        train_cost=train_cost,
    )
    _write_output(emit_report(report, fmt), output)


@main.command()
@click.argument("inputs", nargs=-1, required=True, type=click.Path())
@_add(_common)
@_exit_codes
def calibrate(inputs, mode, seed):
    """Print the temperature that maximizes the pooled log-likelihood."""
    dataset, _ = _load_members(inputs)
    fit = find_temperature(dataset, mode=mode)
    if fit.boundary:
        click.echo("warning: optimum at search boundary", err=True)
    click.echo(format(fit.temperature, ".17g"))


@main.command()
@click.argument("inputs", nargs=-1, required=True, type=click.Path())
@_add(_common)
@click.option("--temperature", "-T", type=float, default=1.0, show_default=True)
@click.option("--output", "-o", type=click.Path(), required=True)
@_exit_codes
def pool(inputs, mode, seed, temperature, output):
    """Pool members and write log-probabilities as a single-member container."""
    dataset, _ = _load_members(inputs)
    probs = pool_members(dataset.logits, temperature, mode=mode)
    log_probs = np.log(np.clip(probs, PROB_FLOOR, 1.0)).astype(np.float32)
    pooled = EvalDataset(LogitTensor(log_probs[np.newaxis]), dataset.labels)
    write_container(pooled, output)


@main.command()
@click.option("--samples", "-n", type=int, required=True)
@click.option("--classes", "-C", "classes", type=int, required=True)
@click.option("--members", "-S", type=int, required=True)
@click.option("--signal", type=float, default=3.0, show_default=True)
@click.option("--base-noise", type=float, default=1.0, show_default=True)
@click.option("--member-noise", type=float, default=1.0, show_default=True)
@click.option("--correlation", type=float, default=0.0, show_default=True)
@click.option("--distortion", type=float, default=1.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--outdir", type=click.Path(), required=True)
@_exit_codes
def synth(samples, classes, members, signal, base_noise, member_noise, correlation,
          distortion, seed, outdir):
    """Generate a synthetic zoo as one container per member plus a manifest."""
    config = ZooConfig(
        samples=samples, classes=classes, members=members, signal=signal,
        base_noise=base_noise, member_noise=member_noise, correlation=correlation,
        distortion=distortion, seed=seed,
    )
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    pool_datasets, _ = generate_zoo(config)
    files = []
    for i, ds in enumerate(pool_datasets):
        name = f"member_{i:03d}.uqeb"
        write_container(ds, out / name)
        files.append({"file": name, "sha256": _digest(str(out / name))})
    manifest = {
        "tool": "uqeval",
        "tool_version": __version__,
        "config": {
            "samples": samples, "classes": classes, "members": members,
            "signal": signal, "base_noise": base_noise, "member_noise": member_noise,
            "correlation": correlation, "distortion": distortion, "seed": seed,
        },
        "files": files,
    }
    from .report import _canonical

    (out / "manifest.json").write_bytes((_canonical(manifest) + "\n").encode())
    click.echo(f"wrote {len(files)} member files and manifest to {out}")


@main.command()
@click.option("--baseline-dir", type=click.Path(), required=True,
              help="directory of single-member .uqeb files for the reference pool")
@click.option("--method-dir", type=click.Path(), required=True,
              help="directory of single-member .uqeb files for the method pool")
@_add(_common)
@click.option("--max-size", "-L", type=int, default=None,
              help="largest baseline size (default: reference pool size)")
@click.option("--resamples", "-R", type=int, default=20, show_default=True)
@click.option("--repeats", type=int, default=5, show_default=True)
@click.option("--metric", type=click.Choice(METRIC_IDS), default="ll", show_default=True)
@click.option("--bins", "-M", type=int, default=15, show_default=True)
@click.option("--tace-threshold", type=float, default=1e-3, show_default=True)
@click.option("--k-grid", default=None, help="comma-separated member counts to score")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
@click.option("--output", "-o", type=click.Path(), default=None)
@_exit_codes
def dee(baseline_dir, method_dir, mode, seed, max_size, resamples, repeats, metric,
        bins, tace_threshold, k_grid, fmt, output):
    """Equivalent-ensemble-size curve of a method pool against a reference pool."""
    base_pool, base_digests = _load_pool_dir(baseline_dir)
    method_pool, method_digests = _load_pool_dir(method_dir)
    if not np.array_equal(base_pool[0].labels, method_pool[0].labels):
        raise ValidationError("label mismatch between baseline and method pools")
    max_size = max_size or len(base_pool)
    binning = BinningConfig(bin_count=bins, threshold=tace_threshold)

    baseline = build_de_baseline(
        base_pool, max_size, resamples=resamples, seed=seed, mode=mode,
        repeats=repeats, metric=metric, binning=binning,
    )
    if k_grid is not None:
        grid = [int(k) for k in str(k_grid).split(",") if k.strip()]
    else:
        grid = list(range(1, min(max_size, len(method_pool)) + 1))
    scores = dee_curve(
        method_pool, baseline, grid, resamples=resamples, seed=seed, mode=mode,
        repeats=repeats, binning=binning,
    )

    shared = {"metric": metric, "resamples": resamples, "repeats": repeats}
    entries = [
        MetricEntry("de_baseline", baseline.mean[i], std=baseline.std[i],
                    params={"size": size, **shared})
        for i, size in enumerate(baseline.sizes)
    ]
    for score in scores:
        entries.append(
            MetricEntry(
                "dee", score.value,
                params={
                    "k": score.k, "lower": score.lower, "upper": score.upper,
                    "saturated": score.saturated,
                    "lower_saturated": score.lower_saturated,
                    "upper_saturated": score.upper_saturated,
                    "method_mean": score.method_mean, **shared,
                },
            )
        )
    report = MetricReport(
        tool_version=__version__, pool_mode=mode, seed=seed, entries=tuple(entries),
        input_digests=base_digests + method_digests,
    )
    _write_output(emit_report(report, fmt), output)


if __name__ == "__main__":
    main()
