"""Machine-readable metric reports.

Reports bundle metric values with every parameter that influenced them
(binning, thresholds, repeats, resamples, pooling mode, seed) plus input
digests, so any number can be reproduced from the report alone. JSON output
is canonical: keys sorted, floats at 17 significant digits (lossless for
float64), newline-terminated; identical reports serialize to identical
bytes. Field names are part of the compatibility contract (docs/report-schema.md).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .types import ValidationError

TOOL_NAME = "uqeval"

AUC_COMPARABILITY_CAVEAT = (
    "misclassification-detection AUC is model-specific: each model induces its "
    "own detection problem, so values are not comparable across models"
)


@dataclass(frozen=True)
class MetricEntry:
    name: str
    value: float
    std: float | None = None
    params: dict = field(default_factory=dict)
    caveats: tuple[str, ...] = ()


@dataclass(frozen=True)
class MetricReport:
    tool_version: str
    pool_mode: str
    seed: int
    entries: tuple[MetricEntry, ...] = ()
    input_digests: tuple[tuple[str, str], ...] = ()  # (filename, sha256) pairs
    temperatures: tuple[float, ...] = ()
    caveats: tuple[str, ...] = ()
    train_cost: float | None = None


def auc_entry(name: str, value: float, params: dict | None = None) -> MetricEntry:
    """Detection-AUC entry; always tagged with the comparability caveat."""
    return MetricEntry(
        name=name, value=value, params=dict(params or {}),
        caveats=(AUC_COMPARABILITY_CAVEAT,),
    )


def _check(report: MetricReport) -> None:
    for entry in report.entries:
        if entry.name.startswith("auc") and AUC_COMPARABILITY_CAVEAT not in entry.caveats:
            raise ValidationError(f"AUC entry {entry.name!r} is missing the comparability caveat")


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValidationError(f"reports must not contain non-finite values; got {x}")
    return format(float(x), ".17g")


def _canonical(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _fmt_float(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_canonical(v) for v in value) + "]"
    if isinstance(value, dict):
        items = sorted(value.items())
        return "{" + ",".join(f"{json.dumps(str(k))}:{_canonical(v)}" for k, v in items) + "}"
    raise ValidationError(f"cannot serialize value of type {type(value).__name__}")


def _to_plain(report: MetricReport) -> dict:
    return {
        "tool": TOOL_NAME,
        "tool_version": report.tool_version,
        "pool_mode": report.pool_mode,
        "seed": report.seed,
        "input_digests": [{"file": f, "sha256": d} for f, d in report.input_digests],
        "temperatures": list(report.temperatures),
        "caveats": list(report.caveats),
        "train_cost": report.train_cost,
        "metrics": [
            {
                "name": e.name,
                "value": e.value,
                "std": e.std,
                "params": dict(e.params),
                "caveats": list(e.caveats),
            }
            for e in report.entries
        ],
    }


def emit_report(report: MetricReport, fmt: str = "json") -> bytes:
    """Serialize a report to canonical JSON or one-metric-per-row CSV."""
    _check(report)
    if fmt == "json":
        return (_canonical(_to_plain(report)) + "\n").encode("utf-8")
    if fmt == "csv":
        lines = ["name,value,std,params,caveats"]
        for e in report.entries:
            params = ";".join(f"{k}={_scalar_str(v)}" for k, v in sorted(e.params.items()))
            caveats = "|".join(e.caveats)
            std = "" if e.std is None else _fmt_float(e.std)
            lines.append(
                ",".join([e.name, _fmt_float(e.value), std, _quote(params), _quote(caveats)])
            )
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise ValidationError(f"unknown report format {fmt!r}; expected 'json' or 'csv'")


def _scalar_str(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt_float(v)
    return str(v)


def _quote(cell: str) -> str:
    if any(ch in cell for ch in ',"\n'):
        return '"' + cell.replace('"', '""') + '"'
    return cell


def parse_report(data: bytes) -> MetricReport:
    """Inverse of emit_report for the JSON format."""
    plain = json.loads(data.decode("utf-8"))
    entries = tuple(
        MetricEntry(
            name=m["name"],
            value=m["value"],
            std=m["std"],
            params=m["params"],
            caveats=tuple(m["caveats"]),
        )
        for m in plain["metrics"]
    )
    return MetricReport(
        tool_version=plain["tool_version"],
        pool_mode=plain["pool_mode"],
        seed=plain["seed"],
        entries=entries,
        input_digests=tuple((d["file"], d["sha256"]) for d in plain["input_digests"]),
        temperatures=tuple(plain["temperatures"]),
        caveats=tuple(plain["caveats"]),
        train_cost=plain["train_cost"],
    )
