"""UQEB binary container and CSV reader/writer for evaluation datasets.

UQEB layout, little-endian throughout:

    bytes 0-3    magic "UQEB"
    bytes 4-5    format version, u16 (currently 1)
    bytes 6-7    dtype code, u16 (1 = float32)
    bytes 8-15   member count S, u64
    bytes 16-23  sample count n, u64
    bytes 24-31  class count C, u64
    then         n   x u32 labels
    then         S*n*C x f32 logits, member-major

Writes are deterministic: the same dataset always produces identical bytes,
and read(write(d)) == d bit-for-bit.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .types import EvalDataset, LogitTensor, ValidationError

MAGIC = b"UQEB"
FORMAT_VERSION = 1
DTYPE_F32 = 1
HEADER = struct.Struct("<4sHHQQQ")
HEADER_SIZE = HEADER.size  # 32 bytes

# Refuse headers whose declared payload exceeds this (guards against
# allocating huge buffers for garbage headers).
MAX_ELEMENTS = 1 << 40


class ContainerError(ValueError):
    """Base class for container parse failures; `offset` is a byte position."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message if offset is None else f"{message} (byte offset {offset})")
        self.offset = offset


class BadMagicError(ContainerError):
    pass


class VersionMismatchError(ContainerError):
    pass


class UnsupportedDtypeError(ContainerError):
    pass


class TruncatedPayloadError(ContainerError):
    pass


class TrailingDataError(ContainerError):
    pass


class CsvFormatError(ValueError):
    pass


def write_container(dataset: EvalDataset, path: str | Path) -> None:
    """Write a dataset to `path` in the UQEB format."""
    logits = dataset.logits
    header = HEADER.pack(
        MAGIC, FORMAT_VERSION, DTYPE_F32, logits.members, logits.samples, logits.classes
    )
    labels = np.ascontiguousarray(dataset.labels, dtype="<u4")
    values = np.ascontiguousarray(logits.values, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(labels.tobytes())
        fh.write(values.tobytes())


def read_container(path: str | Path) -> EvalDataset:
    """Read and validate a UQEB file; raises a distinct error per defect."""
    data = Path(path).read_bytes()
    return parse_container(data)


def parse_container(data: bytes) -> EvalDataset:
    if len(data) < HEADER_SIZE:
        raise TruncatedPayloadError(
            f"file too short for header: {len(data)} < {HEADER_SIZE} bytes", offset=len(data)
        )
    magic, version, dtype, members, samples, classes = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
    if version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"unsupported format version {version}, expected {FORMAT_VERSION}", offset=4
        )
    if dtype != DTYPE_F32:
        raise UnsupportedDtypeError(f"unsupported dtype code {dtype}", offset=6)
    if members < 1 or samples < 1:
        raise ValidationError(f"header declares empty tensor S={members}, n={samples}")
    if classes < 2:
        raise ValidationError(f"header declares {classes} classes; need at least 2")
    n_values = members * samples * classes
    if n_values > MAX_ELEMENTS:
        raise ValidationError(f"header declares {n_values} values; refusing to allocate")

    labels_end = HEADER_SIZE + 4 * samples
    values_end = labels_end + 4 * n_values
    if len(data) < values_end:
        raise TruncatedPayloadError(
            f"payload ends at byte {len(data)} but header requires {values_end} bytes",
            offset=len(data),
        )
    if len(data) > values_end:
        raise TrailingDataError(
            f"{len(data) - values_end} unexpected bytes after payload", offset=values_end
        )

    labels = np.frombuffer(data, dtype="<u4", count=samples, offset=HEADER_SIZE)
    raw_values = np.frombuffer(data, dtype="<f4", count=n_values, offset=labels_end)

    bad_labels = np.flatnonzero(labels.astype(np.int64) >= classes)
    if bad_labels.size:
        i = int(bad_labels[0])
        raise ValidationError(
            f"label {int(labels[i])} at index {i} out of range [0, {classes}) "
            f"(byte offset {HEADER_SIZE + 4 * i})"
        )
    bad_values = np.flatnonzero(~np.isfinite(raw_values))
    if bad_values.size:
        i = int(bad_values[0])
        raise ValidationError(
            f"non-finite logit at flat index {i} (byte offset {labels_end + 4 * i})"
        )

    values = raw_values.astype(np.float32).reshape(members, samples, classes).copy()
    return EvalDataset(LogitTensor(values), labels.astype(np.uint32))


def read_csv(path: str | Path) -> EvalDataset:
    """Parse a single-member dataset from CSV.

    Expected header: ``logit_0,...,logit_{C-1},label``.
    """
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError("empty CSV file") from None
        header = [h.strip() for h in header]
        if not header or header[-1] != "label":
            raise CsvFormatError("last CSV column must be 'label'")
        logit_cols = header[:-1]
        expected = [f"logit_{i}" for i in range(len(logit_cols))]
        if logit_cols != expected:
            raise CsvFormatError(
                f"logit columns must be logit_0..logit_{{C-1}}; got {logit_cols}"
            )
        classes = len(logit_cols)
        if classes < 2:
            raise CsvFormatError("need at least 2 logit columns")

        rows: list[list[float]] = []
        labels: list[int] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != classes + 1:
                raise CsvFormatError(
                    f"row {lineno}: expected {classes + 1} cells, got {len(row)}"
                )
            try:
                rows.append([float(cell) for cell in row[:-1]])
            except ValueError:
                raise CsvFormatError(f"row {lineno}: non-numeric logit cell") from None
            try:
                label = int(row[-1])
            except ValueError:
                raise CsvFormatError(f"row {lineno}: non-integer label") from None
            if not 0 <= label < classes:
                raise CsvFormatError(
                    f"row {lineno}: label {label} out of range [0, {classes})"
                )
            labels.append(label)

    if not rows:
        raise CsvFormatError("CSV contains no data rows")
    values = np.asarray(rows, dtype=np.float32)[np.newaxis, :, :]
    return EvalDataset(LogitTensor(values), np.asarray(labels, dtype=np.uint32))


def write_csv(dataset: EvalDataset, path: str | Path) -> None:
    """Write a single-member dataset as CSV with 9-significant-digit logits.

    Nine digits round-trip float32 exactly, so CSV -> UQEB -> CSV is lossless.
    """
    if dataset.members != 1:
        raise ValidationError("CSV export is defined for single-member datasets only")
    classes = dataset.classes
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"logit_{i}" for i in range(classes)] + ["label"])
        member = dataset.logits.member(0)
        for row, label in zip(member, dataset.labels):
            writer.writerow([format(float(v), ".9g") for v in row] + [int(label)])
