"""Core data types: logit tensors, label vectors, and evaluation datasets.

Storage conventions: logits are 32-bit floats (what inference frameworks
emit), labels are unsigned 32-bit class indices. All downstream computation
upcasts to 64-bit floats; the 32-bit storage is what round-trips bit-exactly
through the UQEB container.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ValidationError(ValueError):
    """A dataset or parameter violates a structural invariant."""


def _as_logit_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float32)
    if arr.ndim != 3:
        raise ValidationError(
            f"logits must have shape (members, samples, classes); got {arr.shape}"
        )
    return arr


@dataclass(frozen=True)
class LogitTensor:
    """Dense raw logits, member-major: shape (members, samples, classes)."""

    values: np.ndarray

    def __post_init__(self):
        arr = _as_logit_array(self.values)
        s, n, c = arr.shape
        if s < 1 or n < 1:
            raise ValidationError(f"need at least one member and one sample; got {arr.shape}")
        if c < 2:
            raise ValidationError(f"need at least 2 classes; got {c}")
        if not np.isfinite(arr).all():
            bad = int(np.flatnonzero(~np.isfinite(arr.reshape(-1)))[0])
            raise ValidationError(f"non-finite logit at flat index {bad}")
        if arr.base is not None or arr is self.values:
            arr = arr.copy()  # own the buffer; datasets are immutable after load
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def members(self) -> int:
        return self.values.shape[0]

    @property
    def samples(self) -> int:
        return self.values.shape[1]

    @property
    def classes(self) -> int:
        return self.values.shape[2]

    def member(self, k: int) -> np.ndarray:
        """Single member's (samples, classes) slice."""
        return self.values[k]


def validate_labels(labels: np.ndarray, samples: int, classes: int) -> np.ndarray:
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise ValidationError(f"labels must be one-dimensional; got shape {arr.shape}")
    if arr.shape[0] != samples:
        raise ValidationError(
            f"label count {arr.shape[0]} does not match sample count {samples}"
        )
    if arr.size and (not np.issubdtype(arr.dtype, np.integer)):
        if not np.array_equal(arr, arr.astype(np.int64)):
            raise ValidationError("labels must be integers")
    work = arr.astype(np.int64)
    if work.size and (work.min() < 0 or work.max() >= classes):
        bad = int(np.flatnonzero((work < 0) | (work >= classes))[0])
        raise ValidationError(
            f"label {int(work[bad])} at index {bad} out of range [0, {classes})"
        )
    return arr.astype(np.uint32)


@dataclass(frozen=True)
class EvalDataset:
    """A logit tensor paired with ground-truth labels (one per sample)."""

    logits: LogitTensor
    labels: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = validate_labels(self.labels, self.logits.samples, self.logits.classes)
        if labels.base is not None or labels is self.labels:
            labels = labels.copy()
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    @property
    def members(self) -> int:
        return self.logits.members

    @property
    def samples(self) -> int:
        return self.logits.samples

    @property
    def classes(self) -> int:
        return self.logits.classes

    def take_samples(self, indices: np.ndarray) -> "EvalDataset":
        """Dataset restricted to the given sample indices (in the given order)."""
        idx = np.asarray(indices, dtype=np.int64)
        return EvalDataset(LogitTensor(self.logits.values[:, idx, :]), self.labels[idx])

    def member_dataset(self, k: int) -> "EvalDataset":
        """Single-member view of member k."""
        return EvalDataset(LogitTensor(self.logits.values[k : k + 1]), self.labels)


def stack_members(datasets: list[EvalDataset] | tuple[EvalDataset, ...]) -> EvalDataset:
    """Combine datasets over the member axis; labels and shapes must agree."""
    if not datasets:
        raise ValidationError("need at least one dataset to stack")
    first = datasets[0]
    for i, ds in enumerate(datasets[1:], start=1):
        if ds.samples != first.samples or ds.classes != first.classes:
            raise ValidationError(
                f"dataset {i} shape ({ds.samples}, {ds.classes}) does not match "
                f"({first.samples}, {first.classes})"
            )
        if not np.array_equal(ds.labels, first.labels):
            raise ValidationError(f"dataset {i} labels do not match dataset 0")
    values = np.concatenate([ds.logits.values for ds in datasets], axis=0)
    return EvalDataset(LogitTensor(values), first.labels)
