import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from uqeval.rng import CounterRng
from uqeval.types import EvalDataset, LogitTensor


@pytest.fixture
def rng():
    return CounterRng(2024)


def random_dataset(stream: CounterRng, members=1, samples=8, classes=3, scale=2.0):
    values = scale * stream.normal((members, samples, classes))
    labels = stream.integers(classes, samples)
    return EvalDataset(LogitTensor(values.astype(np.float32)), labels.astype(np.uint32))


def probs_from_rows(rows):
    return np.asarray(rows, dtype=np.float64)
