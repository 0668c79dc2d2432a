"""Uncertainty evaluation for classifiers, straight from their logits."""

__version__ = "0.1.0"

from .calibration import (
    CalibratedResult,
    TemperatureFit,
    TempSearchConfig,
    calibrated_metric,
    calibrated_metrics,
    find_temperature,
)
from .containers import read_container, read_csv, write_container, write_csv
from .dee import DeBaseline, DeeScore, build_de_baseline, dee_curve, dee_lookup
from .metrics import (
    BinningConfig,
    accuracy_rejection,
    brier_score,
    classification_error,
    ece,
    log_likelihood,
    misclassification_auc,
    tace,
)
from .probs import (
    confidence_argmax,
    log_softmax_temp,
    pool_members,
    predictive_entropy,
    softmax_temp,
)
from .rng import CounterRng
from .synth import ZooConfig, generate_zoo
from .types import EvalDataset, LogitTensor, ValidationError, stack_members

__all__ = [
    "BinningConfig",
    "CalibratedResult",
    "CounterRng",
    "DeBaseline",
    "DeeScore",
    "EvalDataset",
    "LogitTensor",
    "TempSearchConfig",
    "TemperatureFit",
    "ValidationError",
    "ZooConfig",
    "accuracy_rejection",
    "brier_score",
    "build_de_baseline",
    "calibrated_metric",
    "calibrated_metrics",
    "classification_error",
    "confidence_argmax",
    "dee_curve",
    "dee_lookup",
    "ece",
    "find_temperature",
    "generate_zoo",
    "log_likelihood",
    "log_softmax_temp",
    "misclassification_auc",
    "pool_members",
    "predictive_entropy",
    "read_container",
    "read_csv",
    "softmax_temp",
    "stack_members",
    "tace",
    "write_container",
    "write_csv",
]
