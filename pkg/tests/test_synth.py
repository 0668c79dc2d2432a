import numpy as np
import pytest

from uqeval.calibration import calibrated_metric, find_temperature
from uqeval.metrics import log_likelihood
from uqeval.probs import pool_members
from uqeval.synth import ZooConfig, generate_zoo
from uqeval.types import ValidationError


def test_zero_member_noise_gives_identical_members():
    pool, truth = generate_zoo(ZooConfig(samples=50, classes=3, members=4, member_noise=0.0))
    ref = pool[0].logits.values
    for ds in pool[1:]:
        assert np.array_equal(ds.logits.values, ref)
    assert np.array_equal(ref[0], truth.values[0])  # distortion 1, no noise


def test_full_correlation_gives_identical_members():
    pool, _ = generate_zoo(ZooConfig(samples=50, classes=3, members=4, correlation=1.0))
    ref = pool[0].logits.values
    for ds in pool[1:]:
        assert np.array_equal(ds.logits.values, ref)


def test_determinism():
    cfg = ZooConfig(samples=40, classes=5, members=3, seed=77)
    pool_a, truth_a = generate_zoo(cfg)
    pool_b, truth_b = generate_zoo(cfg)
    assert np.array_equal(truth_a.values, truth_b.values)
    for a, b in zip(pool_a, pool_b):
        assert np.array_equal(a.logits.values, b.logits.values)
        assert np.array_equal(a.labels, b.labels)


def test_labels_shared_across_members_and_config_prefix():
    # configs differing only in member noise structure share truth and labels
    a, truth_a = generate_zoo(ZooConfig(samples=60, classes=4, members=2, correlation=0.0, seed=3))
    b, truth_b = generate_zoo(ZooConfig(samples=60, classes=4, members=2, correlation=0.9, seed=3))
    assert np.array_equal(a[0].labels, b[0].labels)
    assert np.array_equal(truth_a.values, truth_b.values)


def test_pooled_temperature_near_one():
    pool, _ = generate_zoo(
        ZooConfig(samples=10000, classes=10, members=1, member_noise=0.0, seed=4)
    )
    fit = find_temperature(pool[0])
    assert abs(fit.temperature - 1.0) < 0.05


def test_member_perturbation_correlation_matches_config():
    rho = 0.6
    cfg = ZooConfig(samples=10000, classes=10, members=2, correlation=rho,
                    member_noise=1.0, seed=21)
    pool, truth = generate_zoo(cfg)
    t = truth.values[0].astype(np.float64)
    pert = [
        ds.logits.values[0].astype(np.float64) / cfg.distortion - t for ds in pool
    ]
    flat = [p.reshape(-1) for p in pert]
    corr = np.corrcoef(flat[0], flat[1])[0, 1]
    assert abs(corr - rho) < 0.05


def test_overconfident_members_gain_from_calibration():
    pool, _ = generate_zoo(
        ZooConfig(samples=10000, classes=10, members=2, distortion=5.0, seed=6)
    )
    for ds in pool:
        raw = log_likelihood(pool_members(ds.logits, 1.0), ds.labels)
        cal = calibrated_metric(ds, "ll", repeats=2, seed=0)
        assert cal.mean > raw


def test_config_validation():
    with pytest.raises(ValidationError):
        ZooConfig(samples=0, classes=3, members=1)
    with pytest.raises(ValidationError):
        ZooConfig(samples=5, classes=1, members=1)
    with pytest.raises(ValidationError):
        ZooConfig(samples=5, classes=3, members=1, correlation=1.5)
    with pytest.raises(ValidationError):
        ZooConfig(samples=5, classes=3, members=1, distortion=0.0)
    with pytest.raises(ValidationError):
        ZooConfig(samples=5, classes=3, members=1, signal=-1.0)


def test_pool_structure():
    pool, truth = generate_zoo(ZooConfig(samples=30, classes=4, members=5, seed=1))
    assert len(pool) == 5
    assert all(ds.members == 1 for ds in pool)
    assert truth.members == 1 and truth.samples == 30 and truth.classes == 4
