import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from uqeval.probs import (
    POOL_THEN_SCALE,
    SCALE_THEN_POOL,
    confidence_argmax,
    log_softmax_temp,
    pool_members,
    predictive_entropy,
    softmax_temp,
    validate_prob_matrix,
)
from uqeval.types import LogitTensor, ValidationError

from oracles import entropy_loop, softmax_longdouble

finite_logits = hnp.arrays(
    np.float64,
    hnp.array_shapes(min_dims=2, max_dims=2, min_side=2, max_side=6),
    elements=st.floats(-50, 50),
)


def test_uniform_logits_give_log_quarter():
    out = log_softmax_temp(np.zeros((3, 4)), 1.0)
    assert np.allclose(out, -math.log(4.0), atol=1e-12)


def test_equal_pair_any_temperature():
    for c in (-7.0, 0.0, 123.0):
        for t in (0.01, 1.0, 55.0):
            out = log_softmax_temp(np.array([[c, c]]), t)
            assert np.allclose(out, -math.log(2.0), atol=1e-12)


def test_two_zero_logits_at_t2_matches_extended_precision_oracle():
    probs = np.exp(log_softmax_temp(np.array([[2.0, 0.0]]), 2.0))
    expected = softmax_longdouble([[2.0, 0.0]], 2.0)
    assert np.allclose(probs, expected, atol=1e-12)
    assert np.allclose(probs, [[0.7310586, 0.2689414]], atol=1e-7)


def test_large_logits_do_not_overflow():
    out = log_softmax_temp(np.array([[1e4, -1e4, 0.0]]), 1.0)
    assert np.isfinite(out[0][0])
    assert abs(np.exp(out).sum() - 1.0) < 1e-12


def test_rows_exponentiate_to_one():
    z = np.array([[3.0, -1.0, 0.5], [100.0, 99.0, 98.0]])
    for t in (0.5, 1.0, 10.0):
        assert np.abs(np.exp(log_softmax_temp(z, t)).sum(axis=1) - 1.0).max() < 1e-12


def test_non_positive_temperature_rejected():
    with pytest.raises(ValidationError):
        log_softmax_temp(np.zeros((1, 2)), 0.0)
    with pytest.raises(ValidationError):
        softmax_temp(np.zeros((1, 2)), -1.0)


@settings(max_examples=50, deadline=None)
@given(finite_logits, st.floats(-30, 30))
def test_shift_invariance(z, shift):
    base = log_softmax_temp(z, 1.7)
    shifted = log_softmax_temp(z + shift, 1.7)
    assert np.abs(base - shifted).max() < 1e-12


@settings(max_examples=50, deadline=None)
@given(finite_logits, st.floats(0.02, 50), st.floats(0.02, 50))
def test_argmax_temperature_invariance_single_member(z, t1, t2):
    _, p1 = confidence_argmax(softmax_temp(z, t1))
    _, p2 = confidence_argmax(softmax_temp(z, t2))
    assert np.array_equal(p1, p2)


def test_identical_members_pool_to_single_softmax(rng):
    z = rng.normal((5, 4))
    tensor = LogitTensor(np.stack([z, z, z]).astype(np.float32))
    pooled = pool_members(tensor, 1.3, SCALE_THEN_POOL)
    single = softmax_temp(tensor.member(0), 1.3)
    assert np.allclose(pooled, single, atol=1e-15)


def test_two_onehot_members_average_to_half():
    # members whose T=1 softmax is (almost) one-hot on opposite classes
    a = np.array([[40.0, 0.0]])
    b = np.array([[0.0, 40.0]])
    tensor = LogitTensor(np.stack([a, b]).astype(np.float32))
    pooled = pool_members(tensor, 1.0, SCALE_THEN_POOL)
    assert np.allclose(pooled, [[0.5, 0.5]], atol=1e-12)


def test_three_member_mean_matches_oracle():
    rows = [[0.2, 0.8], [0.5, 0.5], [0.8, 0.2]]
    logits = np.log(np.asarray(rows))[:, None, :]
    tensor = LogitTensor(logits.astype(np.float32))
    pooled = pool_members(tensor, 1.0, SCALE_THEN_POOL)
    expected = np.mean(
        [softmax_longdouble(np.log([row]), 1.0) for row in rows], axis=0
    )
    assert np.allclose(pooled, expected, atol=1e-7)
    assert np.allclose(pooled, [[0.5, 0.5]], atol=1e-7)


def test_single_member_same_in_both_modes(rng):
    z = rng.normal((7, 5))
    tensor = LogitTensor(z[None].astype(np.float32))
    for t in (0.3, 1.0, 4.2):
        a = pool_members(tensor, t, SCALE_THEN_POOL)
        b = pool_members(tensor, t, POOL_THEN_SCALE)
        assert np.allclose(a, b, atol=1e-12)


def test_pool_rows_sum_to_one(rng):
    tensor = LogitTensor((3.0 * rng.normal((4, 20, 6))).astype(np.float32))
    for mode in (SCALE_THEN_POOL, POOL_THEN_SCALE):
        pooled = pool_members(tensor, 2.5, mode)
        validate_prob_matrix(pooled)


def test_unknown_mode_rejected(rng):
    tensor = LogitTensor(rng.normal((1, 3, 2)).astype(np.float32))
    with pytest.raises(ValidationError):
        pool_members(tensor, 1.0, "other")


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_high_temperature_flattens_toward_uniform(seed):
    # Single members flatten monotonically over the whole range; pooled
    # ensembles with disagreeing members are only monotone once T dominates
    # the logit spread (members can cancel non-monotonically at small T).
    from uqeval.rng import CounterRng

    stream = CounterRng(seed)
    single = LogitTensor((4.0 * stream.normal((1, 6, 5))).astype(np.float32))
    pooled_tensor = LogitTensor((4.0 * stream.normal((3, 6, 5))).astype(np.float32))
    c = single.classes

    single_devs = [
        np.abs(pool_members(single, t, SCALE_THEN_POOL) - 1.0 / c).max()
        for t in (0.1, 0.5, 1.0, 3.0, 10.0, 30.0, 100.0)
    ]
    for a, b in zip(single_devs, single_devs[1:]):
        assert b <= a + 1e-12

    pooled_devs = [
        np.abs(pool_members(pooled_tensor, t, SCALE_THEN_POOL) - 1.0 / c).max()
        for t in (10.0, 30.0, 100.0)
    ]
    for a, b in zip(pooled_devs, pooled_devs[1:]):
        assert b <= a + 1e-12
    assert pooled_devs[-1] < 0.05


def test_entropy_uniform_and_onehot():
    assert abs(predictive_entropy(np.full((1, 4), 0.25))[0] - math.log(4)) < 1e-12
    assert predictive_entropy(np.array([[0.0, 1.0, 0.0]]))[0] == 0.0
    assert abs(predictive_entropy(np.array([[0.5, 0.5]]))[0] - math.log(2)) < 1e-12


def test_entropy_matches_loop_oracle(rng):
    probs = softmax_temp(rng.normal((10, 6)), 1.0)
    ours = predictive_entropy(probs)
    for i, row in enumerate(probs):
        assert abs(ours[i] - entropy_loop(row)) < 1e-12
    assert (ours >= 0).all() and (ours <= math.log(6) + 1e-12).all()


def test_confidence_argmax_cases():
    conf, pred = confidence_argmax(np.array([[0.0, 0.0, 0.0, 1.0]]))
    assert conf[0] == 1.0 and pred[0] == 3
    conf, pred = confidence_argmax(np.array([[0.5, 0.5]]))
    assert conf[0] == 0.5 and pred[0] == 0  # lowest-index tie-break
    conf, pred = confidence_argmax(np.array([[0.2, 0.5, 0.3]]))
    assert conf[0] == 0.5 and pred[0] == 1


def test_validate_prob_matrix_rejects_bad_rows():
    with pytest.raises(ValidationError):
        validate_prob_matrix(np.array([[0.9, 0.2]]))
    with pytest.raises(ValidationError):
        validate_prob_matrix(np.array([[1.2, -0.2]]))
