import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from ddsc.schedule import (ScheduleConfig, batch_weighted_loss, fuse_scores, lambda_at, scores_to_weights,
                           weight_entropy)

import oracles


def test_lambda_endpoints():
    assert lambda_at(40, 40, 0.2) == 0.2
    assert lambda_at(1, 2, 0.2) == pytest.approx(0.6, abs=1e-15)
    assert oracles.cosine_lambda(0, 10, 0.2) == 1.0
    with pytest.raises(ValueError):
        lambda_at(0, 10)
    with pytest.raises(ValueError):
        lambda_at(11, 10)


@given(st.integers(1, 300), st.floats(0, 0.999))
def test_lambda_monotone(T, lam_min):
    vals = [lambda_at(e, T, lam_min) for e in range(1, T + 1)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert vals[-1] == lam_min
    assert all(lam_min <= v <= 1.0 for v in vals)
    assert vals == pytest.approx([oracles.cosine_lambda(e, T, lam_min) for e in range(1, T + 1)], abs=1e-15)


def test_default_lambda_min():
    assert ScheduleConfig().lambda_min == 0.2


@pytest.mark.parametrize("kw", [dict(lambda_min=1.0), dict(lambda_min=-0.1), dict(tau=0), dict(beta=1.0),
                                dict(gamma=0.0), dict(eta_H=0.0), dict(epsilon=0.0), dict(T=0)])
def test_config_rejects(kw):
    with pytest.raises(ValueError):
        ScheduleConfig(**kw)


def test_fuse_examples():
    H = np.array([0.1, 0.5, 0.9])
    D = np.array([0.7, 1.0, 0.0])
    assert np.array_equal(fuse_scores(H, D, 1.0), H)
    assert np.array_equal(fuse_scores(H, D, 0.0), D)
    assert fuse_scores([0.5], [1.0], 0.6)[0] == pytest.approx(0.7, abs=1e-15)
    with pytest.raises(ValueError, match="length mismatch"):
        fuse_scores(H, D[:2], 0.5)


@given(arrays(np.float64, 5, elements=st.floats(0, 1)), arrays(np.float64, 5, elements=st.floats(0, 1)),
       st.floats(0, 1))
def test_fuse_stays_in_unit_interval(H, D, lam):
    s = fuse_scores(H, D, lam)
    assert ((s >= 0) & (s <= 1 + 1e-15)).all()


def test_weights_examples():
    np.testing.assert_array_equal(scores_to_weights(np.full(4, 0.3)), np.full(4, 0.25))
    np.testing.assert_allclose(scores_to_weights([1.0, 0.0]), oracles.softmax([1.0, 0.0]), atol=1e-15)
    with pytest.raises(ValueError, match="non-finite"):
        scores_to_weights([0.0, np.inf])


@given(st.lists(st.integers(-2**20, 2**20), min_size=1, max_size=40), st.integers(-1000, 1000))
def test_weights_shift_invariant_bitwise(ticks, c):
    # dyadic scores and integer shifts: every addition is exact in binary64
    s = np.array(ticks, dtype=float) / 2**20
    assert np.array_equal(scores_to_weights(s), scores_to_weights(s + c))


@given(arrays(np.float64, st.integers(1, 50), elements=st.floats(-5, 5)), st.floats(-100, 100))
def test_weights_simplex_and_order(s, c):
    w = scores_to_weights(s)
    assert abs(w.sum() - 1) <= 1e-9 and (w > 0).all()
    for i in range(s.size):
        for j in range(s.size):
            if s[i] > s[j]:
                assert w[i] >= w[j]
    np.testing.assert_allclose(scores_to_weights(s + c), w, rtol=1e-12, atol=0)


def test_weights_strict_order(rng):
    s = rng.uniform(0, 1, size=100)
    w = scores_to_weights(s)
    assert np.array_equal(np.argsort(s, kind="stable"), np.argsort(w, kind="stable"))


def test_batch_loss_examples():
    L = np.array([1.0, 2.0, 3.0, 4.0])
    pi = np.array([0.1, 0.2, 0.3, 0.4])
    assert batch_weighted_loss(pi, np.arange(4), L) == pytest.approx(float(np.dot(pi, L)), abs=1e-15)
    assert batch_weighted_loss(np.full(4, 0.25), [1, 3], L[[1, 3]]) == pytest.approx(3.0, abs=1e-15)
    assert batch_weighted_loss(np.array([0.8, 0.2]), [0], [5.0]) == 5.0
    with pytest.raises(ValueError, match="zero"):
        batch_weighted_loss(np.zeros(2), [0], [1.0])


def test_batch_partition_recovers_full_loss(rng):
    for _ in range(30):
        n = int(rng.integers(2, 30))
        pi = rng.dirichlet(np.ones(n))
        L = rng.uniform(0, 5, size=n)
        order = rng.permutation(n)
        cuts = np.sort(rng.choice(np.arange(1, n), size=min(3, n - 1), replace=False))
        total = 0.0
        for b in np.split(order, cuts):
            total += pi[b].sum() * batch_weighted_loss(pi, b, L[b])
        full = sum(p * l for p, l in zip(pi, L))
        assert total == pytest.approx(full, abs=1e-12)


def test_weight_entropy():
    assert weight_entropy(np.full(10, 0.1)) == pytest.approx(1.0, abs=1e-15)
    assert weight_entropy(np.array([1.0, 0, 0])) == 0.0
    assert weight_entropy(np.array([1.0])) == 1.0
