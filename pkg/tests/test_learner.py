"""Regressor contracts: loss, gradients, training dynamics, persistence."""

import json
import math

import numpy as np
import pytest

from rotbox.encoding import OffsetVector
from rotbox.errors import InvalidArgumentError, ShapeError, TrainingDivergedError
from rotbox.learner import (
    LinearRegressor,
    TrainConfig,
    load_model,
    predict,
    save_model,
    smooth_l1,
    synthesize_training_set,
    train,
)
from rotbox.roi_align import PooledFeature

from oracles import central_difference


def vec(*vals):
    return OffsetVector(*vals)


def test_smooth_l1_zero_at_match():
    v = vec(0.1, -0.2, 0.3, 0.0, 0.9)
    loss, grad = smooth_l1(v, v, beta=1.0)
    assert loss == 0.0
    assert np.all(grad == 0.0)


def test_smooth_l1_hand_value_beyond_kink():
    beta = 0.7
    loss, grad = smooth_l1(vec(2 * beta, 0, 0, 0, 0), vec(0, 0, 0, 0, 0), beta=beta)
    assert loss == pytest.approx(1.5 * beta, abs=1e-12)
    assert grad == pytest.approx([1, 0, 0, 0, 0], abs=1e-12)


def test_smooth_l1_quadratic_region():
    beta = 2.0
    loss, grad = smooth_l1(vec(0.5, 0, 0, 0, 0), vec(0, 0, 0, 0, 0), beta=beta)
    assert loss == pytest.approx(0.5 * 0.25 / beta, abs=1e-12)
    assert grad[0] == pytest.approx(0.5 / beta, abs=1e-12)


def test_smooth_l1_beta_validation():
    with pytest.raises(InvalidArgumentError):
        smooth_l1(vec(0, 0, 0, 0, 0), vec(0, 0, 0, 0, 0), beta=0.0)


def test_smooth_l1_gradient_matches_finite_differences():
    rng = np.random.default_rng(60)
    beta = 1.0
    checked = 0
    while checked < 100:
        p = rng.uniform(-3, 3, 5)
        t = rng.uniform(-3, 3, 5)
        if np.any(np.abs(np.abs(p - t) - beta) < 1e-3):
            continue  # keep away from the kink where FD is meaningless
        _, grad = smooth_l1(vec(*p), vec(*t), beta=beta)
        for e in range(5):
            def f(x, e=e, p=p, t=t):
                q = p.copy()
                q[e] = x
                return smooth_l1(vec(*q), vec(*t), beta=beta)[0]

            fd = central_difference(f, p[e])
            assert grad[e] == pytest.approx(fd, abs=1e-5)
        checked += 1


# ------------------------------------------------------------------ predict


def test_predict_zero_model():
    model = LinearRegressor(np.zeros((8, 5)), np.zeros(5))
    pooled = PooledFeature(np.random.default_rng(61).normal(size=(2, 2, 2)))
    assert predict(model, pooled).astuple() == (0.0, 0.0, 0.0, 0.0, 0.0)


def test_predict_one_hot_reads_out_weight():
    w = np.zeros((8, 5))
    w[3, 2] = 4.5
    model = LinearRegressor(w, np.zeros(5))
    feature = np.zeros(8)
    feature[3] = 1.0
    assert predict(model, feature).tw == 4.5


def test_predict_matches_dot_product_oracle():
    rng = np.random.default_rng(62)
    for _ in range(20):
        w = rng.normal(size=(12, 5))
        b = rng.normal(size=5)
        f = rng.normal(size=12)
        got = np.asarray(predict(LinearRegressor(w, b), f).astuple())
        want = np.array([sum(w[p, q] * f[p] for p in range(12)) + b[q] for q in range(5)])
        assert np.abs(got - want).max() < 1e-12


def test_predict_dimension_mismatch():
    model = LinearRegressor(np.zeros((8, 5)), np.zeros(5))
    with pytest.raises(ShapeError):
        predict(model, np.zeros(9))
    with pytest.raises(ShapeError):
        predict(model, PooledFeature(np.zeros((2, 2, 1))))  # flattens to 4


def test_model_validation():
    with pytest.raises(ShapeError):
        LinearRegressor(np.zeros((8, 4)), np.zeros(5))
    with pytest.raises(ShapeError):
        LinearRegressor(np.zeros((8, 5)), np.zeros(4))
    bad = np.zeros((8, 5))
    bad[0, 0] = math.nan
    with pytest.raises(InvalidArgumentError):
        LinearRegressor(bad, np.zeros(5))


def test_train_config_validation():
    TrainConfig(learning_rate=0.0)  # allowed: no-op probe
    with pytest.raises(InvalidArgumentError):
        TrainConfig(learning_rate=-0.1)
    with pytest.raises(InvalidArgumentError):
        TrainConfig(epochs=0)
    with pytest.raises(InvalidArgumentError):
        TrainConfig(batch_size=-1)
    with pytest.raises(InvalidArgumentError):
        TrainConfig(smooth_l1_beta=0.0)


# -------------------------------------------------------------------- train


@pytest.fixture(scope="module")
def small_set():
    return synthesize_training_set(60, seed=5)


def test_train_converges_on_realizable_targets(small_set):
    result = train(small_set.pairs(), TrainConfig(learning_rate=0.05, epochs=500))
    assert result.loss_trace[-1] < 1e-3
    assert len(result.loss_trace) == 500


def test_train_zero_learning_rate_is_a_no_op(small_set):
    result = train(small_set.pairs(), TrainConfig(learning_rate=0.0, epochs=5))
    assert np.all(result.model.weights == 0.0)
    assert np.all(result.model.bias == 0.0)
    assert len(set(result.loss_trace)) == 1  # loss frozen at the initial value


def test_train_same_seed_same_trace(small_set):
    cfg = TrainConfig(learning_rate=0.05, epochs=40, batch_size=16, seed=123)
    a = train(small_set.pairs(), cfg)
    b = train(small_set.pairs(), cfg)
    assert a.loss_trace == b.loss_trace
    assert np.array_equal(a.model.weights, b.model.weights)


def test_train_loss_trace_non_increasing_full_batch(small_set):
    # full batch and the documented stable rate keep descent monotone
    result = train(small_set.pairs(), TrainConfig(learning_rate=0.05, epochs=200, batch_size=0))
    for earlier, later in zip(result.loss_trace, result.loss_trace[1:]):
        assert later <= earlier + 1e-15


def test_train_divergence_names_the_epoch():
    # the linear loss tail bounds gradients, so overflow needs a feature
    # scale that a single huge step pushes past the float range
    pairs = [(PooledFeature(np.full((1, 1, 1), 1e160)), OffsetVector(1, 0, 0, 0, 0))]
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(TrainingDivergedError) as info:
            train(pairs, TrainConfig(learning_rate=1e160, epochs=3))
    assert isinstance(info.value.epoch, int)
    assert 1 <= info.value.epoch <= 3


def test_train_rejects_empty_and_ragged():
    with pytest.raises(InvalidArgumentError):
        train([], TrainConfig())
    pairs = [
        (PooledFeature(np.zeros((2, 2, 1))), OffsetVector(0, 0, 0, 0, 0)),
        (PooledFeature(np.zeros((3, 3, 1))), OffsetVector(0, 0, 0, 0, 0)),
    ]
    with pytest.raises(ShapeError):
        train(pairs, TrainConfig())


def test_objective_gradient_matches_finite_differences(small_set):
    pairs = small_set.pairs()[:20]
    rng = np.random.default_rng(63)
    dim = pairs[0][0].flatten().shape[0]
    w = rng.normal(scale=0.2, size=(dim, 5))
    b = rng.normal(scale=0.2, size=5)
    beta = 1.0

    feats = np.stack([p.flatten() for p, _ in pairs])
    targets = np.stack([np.asarray(t.astuple()) for _, t in pairs])

    def objective(wm, bv):
        total = 0.0
        for f, t in zip(feats, targets):
            loss, _ = smooth_l1(OffsetVector(*(f @ wm + bv)), OffsetVector(*t), beta=beta)
            total += loss
        return total / len(feats)

    # steer clear of kinks so the finite difference is trustworthy
    residuals = feats @ w + b - targets
    assert np.abs(np.abs(residuals) - beta).min() > 1e-3

    grads = np.stack(
        [smooth_l1(OffsetVector(*(f @ w + b)), OffsetVector(*t), beta=beta)[1]
         for f, t in zip(feats, targets)]
    )
    analytic_w = feats.T @ grads / len(feats)
    analytic_b = grads.mean(axis=0)

    for p, q in [(0, 0), (dim // 2, 2), (dim - 1, 4), (3, 1)]:
        def f_entry(x, p=p, q=q):
            wm = w.copy()
            wm[p, q] = x
            return objective(wm, b)

        fd = central_difference(f_entry, w[p, q])
        assert analytic_w[p, q] == pytest.approx(fd, rel=1e-5, abs=1e-7)
    for q in range(5):
        def f_bias(x, q=q):
            bv = b.copy()
            bv[q] = x
            return objective(w, bv)

        assert analytic_b[q] == pytest.approx(central_difference(f_bias, b[q]), rel=1e-5, abs=1e-7)


# -------------------------------------------------------------- persistence


def test_save_load_roundtrip(tmp_path):
    rng = np.random.default_rng(64)
    model = LinearRegressor(rng.normal(size=(12, 5)), rng.normal(size=5))
    path = tmp_path / "model.json"
    save_model(model, path)
    back = load_model(path)
    assert np.array_equal(back.weights, model.weights)
    assert np.array_equal(back.bias, model.bias)


def test_load_rejects_bad_documents(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("not json at all")
    with pytest.raises(InvalidArgumentError):
        load_model(path)

    path.write_text(json.dumps({"format": "something-else"}))
    with pytest.raises(InvalidArgumentError):
        load_model(path)

    doc = {
        "format": "rotbox-linear-v1",
        "feature_dim": 3,
        "outputs": 5,
        "weights": [[0, 0, 0, 0, 0]] * 2,  # disagrees with feature_dim
        "bias": [0, 0, 0, 0, 0],
    }
    path.write_text(json.dumps(doc))
    with pytest.raises(InvalidArgumentError):
        load_model(path)
