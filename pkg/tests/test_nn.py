"""Kernel tests: hand-computed fixtures and finite-difference oracles."""

import math

import numpy as np
import pytest

from obsr.nn import (
    Adam,
    ClassOutOfRange,
    Dense,
    Dropout,
    MultiheadSelfAttention,
    Parameter,
    ReLU,
    Sequential,
    ShapeMismatch,
    Sigmoid,
    StackedLSTM,
    cross_entropy,
    expected_log_distance,
    grad_check,
    l1,
    load_checkpoint,
    mlp,
    save_checkpoint,
    smooth_l1,
    softmax,
)
from obsr.nn.recurrent import LSTMLayer


def rng(seed=0):
    return np.random.default_rng(seed)


def fd_check_model(model, x, seed=1, tol=1e-6):
    """Check model parameter grads and input grads against central
    differences, using a fixed random projection as the scalar loss."""
    r = rng(seed)
    proj = r.normal(size=model.forward(x).shape)
    x_param = Parameter("x", x)

    def loss_fn():
        out = model.forward(x_param.value)
        dx = model.backward(proj)
        x_param.grad += dx
        return float((out * proj).sum())

    params = model.parameters() + [x_param]
    passed, report = grad_check(loss_fn, params, tol=tol)
    assert passed, report


class TestDense:
    def test_identity(self):
        layer = Dense(3, 3, rng())
        layer.W.value = np.eye(3)
        layer.b.value = np.zeros(3)
        x = rng(2).normal(size=(4, 3))
        assert np.allclose(layer.forward(x), x)

    def test_hand_chain_rule_1x1(self):
        layer = Dense(1, 1, rng())
        layer.W.value = np.array([[3.0]])
        layer.b.value = np.array([1.0])
        x = np.array([[2.0]])
        y = layer.forward(x)
        assert y[0, 0] == 7.0
        layer.backward(np.array([[1.0]]))
        assert layer.W.grad[0, 0] == 2.0
        assert layer.b.grad[0] == 1.0

    def test_grads_match_finite_differences(self):
        model = Sequential([Dense(4, 6, rng(3)), ReLU(), Dense(6, 2, rng(4))])
        x = rng(5).normal(size=(5, 4))
        fd_check_model(model, x)

    def test_shape_mismatch(self):
        layer = Dense(3, 2, rng())
        with pytest.raises(ShapeMismatch):
            layer.forward(np.zeros((4, 5)))


class TestActivations:
    def test_relu_values(self):
        layer = ReLU()
        out = layer.forward(np.array([[-1.0, 2.0]]))
        assert out.tolist() == [[0.0, 2.0]]

    def test_sigmoid_values(self):
        layer = Sigmoid()
        out = layer.forward(np.array([[0.0]]))
        assert out[0, 0] == 0.5
        big = layer.forward(np.array([[8.0, -8.0]]))
        assert 0.0 < big[0, 1] < big[0, 0] < 1.0

    def test_sigmoid_grads(self):
        model = Sequential([Dense(3, 3, rng(6)), Sigmoid()])
        fd_check_model(model, rng(7).normal(size=(4, 3)))


class TestDropout:
    def test_p_zero_identity(self):
        layer = Dropout(0.0, rng())
        x = rng(8).normal(size=(3, 3))
        assert np.array_equal(layer.forward(x, training=True), x)

    def test_inference_identity(self):
        layer = Dropout(0.5, rng())
        x = rng(9).normal(size=(3, 3))
        assert np.array_equal(layer.forward(x, training=False), x)

    def test_empirical_zero_rate(self):
        layer = Dropout(0.2, rng(10))
        x = np.ones((1000, 100))
        out = layer.forward(x, training=True)
        zero_rate = float((out == 0.0).mean())
        assert abs(zero_rate - 0.2) < 0.01
        # survivors rescaled for an unbiased expectation
        assert out.max() == pytest.approx(1.0 / 0.8)

    def test_invalid_p(self):
        with pytest.raises(ValueError):
            Dropout(1.0, rng())


class TestLosses:
    def test_smooth_l1_quadratic_region(self):
        loss, _ = smooth_l1(np.array([0.5]), np.array([0.0]))
        assert loss == pytest.approx(0.125)

    def test_smooth_l1_linear_region(self):
        loss, _ = smooth_l1(np.array([2.0]), np.array([0.0]))
        assert loss == pytest.approx(1.5)

    def test_cross_entropy_uniform(self):
        logits = np.zeros((1, 6))
        loss, _ = cross_entropy(logits, np.array([2]))
        assert loss == pytest.approx(math.log(6.0))

    def test_class_out_of_range(self):
        with pytest.raises(ClassOutOfRange):
            cross_entropy(np.zeros((1, 6)), np.array([6]))

    def test_softmax_rows_sum_to_one(self):
        p = softmax(rng(11).normal(size=(50, 6)) * 10)
        assert np.abs(p.sum(axis=1) - 1.0).max() < 1e-12
        assert p.min() >= 0.0

    @pytest.mark.parametrize("loss", [smooth_l1, l1])
    def test_regression_loss_grads(self, loss):
        r = rng(12)
        pred = Parameter("pred", r.normal(size=(6, 1)) * 2)
        target = r.normal(size=(6, 1)) * 2

        def loss_fn():
            value, grad = loss(pred.value, target)
            pred.grad += grad
            return value

        passed, report = grad_check(loss_fn, [pred], tol=1e-6)
        assert passed, report

    def test_cross_entropy_grads(self):
        r = rng(13)
        logits = Parameter("logits", r.normal(size=(5, 6)))
        classes = r.integers(0, 6, size=5)

        def loss_fn():
            value, grad = cross_entropy(logits.value, classes)
            logits.grad += grad
            return value

        passed, report = grad_check(loss_fn, [logits], tol=1e-6)
        assert passed, report

    def test_expected_log_distance_grads(self):
        r = rng(14)
        logits = Parameter("logits", r.normal(size=(5, 6)))
        log_dists = np.log1p(r.uniform(0, 500, size=(5, 6)))

        def loss_fn():
            value, grad = expected_log_distance(logits.value, log_dists)
            logits.grad += grad
            return value

        passed, report = grad_check(loss_fn, [logits], tol=1e-6)
        assert passed, report


class TestLSTM:
    def test_zero_weights_hand_evaluation(self):
        layer = LSTMLayer(2, 3, rng(15))
        for p in layer.parameters():
            p.value[...] = 0.0
        h = np.zeros((1, 3))
        c = np.zeros((1, 3))
        h2, c2, _ = layer.step(np.ones((1, 2)), h, c)
        # all gates sigmoid(0)=0.5, candidate tanh(0)=0: c' = 0.5*0 + 0.5*0 = 0
        assert np.allclose(c2, 0.0)
        assert np.allclose(h2, 0.0)
        # nonzero starting cell state halves: c' = 0.5*c
        c = np.full((1, 3), 0.8)
        h2, c2, _ = layer.step(np.ones((1, 2)), h, c)
        assert np.allclose(c2, 0.4)
        assert np.allclose(h2, 0.5 * np.tanh(0.4))

    def test_sequence_length_one_equals_step(self):
        layer = LSTMLayer(2, 4, rng(16))
        x = rng(17).normal(size=(1, 3, 2))
        hs = layer.forward(x)
        h, _, _ = layer.step(x[0], np.zeros((3, 4)), np.zeros((3, 4)))
        assert np.allclose(hs[0], h)

    def test_bptt_matches_finite_differences(self):
        model = StackedLSTM(3, 4, 2, rng(18))
        x = rng(19).normal(size=(3, 2, 3))
        fd_check_model(model, x, tol=1e-5)

    def test_forget_bias_initialized_to_one(self):
        layer = LSTMLayer(2, 4, rng(20))
        assert np.all(layer.b.value[4:8] == 1.0)


class TestAttention:
    def test_single_position_is_projected_value(self):
        attn = MultiheadSelfAttention(4, 2, rng(21))
        x = rng(22).normal(size=(1, 3, 4))
        out = attn.forward(x)
        flat = x.reshape(3, 4)
        v = flat @ attn.Wv.value
        expected = v @ attn.Wo.value + attn.bo.value
        assert np.allclose(out[0], expected)

    def test_identical_keys_uniform_attention(self):
        attn = MultiheadSelfAttention(4, 2, rng(23))
        x = np.tile(rng(24).normal(size=(1, 1, 4)), (5, 2, 1))
        attn.forward(x)
        _, _, _, _, weights, _ = attn._cache
        assert np.allclose(weights, 1.0 / 5.0)

    def test_causal_mask(self):
        attn = MultiheadSelfAttention(4, 2, rng(25), causal=True)
        x = rng(26).normal(size=(4, 1, 4))
        attn.forward(x)
        _, _, _, _, weights, _ = attn._cache
        upper = np.triu(np.ones((4, 4), dtype=bool), k=1)
        assert np.all(weights[:, :, upper] == 0.0)

    def test_grads_match_finite_differences(self):
        attn = MultiheadSelfAttention(4, 2, rng(27))
        x = rng(28).normal(size=(3, 2, 4))
        fd_check_model(attn, x, tol=1e-5)

    def test_causal_grads(self):
        attn = MultiheadSelfAttention(4, 2, rng(29), causal=True)
        x = rng(30).normal(size=(3, 2, 4))
        fd_check_model(attn, x, tol=1e-5)

    def test_dim_not_divisible(self):
        with pytest.raises(ShapeMismatch):
            MultiheadSelfAttention(5, 2, rng())


class TestAdam:
    def test_first_step_is_lr_times_sign(self):
        lr = 1e-3
        for g in (1e-3, 0.5, -2.0, -1e-3):
            p = Parameter("w", np.array([1.0]))
            opt = Adam([p], lr=lr)
            p.grad[...] = g
            opt.step()
            assert abs((p.value[0] - 1.0) + lr * np.sign(g)) < 1e-6

    def test_zero_gradient_noop(self):
        p = Parameter("w", np.array([1.0, -2.0]))
        opt = Adam([p])
        opt.step()
        assert np.array_equal(p.value, np.array([1.0, -2.0]))

    def test_grads_zeroed_after_step(self):
        p = Parameter("w", np.array([1.0]))
        opt = Adam([p])
        p.grad[...] = 0.7
        opt.step()
        assert p.grad[0] == 0.0

    def test_scalar_quadratic_converges(self):
        p = Parameter("w", np.array([0.0]))
        opt = Adam([p], lr=0.1)
        for _ in range(200):
            p.grad[...] = 2.0 * (p.value - 3.0)
            opt.step()
        assert abs(p.value[0] - 3.0) < 0.05

    def test_state_roundtrip(self):
        p = Parameter("w", np.array([1.0]))
        opt = Adam([p], lr=0.01)
        p.grad[...] = 1.0
        opt.step()
        state = opt.state_dict()
        opt2 = Adam([p], lr=0.01)
        opt2.load_state_dict(state)
        assert opt2.t == 1
        assert np.array_equal(opt2.m[0], opt.m[0])


class TestGradCheck:
    def test_linear_model_is_machine_precision(self):
        model = Dense(3, 1, rng(31))
        x = rng(32).normal(size=(4, 3))

        def loss_fn():
            out = model.forward(x)
            model.backward(np.ones_like(out))
            return float(out.sum())

        passed, report = grad_check(loss_fn, model.parameters(), tol=1e-9)
        assert passed, report

    def test_corrupted_gradient_fails(self):
        model = Dense(3, 1, rng(33))
        x = rng(34).normal(size=(4, 3))

        def loss_fn():
            out = model.forward(x)
            model.backward(np.ones_like(out))
            model.W.grad += 0.5  # deliberate corruption
            return float(out.sum())

        passed, _ = grad_check(loss_fn, model.parameters(), tol=1e-4)
        assert not passed

    def test_full_hmp_style_stack(self):
        # LSTM + attention + classifier, toy sizes
        r = rng(35)
        lstm = StackedLSTM(3, 4, 2, r)
        attn = MultiheadSelfAttention(4, 2, r, causal=True)
        head = Dense(4, 6, r)
        x = Parameter("x", r.normal(size=(3, 2, 3)))
        classes = r.integers(0, 6, size=6)

        def loss_fn():
            hs = lstm.forward(x.value)
            ctx = attn.forward(hs)
            logits = head.forward(ctx.reshape(6, 4))
            value, dlogits = cross_entropy(logits, classes)
            dctx = head.backward(dlogits).reshape(3, 2, 4)
            dhs = attn.backward(dctx)
            x.grad += lstm.backward(dhs)
            return value

        params = lstm.parameters() + attn.parameters() + head.parameters() \
            + [x]
        passed, report = grad_check(loss_fn, params, tol=1e-4,
                                    max_elements=12)
        assert passed, report


class TestMLPBuilder:
    def test_layout(self):
        model = mlp(5, (50, 100, 50), 1, rng(36), dropout_p=0.2,
                    dropout_after=2)
        kinds = [type(layer).__name__ for layer in model.layers]
        assert kinds == ["Dense", "ReLU", "Dense", "ReLU", "Dropout",
                         "Dense", "ReLU", "Dense"]

    def test_sigmoid_output_bounded(self):
        model = mlp(5, (8,), 1, rng(37), activation="sigmoid",
                    output_activation="sigmoid")
        out = model.forward(rng(38).normal(size=(20, 5)) * 10)
        assert np.all(out > 0.0) and np.all(out < 1.0)


class TestCheckpoint:
    def test_roundtrip(self, tmp_path):
        model = mlp(3, (4,), 1, rng(39))
        opt = Adam(model.parameters(), lr=0.01)
        x = rng(40).normal(size=(8, 3))
        out = model.forward(x)
        model.backward(np.ones_like(out))
        opt.step()
        path = tmp_path / "model.npz"
        save_checkpoint(path, model.parameters(), "cfg123", opt.state_dict())

        model2 = mlp(3, (4,), 1, rng(99))
        meta, adam_state = load_checkpoint(path, model2.parameters())
        assert meta["config_hash"] == "cfg123"
        assert np.allclose(model2.forward(x), model.forward(x))
        assert adam_state["t"] == 1
