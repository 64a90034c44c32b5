import math

import numpy as np
import pytest

from aeapt.enums import Activations, Similarities
from aeapt.exceptions import DomainError, ShapeError
from aeapt.layers import (
    attention,
    attention_backward,
    attention_forward,
    AttentionParams,
    dense_backward,
    dense_forward,
    dense_forward_batch,
    DenseParams,
    GateParams,
    gru_cell_step,
    gru_step_forward,
    GruCell,
    GruCellParams,
    lstm_cell_step,
    LstmCell,
    LstmCellParams,
    rnn_cell_step,
    RnnCell,
    RnnCellParams,
    unroll,
    unroll_backward,
)
from aeapt.tensor import grad_check


def sigma(z):
    return 1 / (1 + math.exp(-z))


def constant_gate(value: float, bias: float = 0.0) -> GateParams:
    return GateParams(W_x=np.full((1, 1), value), W_h=np.full((1, 1), value), b=np.full(1, bias))


# dense

def test_dense_identity():
    p = DenseParams(np.eye(3), np.zeros(3), Activations.IDENTITY)
    assert dense_forward(np.array([0.2, -1.0, 3.0]), p).tolist() == [0.2, -1.0, 3.0]


def test_dense_sigmoid_at_zero():
    p = DenseParams(np.array([[1.0, 1.0]]), np.array([0.0]), Activations.SIGMOID)
    assert dense_forward(np.array([0.0, 0.0]), p).tolist() == [0.5]


def test_dense_tanh():
    p = DenseParams(np.array([[2.0]]), np.array([1.0]), Activations.TANH)
    assert dense_forward(np.array([0.5]), p)[0] == pytest.approx(0.96403, abs=1e-5)


def test_dense_shape_errors():
    with pytest.raises(ShapeError):
        DenseParams(np.eye(2), np.zeros(3))
    with pytest.raises(ShapeError):
        dense_forward(np.ones(4), DenseParams(np.eye(3), np.zeros(3)))


@pytest.mark.parametrize('activation', list(Activations), ids=lambda kind: kind.value)
def test_dense_gradients(rng, activation):
    p = DenseParams.init(rng, 4, 3, activation)
    p.b[...] = rng.normal(size=3)
    X = rng.normal(size=(5, 4))
    R = rng.normal(size=(5, 3))

    def forward():
        return float(np.sum(dense_forward_batch(X, p)[0] * R))

    Y, cache = dense_forward_batch(X, p)
    dX, grads = dense_backward(R, cache, p)
    assert grad_check(forward, p.arrays(), grads) < 1e-4
    assert grad_check(forward, {'X': X}, {'X': dX}) < 1e-4


# RNN

def test_rnn_cell_by_hand():
    p = RnnCellParams(np.array([[0.5]]), np.array([[0.3]]), np.array([0.1]), Activations.TANH)
    assert rnn_cell_step(np.array([1.0]), np.array([0.0]), p)[0] == pytest.approx(0.53705, abs=1e-5)


def test_rnn_cell_zero_weights():
    p = RnnCellParams(np.zeros((2, 3)), np.zeros((2, 2)), np.zeros(2), Activations.TANH)
    assert rnn_cell_step(np.ones(3), np.ones(2), p).tolist() == [0.0, 0.0]


def test_rnn_cell_identity_passes_input():
    p = RnnCellParams(np.eye(2), np.eye(2), np.zeros(2), Activations.IDENTITY)
    assert rnn_cell_step(np.array([0.7, -0.2]), np.zeros(2), p).tolist() == [0.7, -0.2]


@pytest.mark.parametrize('seed', range(5))
def test_rnn_identity_cell_is_affine_in_input(seed):
    rng = np.random.default_rng(seed)
    p = RnnCellParams.init(rng, 4, 3, Activations.IDENTITY)
    p.b_h[:] = rng.normal(size=3)
    x, y, h = rng.normal(size=4), rng.normal(size=4), rng.normal(size=3)
    a = rng.uniform(-2.0, 3.0)
    b = 1.0 - a
    mixed = rnn_cell_step(a * x + b * y, h, p)
    assert np.allclose(mixed, a * rnn_cell_step(x, h, p) + b * rnn_cell_step(y, h, p), atol=1e-12)


def test_rnn_cell_shape_error():
    p = RnnCellParams(np.eye(2), np.eye(2), np.zeros(2))
    with pytest.raises(ShapeError):
        rnn_cell_step(np.ones(3), np.zeros(2), p)


# LSTM

def test_lstm_saturated_gates_keep_cell_state():
    p = LstmCellParams(
        input=constant_gate(0.3, bias=-50.0),
        forget=constant_gate(0.3, bias=50.0),
        output=constant_gate(0.3),
        candidate=constant_gate(0.3),
    )
    _, c = lstm_cell_step(np.array([0.8]), np.array([0.4]), np.array([1.7]), p)
    assert abs(c[0] - 1.7) < 1e-9


def test_lstm_zero_cell():
    p = LstmCellParams(*(constant_gate(0.0) for _ in range(4)))
    h, c = lstm_cell_step(np.array([1.0]), np.array([0.0]), np.array([0.0]), p)
    assert h.tolist() == [0.0]
    assert c.tolist() == [0.0]


def test_lstm_cell_by_hand():
    p = LstmCellParams(*(constant_gate(0.5) for _ in range(4)))
    h, c = lstm_cell_step(np.array([1.0]), np.array([0.0]), np.array([0.0]), p)
    gate = sigma(0.5)
    expected_c = gate * math.tanh(0.5)
    assert c[0] == pytest.approx(expected_c, abs=1e-12)
    assert h[0] == pytest.approx(gate * math.tanh(expected_c), abs=1e-12)


def test_lstm_shape_error():
    with pytest.raises(ShapeError):
        LstmCellParams(constant_gate(0.1), constant_gate(0.1), constant_gate(0.1),
                       GateParams(np.ones((2, 1)), np.ones((2, 2)), np.zeros(2)))


# GRU

def test_gru_closed_update_gate_keeps_state():
    p = GruCellParams(update=constant_gate(0.4, bias=-50.0), reset=constant_gate(0.4), candidate=constant_gate(0.4))
    h = gru_cell_step(np.array([0.9]), np.array([-0.6]), p)
    assert abs(h[0] + 0.6) < 1e-9


def test_gru_open_update_gate_takes_candidate():
    p = GruCellParams(update=constant_gate(0.4, bias=50.0), reset=constant_gate(0.4), candidate=constant_gate(0.4))
    x, h_prev = 0.9, -0.6
    r = sigma(0.4 * x + 0.4 * h_prev)
    candidate = math.tanh(0.4 * x + 0.4 * r * h_prev)
    h = gru_cell_step(np.array([x]), np.array([h_prev]), p)
    assert abs(h[0] - candidate) < 1e-9


def test_gru_zero_cell():
    p = GruCellParams(*(constant_gate(0.0) for _ in range(3)))
    assert gru_cell_step(np.array([2.0]), np.array([0.0]), p).tolist() == [0.0]


@pytest.mark.parametrize('seed', range(8))
def test_gru_state_lies_between_previous_state_and_candidate(seed):
    rng = np.random.default_rng(seed)
    p = GruCellParams.init(rng, 5, 4)
    for gate in (p.update, p.reset, p.candidate):
        gate.b[:] = rng.normal(size=4)
    X = rng.normal(scale=2.0, size=(6, 5))
    H_prev = rng.uniform(-1.0, 1.0, size=(6, 4))
    H, cache = gru_step_forward(X, H_prev, p)
    candidate = cache[-1]
    assert np.all(H >= np.minimum(H_prev, candidate) - 1e-12)
    assert np.all(H <= np.maximum(H_prev, candidate) + 1e-12)


# unrolled cells

def _cells(rng):
    return {
        'rnn': RnnCell(RnnCellParams.init(rng, 3, 2, Activations.TANH)),
        'lstm': LstmCell(LstmCellParams.init(rng, 3, 2)),
        'gru': GruCell(GruCellParams.init(rng, 3, 2)),
    }


@pytest.mark.parametrize('kind', ['rnn', 'lstm', 'gru'])
def test_unrolled_cell_gradients(rng, kind):
    cell = _cells(rng)[kind]
    for value in cell.arrays().values():
        if value.ndim == 1:
            value[...] = rng.normal(scale=0.3, size=value.shape)
    inputs = [rng.normal(size=(2, 3)) for _ in range(4)]
    weights = [rng.normal(size=(2, 2)) for _ in range(4)]
    final_weights = rng.normal(size=(2, 2))

    def forward():
        outputs, state, _ = unroll(cell, inputs)
        return float(sum(np.sum(out * w) for out, w in zip(outputs, weights)) + np.sum(state[0] * final_weights))

    _, state, caches = unroll(cell, inputs)
    d_final = (final_weights,) + tuple(np.zeros_like(s) for s in state[1:])
    d_inputs, grads = unroll_backward(cell, caches, weights, d_final)

    assert set(grads) == set(cell.arrays())
    assert grad_check(forward, cell.arrays(), grads) < 1e-4
    assert grad_check(forward, {f'x{t}': x for t, x in enumerate(inputs)},
                      {f'x{t}': d for t, d in enumerate(d_inputs)}) < 1e-4


# attention

def test_attention_single_element():
    p = AttentionParams.init(np.random.default_rng(0), 2, 3)
    x = np.array([[0.3, -0.7]])
    context, weights = attention(x, p)
    assert weights.tolist() == [1.0]
    assert context == pytest.approx(p.Wv @ x[0])


def test_attention_identical_keys_are_uniform():
    p = AttentionParams.init(np.random.default_rng(0), 2, 2)
    _, weights = attention(np.tile([0.5, 1.0], (4, 1)), p)
    assert weights == pytest.approx([0.25] * 4)


def test_attention_by_hand():
    p = AttentionParams(np.eye(2), np.eye(2), np.eye(2), Similarities.DOT)
    context, weights = attention(np.array([[1.0, 0.0], [0.0, 1.0]]), p, query=np.array([1.0, 0.0]))
    assert weights == pytest.approx([0.73106, 0.26894], abs=1e-5)
    assert context == pytest.approx([0.73106, 0.26894], abs=1e-5)


def test_attention_scaled_dot_scale():
    p = AttentionParams.init(np.random.default_rng(0), 3, 4)
    assert p.scale == pytest.approx(0.5)
    assert AttentionParams.init(np.random.default_rng(0), 3, 4, Similarities.DOT).scale == 1.0


def test_attention_empty_sequence():
    p = AttentionParams.init(np.random.default_rng(0), 2, 2)
    with pytest.raises(DomainError):
        attention(np.zeros((0, 2)), p)


@pytest.mark.parametrize('with_query', [False, True], ids=['mean-pooled', 'explicit-query'])
@pytest.mark.parametrize('similarity', list(Similarities), ids=lambda kind: kind.value)
def test_attention_gradients(rng, with_query, similarity):
    p = AttentionParams.init(rng, 3, 2, similarity)
    U = rng.normal(size=(2, 4, 3))
    query = rng.normal(size=(2, 3)) if with_query else None
    R = rng.normal(size=(2, 2))

    def forward():
        return float(np.sum(attention_forward(U, p, query)[0] * R))

    _, _, cache = attention_forward(U, p, query)
    dU, d_query, grads = attention_backward(R, cache, p)
    assert grad_check(forward, p.arrays(), grads) < 1e-4
    assert grad_check(forward, {'U': U}, {'U': dU}) < 1e-4
    if with_query:
        assert grad_check(forward, {'query': query}, {'query': d_query}) < 1e-4
    else:
        assert d_query is None
