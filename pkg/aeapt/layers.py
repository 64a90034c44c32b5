"""Forward and backward passes of the building blocks of every architecture.

All batched functions take rows on the first axis: ``X`` is ``(batch, in)``,
sequences are lists of such matrices, attention inputs are ``(batch, T, in)``.
Weight matrices are stored ``[out x in]``. Every ``*_forward`` returns a cache
that its ``*_backward`` consumes; gradients come back as dicts keyed like
:meth:`arrays` of the parameter bundle.

The single-vector functions :func:`dense_forward`, :func:`rnn_cell_step`,
:func:`lstm_cell_step`, :func:`gru_cell_step` and :func:`attention` wrap the
batched ones for one sample.
"""

from typing import Dict, List, Tuple, Union

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .enums import Activations, Similarities
from .exceptions import DomainError, ShapeError
from .tensor import activate, activation_grad, glorot_uniform, Matrix, sigmoid, softmax

Grads = Dict[str, Matrix]
State = Tuple[Matrix, ...]


def _check_width(x: Matrix, width: int, what: str):
    if x.shape[-1] != width:
        raise ShapeError(f"{what} width mismatch", x.shape, (width,))


def _add_grads(total: Grads, update: Grads):
    for name, value in update.items():
        if name in total:
            total[name] += value
        else:
            total[name] = value.copy()


@dataclass
class DenseParams:
    W: Matrix
    b: Matrix
    activation: Activations = Activations.IDENTITY

    def __post_init__(self):
        if self.W.ndim != 2 or self.b.shape != (self.W.shape[0],):
            raise ShapeError("Dense weights and bias disagree", self.W.shape, self.b.shape)

    @classmethod
    def init(cls, rng: np.random.Generator, n_in: int, n_out: int, activation: Activations) -> 'DenseParams':
        return cls(W=glorot_uniform(rng, n_out, n_in), b=np.zeros(n_out), activation=activation)

    @property
    def n_in(self) -> int:
        return self.W.shape[1]

    @property
    def n_out(self) -> int:
        return self.W.shape[0]

    def arrays(self) -> Dict[str, Matrix]:
        return {'W': self.W, 'b': self.b}


def dense_forward_batch(X: Matrix, p: DenseParams) -> Tuple[Matrix, Tuple[Matrix, Matrix]]:
    _check_width(X, p.n_in, "Dense input")
    Y = activate(p.activation, X @ p.W.T + p.b)
    return Y, (X, Y)


def dense_backward(dY: Matrix, cache: Tuple[Matrix, Matrix], p: DenseParams) -> Tuple[Matrix, Grads]:
    X, Y = cache
    dZ = dY * activation_grad(p.activation, Y)
    return dZ @ p.W, {'W': dZ.T @ X, 'b': dZ.sum(axis=0)}


def dense_forward(x: Matrix, p: DenseParams) -> Matrix:
    """``activation(W x + b)`` for a vector or a batch of row vectors."""
    x = np.asarray(x, dtype=np.float64)
    Y, _ = dense_forward_batch(np.atleast_2d(x), p)
    return Y[0] if x.ndim == 1 else Y


@dataclass
class GateParams:
    W_x: Matrix
    W_h: Matrix
    b: Matrix

    def __post_init__(self):
        hidden = self.b.shape[0]
        if self.W_x.shape[0] != hidden or self.W_h.shape != (hidden, hidden):
            raise ShapeError("Gate blocks disagree", self.W_x.shape, self.W_h.shape, self.b.shape)

    @classmethod
    def init(cls, rng: np.random.Generator, n_in: int, hidden: int) -> 'GateParams':
        return cls(W_x=glorot_uniform(rng, hidden, n_in), W_h=glorot_uniform(rng, hidden, hidden), b=np.zeros(hidden))

    def arrays(self) -> Dict[str, Matrix]:
        return {'W_x': self.W_x, 'W_h': self.W_h, 'b': self.b}


def _gate(X: Matrix, H: Matrix, g: GateParams) -> Matrix:
    return X @ g.W_x.T + H @ g.W_h.T + g.b


def _gate_backward(dA: Matrix, X: Matrix, H: Matrix, g: GateParams, prefix: str) -> Tuple[Matrix, Matrix, Grads]:
    grads = {f'{prefix}.W_x': dA.T @ X, f'{prefix}.W_h': dA.T @ H, f'{prefix}.b': dA.sum(axis=0)}
    return dA @ g.W_x, dA @ g.W_h, grads


@dataclass
class RnnCellParams:
    W_hx: Matrix
    W_hh: Matrix
    b_h: Matrix
    activation: Activations = Activations.TANH

    def __post_init__(self):
        hidden = self.b_h.shape[0]
        if self.W_hh.shape != (hidden, hidden) or self.W_hx.shape[0] != hidden:
            raise ShapeError("RNN cell blocks disagree", self.W_hx.shape, self.W_hh.shape, self.b_h.shape)

    @classmethod
    def init(cls, rng: np.random.Generator, n_in: int, hidden: int, activation: Activations) -> 'RnnCellParams':
        return cls(
            W_hx=glorot_uniform(rng, hidden, n_in),
            W_hh=glorot_uniform(rng, hidden, hidden),
            b_h=np.zeros(hidden),
            activation=activation,
        )

    @property
    def hidden(self) -> int:
        return self.b_h.shape[0]

    @property
    def n_in(self) -> int:
        return self.W_hx.shape[1]

    def arrays(self) -> Dict[str, Matrix]:
        return {'W_hx': self.W_hx, 'W_hh': self.W_hh, 'b_h': self.b_h}


def rnn_step_forward(X: Matrix, H_prev: Matrix, p: RnnCellParams) -> Tuple[Matrix, tuple]:
    _check_width(X, p.n_in, "RNN input")
    _check_width(H_prev, p.hidden, "RNN hidden state")
    H = activate(p.activation, X @ p.W_hx.T + H_prev @ p.W_hh.T + p.b_h)
    return H, (X, H_prev, H)


def rnn_step_backward(dH: Matrix, cache: tuple, p: RnnCellParams) -> Tuple[Matrix, Matrix, Grads]:
    X, H_prev, H = cache
    dZ = dH * activation_grad(p.activation, H)
    grads = {'W_hx': dZ.T @ X, 'W_hh': dZ.T @ H_prev, 'b_h': dZ.sum(axis=0)}
    return dZ @ p.W_hx, dZ @ p.W_hh, grads


def rnn_cell_step(x_t: Matrix, h_prev: Matrix, p: RnnCellParams) -> Matrix:
    """``h_t = f(W_hx x_t + W_hh h_prev + b_h)``."""
    x_t = np.asarray(x_t, dtype=np.float64)
    H, _ = rnn_step_forward(np.atleast_2d(x_t), np.atleast_2d(np.asarray(h_prev, dtype=np.float64)), p)
    return H[0] if x_t.ndim == 1 else H


@dataclass
class LstmCellParams:
    """Gate blocks, serialized in the order input, forget, output, candidate."""

    input: GateParams
    forget: GateParams
    output: GateParams
    candidate: GateParams

    GATES = ('input', 'forget', 'output', 'candidate')

    def __post_init__(self):
        shapes = {(getattr(self, gate).W_x.shape, getattr(self, gate).b.shape) for gate in self.GATES}
        if len(shapes) != 1:
            raise ShapeError("LSTM gate blocks disagree", *(getattr(self, gate).W_x.shape for gate in self.GATES))

    @classmethod
    def init(cls, rng: np.random.Generator, n_in: int, hidden: int) -> 'LstmCellParams':
        return cls(*(GateParams.init(rng, n_in, hidden) for _ in cls.GATES))

    @property
    def hidden(self) -> int:
        return self.input.b.shape[0]

    @property
    def n_in(self) -> int:
        return self.input.W_x.shape[1]

    def arrays(self) -> Dict[str, Matrix]:
        return {
            f'{gate}.{name}': value
            for gate in self.GATES
            for name, value in getattr(self, gate).arrays().items()
        }


def lstm_step_forward(X: Matrix, H_prev: Matrix, C_prev: Matrix, p: LstmCellParams) -> Tuple[Matrix, Matrix, tuple]:
    _check_width(X, p.n_in, "LSTM input")
    _check_width(H_prev, p.hidden, "LSTM hidden state")
    _check_width(C_prev, p.hidden, "LSTM cell state")
    i = sigmoid(_gate(X, H_prev, p.input))
    f = sigmoid(_gate(X, H_prev, p.forget))
    o = sigmoid(_gate(X, H_prev, p.output))
    g = np.tanh(_gate(X, H_prev, p.candidate))
    C = f * C_prev + i * g
    tanh_c = np.tanh(C)
    H = o * tanh_c
    return H, C, (X, H_prev, C_prev, i, f, o, g, tanh_c)


def lstm_step_backward(
        dH: Matrix,
        dC: Matrix,
        cache: tuple,
        p: LstmCellParams,
) -> Tuple[Matrix, Matrix, Matrix, Grads]:
    X, H_prev, C_prev, i, f, o, g, tanh_c = cache
    dC_total = dC + dH * o * (1.0 - tanh_c * tanh_c)
    pre_activations = {
        'input': dC_total * g * i * (1.0 - i),
        'forget': dC_total * C_prev * f * (1.0 - f),
        'output': dH * tanh_c * o * (1.0 - o),
        'candidate': dC_total * i * (1.0 - g * g),
    }
    dX = np.zeros_like(X)
    dH_prev = np.zeros_like(H_prev)
    grads: Grads = {}
    for gate in LstmCellParams.GATES:
        dX_gate, dH_gate, gate_grads = _gate_backward(pre_activations[gate], X, H_prev, getattr(p, gate), gate)
        dX += dX_gate
        dH_prev += dH_gate
        grads.update(gate_grads)
    return dX, dH_prev, dC_total * f, grads


def lstm_cell_step(x_t: Matrix, h_prev: Matrix, c_prev: Matrix, p: LstmCellParams) -> Tuple[Matrix, Matrix]:
    """One LSTM step; returns ``(h_t, c_t)``."""
    x_t = np.asarray(x_t, dtype=np.float64)
    H, C, _ = lstm_step_forward(
        np.atleast_2d(x_t),
        np.atleast_2d(np.asarray(h_prev, dtype=np.float64)),
        np.atleast_2d(np.asarray(c_prev, dtype=np.float64)),
        p,
    )
    return (H[0], C[0]) if x_t.ndim == 1 else (H, C)


@dataclass
class GruCellParams:
    """Gate blocks, serialized in the order update, reset, candidate."""

    update: GateParams
    reset: GateParams
    candidate: GateParams

    GATES = ('update', 'reset', 'candidate')

    def __post_init__(self):
        shapes = {(getattr(self, gate).W_x.shape, getattr(self, gate).b.shape) for gate in self.GATES}
        if len(shapes) != 1:
            raise ShapeError("GRU gate blocks disagree", *(getattr(self, gate).W_x.shape for gate in self.GATES))

    @classmethod
    def init(cls, rng: np.random.Generator, n_in: int, hidden: int) -> 'GruCellParams':
        return cls(*(GateParams.init(rng, n_in, hidden) for _ in cls.GATES))

    @property
    def hidden(self) -> int:
        return self.update.b.shape[0]

    @property
    def n_in(self) -> int:
        return self.update.W_x.shape[1]

    def arrays(self) -> Dict[str, Matrix]:
        return {
            f'{gate}.{name}': value
            for gate in self.GATES
            for name, value in getattr(self, gate).arrays().items()
        }


def gru_step_forward(X: Matrix, H_prev: Matrix, p: GruCellParams) -> Tuple[Matrix, tuple]:
    _check_width(X, p.n_in, "GRU input")
    _check_width(H_prev, p.hidden, "GRU hidden state")
    z = sigmoid(_gate(X, H_prev, p.update))
    r = sigmoid(_gate(X, H_prev, p.reset))
    reset_h = r * H_prev
    candidate = np.tanh(X @ p.candidate.W_x.T + reset_h @ p.candidate.W_h.T + p.candidate.b)
    H = (1.0 - z) * H_prev + z * candidate
    return H, (X, H_prev, z, r, reset_h, candidate)


def gru_step_backward(dH: Matrix, cache: tuple, p: GruCellParams) -> Tuple[Matrix, Matrix, Grads]:
    X, H_prev, z, r, reset_h, candidate = cache
    dA_candidate = dH * z * (1.0 - candidate * candidate)
    dX, d_reset_h, grads = _gate_backward(dA_candidate, X, reset_h, p.candidate, 'candidate')
    dH_prev = dH * (1.0 - z) + d_reset_h * r
    dA_reset = d_reset_h * H_prev * r * (1.0 - r)
    dA_update = dH * (candidate - H_prev) * z * (1.0 - z)
    for gate, dA in (('update', dA_update), ('reset', dA_reset)):
        dX_gate, dH_gate, gate_grads = _gate_backward(dA, X, H_prev, getattr(p, gate), gate)
        dX += dX_gate
        dH_prev += dH_gate
        grads.update(gate_grads)
    return dX, dH_prev, grads


def gru_cell_step(x_t: Matrix, h_prev: Matrix, p: GruCellParams) -> Matrix:
    """One GRU step: ``h_t = (1 - z) * h_prev + z * candidate``."""
    x_t = np.asarray(x_t, dtype=np.float64)
    H, _ = gru_step_forward(np.atleast_2d(x_t), np.atleast_2d(np.asarray(h_prev, dtype=np.float64)), p)
    return H[0] if x_t.ndim == 1 else H


class RecurrentCell(ABC):
    """Uniform step interface over the three cell kinds; states are tuples."""

    params: Union[RnnCellParams, LstmCellParams, GruCellParams]

    @property
    def hidden(self) -> int:
        return self.params.hidden

    def initial_state(self, batch: int) -> State:
        return (np.zeros((batch, self.hidden)),)

    @abstractmethod
    def step(self, X: Matrix, state: State) -> Tuple[State, tuple]:
        raise NotImplementedError

    @abstractmethod
    def step_backward(self, d_state: State, cache: tuple) -> Tuple[Matrix, State, Grads]:
        raise NotImplementedError

    def arrays(self) -> Dict[str, Matrix]:
        return self.params.arrays()


class RnnCell(RecurrentCell):
    def __init__(self, params: RnnCellParams):
        self.params = params

    def step(self, X, state):
        H, cache = rnn_step_forward(X, state[0], self.params)
        return (H,), cache

    def step_backward(self, d_state, cache):
        dX, dH_prev, grads = rnn_step_backward(d_state[0], cache, self.params)
        return dX, (dH_prev,), grads


class LstmCell(RecurrentCell):
    def __init__(self, params: LstmCellParams):
        self.params = params

    def initial_state(self, batch):
        return np.zeros((batch, self.hidden)), np.zeros((batch, self.hidden))

    def step(self, X, state):
        H, C, cache = lstm_step_forward(X, state[0], state[1], self.params)
        return (H, C), cache

    def step_backward(self, d_state, cache):
        dX, dH_prev, dC_prev, grads = lstm_step_backward(d_state[0], d_state[1], cache, self.params)
        return dX, (dH_prev, dC_prev), grads


class GruCell(RecurrentCell):
    def __init__(self, params: GruCellParams):
        self.params = params

    def step(self, X, state):
        H, cache = gru_step_forward(X, state[0], self.params)
        return (H,), cache

    def step_backward(self, d_state, cache):
        dX, dH_prev, grads = gru_step_backward(d_state[0], cache, self.params)
        return dX, (dH_prev,), grads


def unroll(cell: RecurrentCell, inputs: List[Matrix]) -> Tuple[List[Matrix], State, List[tuple]]:
    """Run ``cell`` over a sequence from the zero state.

    Returns:
        Hidden output of every step, the final state and the step caches.
    """
    state = cell.initial_state(inputs[0].shape[0])
    outputs, caches = [], []
    for X in inputs:
        state, cache = cell.step(X, state)
        outputs.append(state[0])
        caches.append(cache)
    return outputs, state, caches


def unroll_backward(
        cell: RecurrentCell,
        caches: List[tuple],
        d_outputs: Union[List[Matrix], None],
        d_final: State,
) -> Tuple[List[Matrix], Grads]:
    """Backpropagate through time.

    Args:
        d_outputs: Gradient w.r.t. each step's hidden output, or None.
        d_final: Gradient w.r.t. the final state (missing entries as zeros).
    """
    d_state = d_final
    d_inputs: List[Matrix] = [np.empty(0)] * len(caches)
    grads: Grads = {}
    for t in range(len(caches) - 1, -1, -1):
        if d_outputs is not None:
            d_state = (d_state[0] + d_outputs[t],) + tuple(d_state[1:])
        d_inputs[t], d_state, step_grads = cell.step_backward(d_state, caches[t])
        _add_grads(grads, step_grads)
    return d_inputs, grads


@dataclass
class AttentionParams:
    Wq: Matrix
    Wk: Matrix
    Wv: Matrix
    similarity: Similarities = Similarities.SCALED_DOT

    def __post_init__(self):
        if self.Wq.shape != self.Wk.shape or self.Wv.shape[1] != self.Wq.shape[1]:
            raise ShapeError("Attention projections disagree", self.Wq.shape, self.Wk.shape, self.Wv.shape)

    @classmethod
    def init(cls, rng: np.random.Generator, n_in: int, width: int,
             similarity: Similarities = Similarities.SCALED_DOT) -> 'AttentionParams':
        return cls(
            Wq=glorot_uniform(rng, width, n_in),
            Wk=glorot_uniform(rng, width, n_in),
            Wv=glorot_uniform(rng, width, n_in),
            similarity=similarity,
        )

    @property
    def n_in(self) -> int:
        return self.Wq.shape[1]

    @property
    def scale(self) -> float:
        if self.similarity is Similarities.SCALED_DOT:
            return 1.0 / np.sqrt(self.Wq.shape[0])
        return 1.0

    def arrays(self) -> Dict[str, Matrix]:
        return {'Wq': self.Wq, 'Wk': self.Wk, 'Wv': self.Wv}


def attention_forward(
        U: Matrix,
        p: AttentionParams,
        query: Union[Matrix, None] = None,
) -> Tuple[Matrix, Matrix, tuple]:
    """Batched attention over ``U`` of shape ``(batch, T, in)``.

    The query is the projection of ``query`` (``(batch, in)``) when given,
    otherwise of the mean of the sequence elements.

    Returns:
        Context ``(batch, d)``, weights ``(batch, T)`` and the cache.
    """
    if U.ndim != 3 or U.shape[1] == 0:
        raise DomainError("Attention needs a non-empty sequence")
    _check_width(U, p.n_in, "Attention input")
    pooled = U.mean(axis=1) if query is None else query
    _check_width(pooled, p.n_in, "Attention query")
    q = pooled @ p.Wq.T
    K = U @ p.Wk.T
    V = U @ p.Wv.T
    scores = np.einsum('bd,btd->bt', q, K) * p.scale
    weights = softmax(scores, axis=1)
    context = np.einsum('bt,btd->bd', weights, V)
    return context, weights, (U, pooled, query is None, q, K, V, weights)


def attention_backward(
        d_context: Matrix,
        cache: tuple,
        p: AttentionParams,
) -> Tuple[Matrix, Union[Matrix, None], Grads]:
    """Returns ``(dU, d_query, grads)``; ``d_query`` is None for the mean-pooled query."""
    U, pooled, mean_pooled, q, K, V, weights = cache
    d_weights = np.einsum('btd,bd->bt', V, d_context)
    dV = weights[:, :, None] * d_context[:, None, :]
    d_scores = weights * (d_weights - np.sum(weights * d_weights, axis=1, keepdims=True)) * p.scale
    dq = np.einsum('bt,btd->bd', d_scores, K)
    dK = d_scores[:, :, None] * q[:, None, :]
    grads = {
        'Wq': dq.T @ pooled,
        'Wk': np.einsum('btd,bti->di', dK, U),
        'Wv': np.einsum('btd,bti->di', dV, U),
    }
    dU = dK @ p.Wk + dV @ p.Wv
    d_pooled = dq @ p.Wq
    if mean_pooled:
        dU += d_pooled[:, None, :] / U.shape[1]
        return dU, None, grads
    return dU, d_pooled, grads


def attention(x_seq, p: AttentionParams, query: Union[Matrix, None] = None) -> Tuple[Matrix, Matrix]:
    """Attention over one sequence of vectors.

    Returns:
        ``(context, weights)``; the weights sum to 1.

    Raises:
        DomainError: If the sequence is empty.
    """
    sequence = np.asarray(x_seq, dtype=np.float64)
    if sequence.size == 0 or sequence.ndim != 2:
        raise DomainError("Attention needs a non-empty sequence of vectors")
    batch_query = None if query is None else np.asarray(query, dtype=np.float64)[None, :]
    context, weights, _ = attention_forward(sequence[None, :, :], p, batch_query)
    return context[0], weights[0]
