"""Dense 64-bit numerics shared by every layer and model.

Matrices are plain :class:`numpy.ndarray` objects of dtype ``float64``. Vectors
are 1-D arrays; batched code keeps rows on the first axis.
"""

from typing import Callable, Iterable, Mapping, Union

from dataclasses import dataclass, field

import numpy as np

from .enums import Activations
from .exceptions import DomainError, NumericError, ShapeError

Matrix = np.ndarray
"""Row-major ``float64`` array; 2-D for matrices, 1-D for vectors."""

_SIGMOID_FLOOR = float(np.finfo(np.float64).eps)


def as_matrix(values, shape: Union[Iterable[int], None] = None) -> Matrix:
    """Convert ``values`` to a finite ``float64`` array, optionally checking its shape.

    Raises:
        ShapeError: If ``shape`` is given and does not match.
        NumericError: If any value is NaN or infinite.
    """
    array = np.asarray(values, dtype=np.float64)
    if shape is not None and array.shape != tuple(shape):
        raise ShapeError("Unexpected shape", array.shape, tuple(shape))
    ensure_finite(array)
    return array


def ensure_finite(array: Matrix, what: str = "array") -> Matrix:
    if not np.all(np.isfinite(array)):
        raise NumericError(f"{what} contains non-finite values")
    return array


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """Matrix product ``a @ b``.

    Raises:
        ShapeError: If ``a.cols != b.rows``; the message names both shapes.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError("Cannot multiply", a.shape, b.shape)
    return np.matmul(a, b)


def sigmoid(z: Matrix) -> Matrix:
    # tanh form never overflows; the clip keeps outputs strictly inside (0, 1)
    return np.clip(0.5 * (1.0 + np.tanh(0.5 * z)), _SIGMOID_FLOOR, 1.0 - _SIGMOID_FLOOR)


def activate(kind: Activations, z: Matrix) -> Matrix:
    if kind is Activations.TANH:
        return np.tanh(z)
    if kind is Activations.SIGMOID:
        return sigmoid(z)
    if kind is Activations.RELU:
        return np.maximum(z, 0.0)
    if kind is Activations.IDENTITY:
        return np.array(z, dtype=np.float64, copy=True)
    raise DomainError(f"Unknown activation {kind!r}")


def activation_grad(kind: Activations, y: Matrix) -> Matrix:
    """Derivative of the activation expressed through its output ``y``."""
    if kind is Activations.TANH:
        return 1.0 - y * y
    if kind is Activations.SIGMOID:
        return y * (1.0 - y)
    if kind is Activations.RELU:
        return (y > 0.0).astype(np.float64)
    if kind is Activations.IDENTITY:
        return np.ones_like(y)
    raise DomainError(f"Unknown activation {kind!r}")


def softmax(scores: Matrix, axis: int = -1) -> Matrix:
    shifted = scores - np.max(scores, axis=axis, keepdims=True)
    weights = np.exp(shifted)
    return weights / np.sum(weights, axis=axis, keepdims=True)


def glorot_uniform(rng: np.random.Generator, fan_out: int, fan_in: int) -> Matrix:
    """Seeded uniform(-limit, limit) initialization with ``limit = sqrt(6 / (fan_in + fan_out))``."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


@dataclass
class AdamState:
    """Moment accumulators of a single parameter."""

    first_moment: Matrix
    second_moment: Matrix
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = field(default=0)

    @classmethod
    def for_param(cls, param: Matrix, learning_rate: float = 0.001, beta1: float = 0.9,
                  beta2: float = 0.999, epsilon: float = 1e-8) -> 'AdamState':
        return cls(
            first_moment=np.zeros_like(param, dtype=np.float64),
            second_moment=np.zeros_like(param, dtype=np.float64),
            learning_rate=learning_rate,
            beta1=beta1,
            beta2=beta2,
            epsilon=epsilon,
        )


def adam_step(param: Matrix, grad: Matrix, state: AdamState) -> Matrix:
    """Apply one bias-corrected Adam update to ``param`` in place.

    Returns:
        The same ``param`` array, for chaining.

    Raises:
        ShapeError: If ``param``, ``grad`` and the accumulators disagree in shape.
        DomainError: If the learning rate is not positive.
    """
    if param.shape != grad.shape or state.first_moment.shape != param.shape:
        raise ShapeError("Adam shapes differ", param.shape, grad.shape, state.first_moment.shape)
    if state.learning_rate <= 0:
        raise DomainError(f"Learning rate must be positive, got {state.learning_rate}")

    state.step += 1
    state.first_moment *= state.beta1
    state.first_moment += (1.0 - state.beta1) * grad
    state.second_moment *= state.beta2
    state.second_moment += (1.0 - state.beta2) * (grad * grad)

    corrected_first = state.first_moment / (1.0 - state.beta1 ** state.step)
    corrected_second = state.second_moment / (1.0 - state.beta2 ** state.step)
    param -= state.learning_rate * corrected_first / (np.sqrt(corrected_second) + state.epsilon)
    return param


def grad_check(
        forward: Callable[[], float],
        params: Mapping[str, Matrix],
        analytic: Mapping[str, Matrix],
        eps: float = 1e-6,
) -> float:
    """Compare analytic gradients with central finite differences.

    ``forward`` must read the arrays of ``params`` (they are perturbed in place
    and restored afterwards) and return a scalar.

    Returns:
        Max over every element of ``|analytic - numeric| / max(|analytic|, |numeric|, 1e-8)``.

    Raises:
        DomainError: If ``eps`` is outside ``[1e-7, 1e-3]``.
        ShapeError: If an analytic gradient does not match its parameter.
        NumericError: If ``forward`` returns a non-finite value.
    """
    if not 1e-7 <= eps <= 1e-3:
        raise DomainError(f"eps must lie in [1e-7, 1e-3], got {eps}")

    def evaluate() -> float:
        value = float(forward())
        if not np.isfinite(value):
            raise NumericError("Forward map returned a non-finite value")
        return value

    worst = 0.0
    for name, param in params.items():
        grad = analytic[name]
        if grad.shape != param.shape:
            raise ShapeError(f"Gradient of {name} has wrong shape", grad.shape, param.shape)
        if not param.flags.c_contiguous:
            raise DomainError(f"Parameter {name} is not perturbable in place")
        flat = param.reshape(-1)
        flat_grad = grad.reshape(-1)
        for index in range(flat.size):
            original = flat[index]
            flat[index] = original + eps
            plus = evaluate()
            flat[index] = original - eps
            minus = evaluate()
            flat[index] = original
            numeric = (plus - minus) / (2.0 * eps)
            exact = flat_grad[index]
            error = abs(exact - numeric) / max(abs(exact), abs(numeric), 1e-8)
            worst = max(worst, error)
    return worst
