"""Autoencoder architectures, their losses, training and anomaly scoring.

Available networks (see :data:`network_classes`):
    * :class:`DenseAutoencoder` for ``AE`` and the generator of ``AAE``
    * :class:`RecurrentAutoencoder` for ``RNNAE``, ``LSTMAE`` and ``GRUAE``
    * :class:`AttentionAutoencoder` for ``ATAE``

Loss and anomaly score are the same quantity: the mean absolute difference
between a row and its reconstruction.
"""

from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple, Type, Union

from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, field, replace
import logging
from logging import Logger, LoggerAdapter
import math

import numpy as np

from .data import BooleanDataset
from .enums import Activations, Architectures, Similarities
from .exceptions import ConfigError, DivergenceError, DomainError, ShapeError, StateError
from .layers import (
    attention_backward,
    attention_forward,
    AttentionParams,
    dense_backward,
    dense_forward_batch,
    DenseParams,
    GruCell,
    GruCellParams,
    LstmCell,
    LstmCellParams,
    RecurrentCell,
    RnnCell,
    RnnCellParams,
    unroll,
    unroll_backward,
)
from .tensor import adam_step, AdamState, Matrix

DEFAULT_LAMBDA = 0.5
SCORING_CHUNK = 1024

Grads = Dict[str, Matrix]


@dataclass(frozen=True)
class ModelConfig:
    """Hyperparameters of one architecture. Validated on construction."""

    architecture: Architectures
    input_dim: int
    latent_dim: int
    hidden_sizes: Tuple[int, ...] = ()
    activation: Activations = Activations.TANH
    output_activation: Activations = Activations.SIGMOID
    epochs: int = 20
    batch_size: int = 64
    learning_rate: float = 0.005
    seed: int = 0
    lam: Optional[float] = None
    chunk_size: int = 8
    similarity: Similarities = Similarities.SCALED_DOT
    discriminator_updates: bool = True
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    divergence_limit: float = 1e6

    def __post_init__(self):
        object.__setattr__(self, 'hidden_sizes', tuple(int(size) for size in self.hidden_sizes))
        checks = (
            (self.input_dim >= 2, f"input_dim must be at least 2, got {self.input_dim}"),
            (1 <= self.latent_dim < self.input_dim,
             f"latent_dim must satisfy 1 <= n < m, got n={self.latent_dim}, m={self.input_dim}"),
            (all(size >= 1 for size in self.hidden_sizes), f"hidden sizes must be positive: {self.hidden_sizes}"),
            (self.epochs >= 1, f"epochs must be at least 1, got {self.epochs}"),
            (self.batch_size >= 1, f"batch_size must be at least 1, got {self.batch_size}"),
            (self.learning_rate > 0, f"learning_rate must be positive, got {self.learning_rate}"),
            (self.chunk_size >= 1, f"chunk_size must be at least 1, got {self.chunk_size}"),
            (0 <= self.seed < 2 ** 64, f"seed must be a 64-bit unsigned integer, got {self.seed}"),
            ((self.lam is not None) == (self.architecture is Architectures.AAE),
             "lambda must be set for AAE and only for AAE"),
            (self.lam is None or self.lam >= 0, f"lambda must be non-negative, got {self.lam}"),
            (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1 and self.epsilon > 0, "invalid Adam constants"),
        )
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)

    @classmethod
    def create(cls, architecture: Architectures, input_dim: int, **overrides: Any) -> 'ModelConfig':
        """Build a config with the derived defaults for ``input_dim``.

        Defaults: ``latent_dim = min(16, max(1, m // 4))``, one hidden layer of
        ``ceil(m / 2)`` units, ``lam = 0.5`` for AAE.
        """
        values: Dict[str, Any] = {
            'latent_dim': min(16, max(1, input_dim // 4)),
            'hidden_sizes': (math.ceil(input_dim / 2),),
            'lam': DEFAULT_LAMBDA if architecture is Architectures.AAE else None,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        if architecture is not Architectures.AAE:
            values['lam'] = None
        return cls(architecture=architecture, input_dim=input_dim, **values)

    @property
    def sequence_length(self) -> int:
        return math.ceil(self.input_dim / self.chunk_size)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for key, value in data.items():
            if isinstance(value, (Architectures, Activations, Similarities)):
                data[key] = value.value
        data['hidden_sizes'] = list(self.hidden_sizes)
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'ModelConfig':
        values = dict(data)
        try:
            values['architecture'] = Architectures(values['architecture'])
            values['activation'] = Activations(values['activation'])
            values['output_activation'] = Activations(values['output_activation'])
            values['similarity'] = Similarities(values['similarity'])
            values['hidden_sizes'] = tuple(values['hidden_sizes'])
            return cls(**values)
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Invalid model config: {e}") from e


def _pad(X: Matrix, width: int) -> Matrix:
    if X.shape[1] == width:
        return X
    padded = np.zeros((X.shape[0], width))
    padded[:, :X.shape[1]] = X
    return padded


def _prefixed(prefix: str, arrays: Mapping[str, Matrix]) -> Dict[str, Matrix]:
    return {f'{prefix}.{name}': value for name, value in arrays.items()}


class Autoencoder(ABC):
    """Interface every network implements.

    :meth:`arrays` returns the live parameter arrays in canonical order; the
    optimizer and the model file both rely on that order.
    """

    architecture: Architectures

    def __init__(self, config: ModelConfig):
        self.config = config

    @abstractmethod
    def arrays(self) -> Dict[str, Matrix]:
        raise NotImplementedError

    @abstractmethod
    def forward(self, X: Matrix) -> Tuple[Matrix, Any]:
        """Reconstruct a batch ``(rows, m)``; returns the reconstruction and a cache."""
        raise NotImplementedError

    @abstractmethod
    def backward(self, d_reconstruction: Matrix, cache: Any) -> Grads:
        raise NotImplementedError

    def reconstruct(self, X: Matrix) -> Matrix:
        return self.forward(X)[0]


class DenseAutoencoder(Autoencoder):
    """Encoder ``m -> hidden... -> n`` and the mirrored decoder."""

    architecture = Architectures.AE

    def __init__(self, config: ModelConfig, rng: np.random.Generator):
        super().__init__(config)
        encoder_sizes = [config.input_dim, *config.hidden_sizes, config.latent_dim]
        decoder_sizes = encoder_sizes[::-1]
        self.encoder = [
            DenseParams.init(rng, n_in, n_out, config.activation)
            for n_in, n_out in zip(encoder_sizes[:-1], encoder_sizes[1:])
        ]
        self.decoder = [
            DenseParams.init(rng, n_in, n_out, config.activation)
            for n_in, n_out in zip(decoder_sizes[:-1], decoder_sizes[1:])
        ]
        self.decoder[-1].activation = config.output_activation

    def _layers(self) -> List[Tuple[str, DenseParams]]:
        return (
            [(f'encoder.{i}', layer) for i, layer in enumerate(self.encoder)]
            + [(f'decoder.{i}', layer) for i, layer in enumerate(self.decoder)]
        )

    def arrays(self):
        arrays: Dict[str, Matrix] = {}
        for prefix, layer in self._layers():
            arrays.update(_prefixed(prefix, layer.arrays()))
        return arrays

    def forward(self, X):
        caches = []
        out = X
        for _, layer in self._layers():
            out, cache = dense_forward_batch(out, layer)
            caches.append(cache)
        return out, caches

    def backward(self, d_reconstruction, cache):
        grads: Grads = {}
        d_out = d_reconstruction
        for (prefix, layer), layer_cache in zip(reversed(self._layers()), reversed(cache)):
            d_out, layer_grads = dense_backward(d_out, layer_cache, layer)
            grads.update(_prefixed(prefix, layer_grads))
        return {name: grads[name] for name in self.arrays()}


class RecurrentAutoencoder(Autoencoder):
    """Reads the row as ``ceil(m / chunk)`` chunks; the last encoder state is the code.

    The decoder receives the code at every step and a shared output layer maps
    each decoder state back to a chunk.
    """

    cell_factories: Dict[Architectures, Callable[[np.random.Generator, int, int, ModelConfig], RecurrentCell]] = {
        Architectures.RNNAE: lambda rng, n_in, hidden, config: RnnCell(
            RnnCellParams.init(rng, n_in, hidden, config.activation)
        ),
        Architectures.LSTMAE: lambda rng, n_in, hidden, config: LstmCell(LstmCellParams.init(rng, n_in, hidden)),
        Architectures.GRUAE: lambda rng, n_in, hidden, config: GruCell(GruCellParams.init(rng, n_in, hidden)),
    }

    def __init__(self, config: ModelConfig, rng: np.random.Generator):
        super().__init__(config)
        self.architecture = config.architecture
        make_cell = self.cell_factories[config.architecture]
        self.encoder = make_cell(rng, config.chunk_size, config.latent_dim, config)
        self.decoder = make_cell(rng, config.latent_dim, config.latent_dim, config)
        self.output = DenseParams.init(rng, config.latent_dim, config.chunk_size, config.output_activation)

    def arrays(self):
        return {
            **_prefixed('encoder', self.encoder.arrays()),
            **_prefixed('decoder', self.decoder.arrays()),
            **_prefixed('output', self.output.arrays()),
        }

    def forward(self, X):
        chunk, steps = self.config.chunk_size, self.config.sequence_length
        padded = _pad(X, chunk * steps)
        inputs = [padded[:, t * chunk:(t + 1) * chunk] for t in range(steps)]
        _, code_state, encoder_caches = unroll(self.encoder, inputs)
        code = code_state[0]
        decoder_states, _, decoder_caches = unroll(self.decoder, [code] * steps)
        chunks, output_caches = [], []
        for state in decoder_states:
            Y, output_cache = dense_forward_batch(state, self.output)
            chunks.append(Y)
            output_caches.append(output_cache)
        reconstruction = np.concatenate(chunks, axis=1)[:, :X.shape[1]]
        return reconstruction, (code_state, encoder_caches, decoder_caches, output_caches)

    def backward(self, d_reconstruction, cache):
        code_state, encoder_caches, decoder_caches, output_caches = cache
        chunk, steps = self.config.chunk_size, self.config.sequence_length
        d_padded = _pad(d_reconstruction, chunk * steps)

        grads: Grads = {}
        d_states = []
        for t, output_cache in enumerate(output_caches):
            d_state, output_grads = dense_backward(d_padded[:, t * chunk:(t + 1) * chunk], output_cache, self.output)
            d_states.append(d_state)
            for name, value in output_grads.items():
                key = f'output.{name}'
                grads[key] = grads[key] + value if key in grads else value

        zero_final = tuple(np.zeros_like(s) for s in code_state)
        d_codes, decoder_grads = unroll_backward(self.decoder, decoder_caches, d_states, zero_final)
        d_code = d_codes[0].copy()
        for d in d_codes[1:]:
            d_code += d
        _, encoder_grads = unroll_backward(self.encoder, encoder_caches, None, (d_code,) + zero_final[1:])

        grads.update(_prefixed('encoder', encoder_grads))
        grads.update(_prefixed('decoder', decoder_grads))
        return {name: grads[name] for name in self.arrays()}


class AttentionAutoencoder(Autoencoder):
    """Dense layer -> attention over chunk positions (the code) -> dense layer."""

    architecture = Architectures.ATAE

    def __init__(self, config: ModelConfig, rng: np.random.Generator):
        super().__init__(config)
        width = config.chunk_size * config.sequence_length
        self.embed = DenseParams.init(rng, config.input_dim, width, config.activation)
        self.attention = AttentionParams.init(rng, config.chunk_size, config.latent_dim, config.similarity)
        self.decoder = DenseParams.init(rng, config.latent_dim, config.input_dim, config.output_activation)

    def arrays(self):
        return {
            **_prefixed('embed', self.embed.arrays()),
            **_prefixed('attention', self.attention.arrays()),
            **_prefixed('decoder', self.decoder.arrays()),
        }

    def _sequence(self, X: Matrix) -> Tuple[Matrix, tuple]:
        E, embed_cache = dense_forward_batch(X, self.embed)
        return E.reshape(X.shape[0], self.config.sequence_length, self.config.chunk_size), embed_cache

    def attention_weights(self, X: Matrix) -> Matrix:
        """Weights over chunk positions for every row, ``(rows, T)``."""
        U, _ = self._sequence(X)
        return attention_forward(U, self.attention)[1]

    def forward(self, X):
        U, embed_cache = self._sequence(X)
        code, _, attention_cache = attention_forward(U, self.attention)
        reconstruction, decoder_cache = dense_forward_batch(code, self.decoder)
        return reconstruction, (embed_cache, attention_cache, decoder_cache)

    def backward(self, d_reconstruction, cache):
        embed_cache, attention_cache, decoder_cache = cache
        d_code, decoder_grads = dense_backward(d_reconstruction, decoder_cache, self.decoder)
        dU, _, attention_grads = attention_backward(d_code, attention_cache, self.attention)
        _, embed_grads = dense_backward(dU.reshape(dU.shape[0], -1), embed_cache, self.embed)
        return {
            **_prefixed('embed', embed_grads),
            **_prefixed('attention', attention_grads),
            **_prefixed('decoder', decoder_grads),
        }


network_classes: Dict[Architectures, Type[Autoencoder]] = {
    Architectures.AE: DenseAutoencoder,
    Architectures.AAE: DenseAutoencoder,
    Architectures.RNNAE: RecurrentAutoencoder,
    Architectures.LSTMAE: RecurrentAutoencoder,
    Architectures.GRUAE: RecurrentAutoencoder,
    Architectures.ATAE: AttentionAutoencoder,
}


def build_network(config: ModelConfig, rng: np.random.Generator) -> Autoencoder:
    return network_classes[config.architecture](config, rng)  # type: ignore[call-arg]


class Discriminator:
    """Feedforward ``m -> ceil(m/2) -> ceil(m/4) -> 1`` with a sigmoid head."""

    def __init__(self, config: ModelConfig, rng: np.random.Generator):
        m = config.input_dim
        sizes = [m, math.ceil(m / 2), math.ceil(m / 4), 1]
        self.layers = [
            DenseParams.init(rng, n_in, n_out, config.activation)
            for n_in, n_out in zip(sizes[:-1], sizes[1:])
        ]
        self.layers[-1].activation = Activations.SIGMOID

    def arrays(self) -> Dict[str, Matrix]:
        arrays: Dict[str, Matrix] = {}
        for i, layer in enumerate(self.layers):
            arrays.update(_prefixed(f'discriminator.{i}', layer.arrays()))
        return arrays

    def forward(self, X: Matrix) -> Tuple[Matrix, list]:
        caches = []
        out = X
        for layer in self.layers:
            out, cache = dense_forward_batch(out, layer)
            caches.append(cache)
        return out[:, 0], caches

    def backward(self, d_output: Matrix, caches: list) -> Tuple[Matrix, Grads]:
        grads: Grads = {}
        d_out = d_output[:, None]
        for i in range(len(self.layers) - 1, -1, -1):
            d_out, layer_grads = dense_backward(d_out, caches[i], self.layers[i])
            grads.update(_prefixed(f'discriminator.{i}', layer_grads))
        return d_out, {name: grads[name] for name in self.arrays()}


def ae_loss(x: Matrix, x_rec: Matrix) -> float:
    """Mean absolute difference between a row and its reconstruction."""
    x = np.asarray(x, dtype=np.float64)
    x_rec = np.asarray(x_rec, dtype=np.float64)
    if x.shape != x_rec.shape:
        raise ShapeError("Reconstruction length differs from input", x.shape, x_rec.shape)
    return float(np.mean(np.abs(x - x_rec)))


def reconstruction_errors(X: Matrix, X_rec: Matrix) -> Matrix:
    """Per-row :func:`ae_loss` of a batch."""
    if X.shape != X_rec.shape:
        raise ShapeError("Reconstruction shape differs from input", X.shape, X_rec.shape)
    return np.mean(np.abs(X - X_rec), axis=1)


def discriminator_loss(d_real: Matrix, d_fake: Matrix) -> float:
    """``mean|1 - D(X)| + mean|0 - D(G(X))|``, in ``[0, 2]``.

    Raises:
        DomainError: If an output lies outside the open interval (0, 1).
    """
    d_real = np.asarray(d_real, dtype=np.float64)
    d_fake = np.asarray(d_fake, dtype=np.float64)
    for values in (d_real, d_fake):
        if values.size == 0 or np.any(values <= 0.0) or np.any(values >= 1.0):
            raise DomainError("Discriminator outputs must lie strictly inside (0, 1)")
    return float(np.mean(np.abs(1.0 - d_real)) + np.mean(np.abs(d_fake)))


def generator_loss(rec_loss: float, disc_loss: float, lam: float = DEFAULT_LAMBDA) -> float:
    """``rec_loss - lam * disc_loss``; may be negative."""
    if rec_loss < 0 or lam < 0:
        raise DomainError(f"Expected rec_loss >= 0 and lambda >= 0, got {rec_loss} and {lam}")
    return rec_loss - lam * disc_loss


def _reconstruction_grad(X: Matrix, X_rec: Matrix) -> Matrix:
    return -np.sign(X - X_rec) / X.size


def reconstruction_loss_and_grads(network: Autoencoder, X: Matrix) -> Tuple[float, Grads]:
    X_rec, cache = network.forward(X)
    loss = float(np.mean(reconstruction_errors(X, X_rec)))
    return loss, network.backward(_reconstruction_grad(X, X_rec), cache)


def generator_loss_and_grads(
        network: Autoencoder,
        discriminator: Discriminator,
        X: Matrix,
        lam: float,
) -> Tuple[float, Grads]:
    """Generator objective of the adversarial model and its gradient."""
    X_rec, cache = network.forward(X)
    rec_loss = float(np.mean(reconstruction_errors(X, X_rec)))
    d_real, _ = discriminator.forward(X)
    d_fake, fake_cache = discriminator.forward(X_rec)
    loss = generator_loss(rec_loss, discriminator_loss(d_real, d_fake), lam)

    d_reconstruction = _reconstruction_grad(X, X_rec)
    if lam != 0:
        d_adversarial, _ = discriminator.backward(np.full(X.shape[0], -lam / X.shape[0]), fake_cache)
        d_reconstruction = d_reconstruction + d_adversarial
    return loss, network.backward(d_reconstruction, cache)


def discriminator_loss_and_grads(network: Autoencoder, discriminator: Discriminator, X: Matrix) -> Tuple[float, Grads]:
    """Discriminator objective on a batch; the generator output is treated as constant."""
    X_rec = network.reconstruct(X)
    rows = X.shape[0]
    d_real, real_cache = discriminator.forward(X)
    d_fake, fake_cache = discriminator.forward(X_rec)
    loss = discriminator_loss(d_real, d_fake)
    _, real_grads = discriminator.backward(np.full(rows, -1.0 / rows), real_cache)
    _, fake_grads = discriminator.backward(np.full(rows, 1.0 / rows), fake_cache)
    return loss, {name: real_grads[name] + fake_grads[name] for name in real_grads}


@dataclass
class TrainedModel:
    config: ModelConfig
    network: Autoencoder
    discriminator: Optional[Discriminator] = None
    loss_trace: List[Tuple[int, float]] = field(default_factory=list)
    optimizer_steps: Dict[str, int] = field(default_factory=dict)

    @property
    def architecture(self) -> Architectures:
        return self.config.architecture

    @property
    def is_trained(self) -> bool:
        return bool(self.loss_trace)

    def arrays(self) -> Dict[str, Matrix]:
        arrays = dict(self.network.arrays())
        if self.discriminator is not None:
            arrays.update(self.discriminator.arrays())
        return arrays

    def reconstruct(self, X: Matrix) -> Matrix:
        if not self.is_trained:
            raise StateError(f"{self.architecture.value} model has not been trained")
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.config.input_dim:
            raise ShapeError("Input width does not match the model", X.shape, (self.config.input_dim,))
        return self.network.reconstruct(np.atleast_2d(X))


def _rows(data: Union[BooleanDataset, Matrix]) -> Matrix:
    if isinstance(data, BooleanDataset):
        return data.dense()
    return np.atleast_2d(np.asarray(data, dtype=np.float64))


def _optimizer(arrays: Mapping[str, Matrix], config: ModelConfig) -> Dict[str, AdamState]:
    return {
        name: AdamState.for_param(value, config.learning_rate, config.beta1, config.beta2, config.epsilon)
        for name, value in arrays.items()
    }


def _apply(arrays: Mapping[str, Matrix], grads: Mapping[str, Matrix], states: Mapping[str, AdamState]):
    for name, param in arrays.items():
        adam_step(param, grads[name], states[name])


def fit(
        config: ModelConfig,
        normal_rows: Union[BooleanDataset, Matrix],
        logger: Union[Logger, LoggerAdapter, None] = None,
) -> TrainedModel:
    """Train one architecture on normal rows.

    Seeds three independent streams from ``config.seed``: initialization,
    batch shuffling and discriminator initialization, so the generator of an
    AAE starts from exactly the weights of the matching AE.

    Raises:
        DomainError: If there are no training rows.
        ShapeError: If the row width differs from ``config.input_dim``.
        DivergenceError: If a batch loss is non-finite or exceeds ``config.divergence_limit``.
    """
    log = logger or logging.getLogger(__name__)
    X = _rows(normal_rows)
    if X.shape[0] == 0 or X.size == 0:
        raise DomainError(f"Cannot train {config.architecture.value} on an empty training set")
    if X.shape[1] != config.input_dim:
        raise ShapeError("Training rows do not match input_dim", X.shape, (config.input_dim,))

    init_seed, shuffle_seed, discriminator_seed = np.random.SeedSequence(config.seed).spawn(3)
    network = build_network(config, np.random.default_rng(init_seed))
    shuffle_rng = np.random.default_rng(shuffle_seed)
    adversarial = config.architecture is Architectures.AAE
    discriminator = Discriminator(config, np.random.default_rng(discriminator_seed)) if adversarial else None

    generator_states = _optimizer(network.arrays(), config)
    discriminator_states = _optimizer(discriminator.arrays(), config) if discriminator is not None else {}

    rows = X.shape[0]
    trace: List[Tuple[int, float]] = []
    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(rows)
        total = 0.0
        for start in range(0, rows, config.batch_size):
            batch = X[order[start:start + config.batch_size]]
            if discriminator is not None:
                if config.discriminator_updates:
                    _, d_grads = discriminator_loss_and_grads(network, discriminator, batch)
                    _apply(discriminator.arrays(), d_grads, discriminator_states)
                loss, grads = generator_loss_and_grads(network, discriminator, batch, config.lam or 0.0)
            else:
                loss, grads = reconstruction_loss_and_grads(network, batch)
            if not math.isfinite(loss) or loss > config.divergence_limit:
                raise DivergenceError(config.architecture.value, epoch, loss)
            _apply(network.arrays(), grads, generator_states)
            total += loss * batch.shape[0]

        if not all(np.all(np.isfinite(value)) for value in network.arrays().values()):
            raise DivergenceError(config.architecture.value, epoch, float('nan'))
        trace.append((epoch, total / rows))
        log.debug("%s epoch %d/%d mean loss %.6f", config.architecture.value, epoch, config.epochs, total / rows)

    steps = {name: state.step for name, state in {**generator_states, **discriminator_states}.items()}
    return TrainedModel(config, network, discriminator, trace, steps)


def anomaly_score(model: TrainedModel, x: Matrix) -> float:
    """Reconstruction error of a single row.

    Raises:
        StateError: If the model has no training history.
        ShapeError: If ``len(x) != m``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError("Expected a single row", x.shape)
    return ae_loss(x, model.reconstruct(x[None, :])[0])


def score_all(model: TrainedModel, dataset: Union[BooleanDataset, Matrix]) -> Matrix:
    """Anomaly score of every row, aligned with the dataset row order."""
    width = dataset.attribute_count if isinstance(dataset, BooleanDataset) else np.shape(dataset)[-1]
    if width != model.config.input_dim:
        raise ShapeError("Dataset width does not match the model", (width,), (model.config.input_dim,))
    if isinstance(dataset, BooleanDataset):
        total = dataset.row_count
        read: Callable[[int], Matrix] = lambda start: dataset.dense(start, start + SCORING_CHUNK)  # noqa: E731
    else:
        X = _rows(dataset)
        total = X.shape[0]
        read = lambda start: X[start:start + SCORING_CHUNK]  # noqa: E731

    scores = np.empty(total)
    for start in range(0, total, SCORING_CHUNK):
        chunk = read(start)
        scores[start:start + chunk.shape[0]] = reconstruction_errors(chunk, model.reconstruct(chunk))
    return scores
