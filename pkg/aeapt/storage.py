"""Versioned binary container for trained models.

Layout (little-endian)::

    b"AEAPT"  u16 version  u8 architecture tag
    u32 length + UTF-8 JSON config (sorted keys)
    u32 loss trace length, then (u32 epoch, f64 loss) pairs
    u32 parameter count, then per parameter:
        u16 name length + name, u8 ndim, u32 dims..., f64 values (C order)
    32-byte SHA-256 of everything above
"""

from typing import BinaryIO, Dict, Tuple, Union

import hashlib
import io
import json
from pathlib import Path
import struct

import numpy as np

from .enums import Architectures
from .exceptions import ConfigError, FormatError
from .models import build_network, Discriminator, ModelConfig, TrainedModel

MAGIC = b"AEAPT"
FORMAT_VERSION = 1
_DIGEST_SIZE = hashlib.sha256().digest_size

ARCHITECTURE_TAGS: Dict[Architectures, int] = {arch: tag for tag, arch in enumerate(Architectures, start=1)}


def _write_block(stream: BinaryIO, payload: bytes):
    stream.write(struct.pack('<I', len(payload)))
    stream.write(payload)


def dumps(model: TrainedModel) -> bytes:
    """Serialize ``model`` to bytes. Equal models give equal bytes."""
    stream = io.BytesIO()
    stream.write(MAGIC)
    stream.write(struct.pack('<HB', FORMAT_VERSION, ARCHITECTURE_TAGS[model.architecture]))
    _write_block(stream, json.dumps(model.config.to_dict(), sort_keys=True).encode('utf-8'))

    stream.write(struct.pack('<I', len(model.loss_trace)))
    for epoch, loss in model.loss_trace:
        stream.write(struct.pack('<Id', epoch, loss))

    arrays = model.arrays()
    stream.write(struct.pack('<I', len(arrays)))
    for name, value in arrays.items():
        encoded = name.encode('utf-8')
        stream.write(struct.pack('<H', len(encoded)))
        stream.write(encoded)
        stream.write(struct.pack('<B', value.ndim))
        stream.write(struct.pack(f'<{value.ndim}I', *value.shape))
        stream.write(np.ascontiguousarray(value, dtype='<f8').tobytes())

    body = stream.getvalue()
    return body + hashlib.sha256(body).digest()


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise FormatError("Model file is truncated")
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str) -> Tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def loads(data: bytes) -> TrainedModel:
    """Inverse of :func:`dumps`.

    Raises:
        FormatError: On wrong magic, unknown version, checksum mismatch,
            truncation, an invalid stored config or parameters that do not
            fit it.
    """
    if not data.startswith(MAGIC):
        raise FormatError("Not an aeapt model file (bad magic bytes)")
    if len(data) < len(MAGIC) + 3 + _DIGEST_SIZE:
        raise FormatError("Model file is truncated")
    body, digest = data[:-_DIGEST_SIZE], data[-_DIGEST_SIZE:]

    reader = _Reader(body)
    reader.take(len(MAGIC))
    version, tag = reader.unpack('<HB')
    if version != FORMAT_VERSION:
        raise FormatError(f"Unsupported model file version {version} (expected {FORMAT_VERSION})")
    if hashlib.sha256(body).digest() != digest:
        raise FormatError("Model file checksum mismatch (corrupted or truncated)")

    (config_size,) = reader.unpack('<I')
    try:
        config = ModelConfig.from_dict(json.loads(reader.take(config_size).decode('utf-8')))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"Unreadable config block: {e}") from e
    except ConfigError as e:
        raise FormatError(f"Stored config is invalid: {e}") from e
    if ARCHITECTURE_TAGS[config.architecture] != tag:
        raise FormatError(f"Architecture tag {tag} does not match config {config.architecture.value}")

    (trace_size,) = reader.unpack('<I')
    trace = [(int(epoch), float(loss)) for epoch, loss in (reader.unpack('<Id') for _ in range(trace_size))]

    rng = np.random.default_rng(0)
    network = build_network(config, rng)
    discriminator = Discriminator(config, rng) if config.architecture is Architectures.AAE else None
    model = TrainedModel(config, network, discriminator, trace)
    expected = model.arrays()

    (count,) = reader.unpack('<I')
    if count != len(expected):
        raise FormatError(f"Expected {len(expected)} parameters, file holds {count}")
    for name, target in expected.items():
        (name_size,) = reader.unpack('<H')
        stored_name = reader.take(name_size).decode('utf-8')
        (ndim,) = reader.unpack('<B')
        shape = reader.unpack(f'<{ndim}I')
        if stored_name != name or tuple(shape) != target.shape:
            raise FormatError(f"Parameter {stored_name}{tuple(shape)} does not match {name}{target.shape}")
        values = np.frombuffer(reader.take(8 * int(np.prod(shape, dtype=np.int64))), dtype='<f8')
        target[...] = values.reshape(shape)
    if reader.offset != len(body):
        raise FormatError("Trailing bytes after parameters")
    return model


def save_model(model: TrainedModel, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_bytes(dumps(model))
    return path


def load_model(path: Union[str, Path]) -> TrainedModel:
    return loads(Path(path).read_bytes())
