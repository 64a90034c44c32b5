import hashlib

import numpy as np
import pytest

from aeapt.enums import Architectures
from aeapt.exceptions import FormatError, ShapeError
from aeapt.models import fit, ModelConfig, score_all
from aeapt.storage import dumps, load_model, loads, MAGIC, save_model


@pytest.fixture
def rows(rng):
    return (rng.random((12, 10)) < 0.3).astype(np.float64)


def train(architecture: Architectures, rows, **overrides):
    config = ModelConfig.create(architecture, rows.shape[1], epochs=2, batch_size=4, chunk_size=4, **overrides)
    return fit(config, rows)


def test_round_trip_scores_are_identical(architecture, rows, tmp_path):
    model = train(architecture, rows)
    path = save_model(model, tmp_path / 'model.aeapt')
    loaded = load_model(path)
    assert loaded.architecture is architecture
    assert loaded.config == model.config
    assert loaded.loss_trace == model.loss_trace
    assert np.array_equal(score_all(loaded, rows), score_all(model, rows))
    assert dumps(loaded) == dumps(model)


def test_equal_models_give_equal_bytes(rows):
    assert dumps(train(Architectures.AAE, rows, seed=3)) == dumps(train(Architectures.AAE, rows, seed=3))


def test_corrupt_magic():
    data = bytearray(dumps(train(Architectures.AE, np.eye(4)[[0, 1, 2, 3, 0, 1]])))
    data[0] ^= 0xFF
    with pytest.raises(FormatError):
        loads(bytes(data))


def test_truncated_file(rows):
    data = dumps(train(Architectures.GRUAE, rows))
    for size in (len(MAGIC) + 1, len(data) // 2, len(data) - 1):
        with pytest.raises(FormatError):
            loads(data[:size])


def test_flipped_parameter_byte(rows):
    data = bytearray(dumps(train(Architectures.AE, rows)))
    data[len(data) // 2] ^= 0x01
    with pytest.raises(FormatError):
        loads(bytes(data))


def test_version_mismatch(rows):
    data = bytearray(dumps(train(Architectures.AE, rows)))
    data[len(MAGIC)] = 99
    with pytest.raises(FormatError):
        loads(bytes(data))


def test_invalid_config_behind_valid_checksum(rows):
    body = dumps(train(Architectures.AE, rows))[:-hashlib.sha256().digest_size]
    tampered = body.replace(b'"epochs": 2', b'"epochs": 0', 1)
    assert tampered != body
    with pytest.raises(FormatError, match='epochs'):
        loads(tampered + hashlib.sha256(tampered).digest())


def test_loaded_model_rejects_wrong_width(rows, tmp_path):
    loaded = load_model(save_model(train(Architectures.LSTMAE, rows), tmp_path / 'lstm.aeapt'))
    with pytest.raises(ShapeError):
        score_all(loaded, np.zeros((3, 7)))
