import logging

import numpy as np
import pytest

from aeapt.data import BooleanDataset, generate_synthetic, LabelSet, SyntheticSpec
from aeapt.enums import Architectures, Views
from aeapt.logging import LOGGER_NAME

FAST = {'epochs': 2, 'batch_size': 32}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_dataset():
    return BooleanDataset.from_dense(
        [[1, 0, 0],
         [1, 0, 0],
         [0, 1, 1],
         [1, 1, 0]],
        ids=['p1', 'p2', 'p3', 'p4'],
        attributes=['EVENT_OPEN', 'EVENT_READ', 'EVENT_CONNECT'],
        view=Views.PE,
        os_tag='linux',
        scenario_tag='pandex',
    )


@pytest.fixture
def small_synthetic():
    return generate_synthetic(SyntheticSpec(
        normal_count=240,
        anomaly_count=4,
        attribute_count=24,
        normal_density=0.1,
        anomaly_tail_density=0.4,
        seed=7,
    ))


@pytest.fixture
def small_labels(small_synthetic) -> LabelSet:
    return small_synthetic[1]


@pytest.fixture
def fast_overrides():
    return dict(FAST)


@pytest.fixture(params=list(Architectures), ids=lambda arch: arch.value)
def architecture(request):
    return request.param


@pytest.fixture
def aeapt_log(caplog):
    """caplog wired to the package logger, which does not propagate once the CLI configured it."""
    package_logger = logging.getLogger(LOGGER_NAME)
    package_logger.addHandler(caplog.handler)
    try:
        yield caplog
    finally:
        package_logger.removeHandler(caplog.handler)
