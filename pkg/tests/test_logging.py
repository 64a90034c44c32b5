import logging
import sys

import numpy as np
import pytest

from aeapt.exceptions import ShapeError
from aeapt.logging import ClickFormatter, ClickStreamHandler, LOGGER_NAME, make_default_logger
from aeapt.tensor import matmul


def make_record(name='aeapt.models', exc_info=None):
    return logging.LogRecord(name, logging.ERROR, __file__, 1, 'training failed', None, exc_info)


def failed_matmul():
    try:
        matmul(np.ones((2, 3)), np.ones((2, 3)))
    except ShapeError:
        return sys.exc_info()
    pytest.fail('matmul accepted mismatched shapes')


def test_module_records_use_logger_name_as_scope():
    formatter = ClickFormatter('[%(scope)s] %(message)s', use_ansi=False)
    assert formatter.format(make_record()) == '[aeapt.models] training failed'


def test_exception_lists_package_frames_relative():
    lines = ClickFormatter(use_ansi=False).formatException(failed_matmul()).split('\n')
    assert any(line.startswith('  aeapt/tensor.py:') and line.endswith(' in matmul') for line in lines)
    assert any(line.strip().startswith('raise ShapeError') for line in lines)
    assert lines[-1] == 'ShapeError: Cannot multiply: (2, 3) vs (2, 3)'
    assert not any('\x1b[' in line for line in lines)


def test_exception_is_styled_with_ansi():
    text = ClickFormatter(use_ansi=True).formatException(failed_matmul())
    assert '\x1b[' in text
    assert 'ShapeError: Cannot multiply' in text


def test_record_with_exception_ends_with_error_line():
    text = ClickFormatter('%(message)s', use_ansi=False).format(make_record(exc_info=failed_matmul()))
    assert text.startswith('training failed\n')
    assert text.endswith('ShapeError: Cannot multiply: (2, 3) vs (2, 3)')


def test_default_logger_is_configured_once():
    logger = logging.getLogger(LOGGER_NAME)
    saved = list(logger.handlers), logger.level, logger.propagate
    try:
        make_default_logger(use_ansi=False)
        make_default_logger(use_ansi=False)
        assert sum(isinstance(handler, ClickStreamHandler) for handler in logger.handlers) == 1
        assert logger.propagate is False
    finally:
        logger.handlers[:] = saved[0]
        logger.setLevel(saved[1])
        logger.propagate = saved[2]
