import logging

import pytest

from aeapt.data import LabelSet
from aeapt.utils import config_digest, DatasetSummary, describe_dataset, load_object, show_dataset_info


def test_load_object():
    assert load_object('aeapt.utils:config_digest') is config_digest


@pytest.mark.parametrize('uri', ['aeapt.utils', ':config_digest', 'aeapt.utils:'])
def test_load_object_bad_format(uri):
    with pytest.raises(ValueError):
        load_object(uri)


def test_config_digest_is_canonical():
    digest = config_digest({'seed': 1, 'epochs': 20})
    assert len(digest) == 16
    assert int(digest, 16) >= 0
    assert digest == config_digest({'epochs': 20, 'seed': 1})
    assert digest != config_digest({'epochs': 21, 'seed': 1})


def test_describe_dataset(tiny_dataset):
    summary = describe_dataset(tiny_dataset, LabelSet(frozenset({'p3', 'ghost'})))
    assert summary == DatasetSummary('linux', 'pandex', 'PE', 4, 3, 1)
    assert summary.attack_percent == 25.0
    assert describe_dataset(tiny_dataset).attacks == 0


def test_show_dataset_info(tiny_dataset, aeapt_log):
    logger = logging.getLogger('aeapt')
    with aeapt_log.at_level(logging.INFO, logger='aeapt'):
        show_dataset_info(logger, describe_dataset(tiny_dataset), use_ansi=False)
    assert "[PE] linux/pandex: 4 processes, 3 attributes, 0 attacks (0.0000%)" in aeapt_log.text
