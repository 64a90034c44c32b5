from typing import Any, Mapping, NamedTuple, Optional, Union

import hashlib
from importlib import import_module
import json
from logging import Logger, LoggerAdapter

import click

from .data import BooleanDataset, LabelSet

DIGEST_LENGTH = 16


def load_object(uri: str) -> Any:
    """Import ``<module>:<object>``, e.g. ``myproject.log:make_logger``."""
    module_name, _, object_name = uri.partition(':')
    if not module_name or not object_name:
        raise ValueError(f"Expected '<module>:<object>', got {uri!r}")
    module = import_module(module_name)
    return getattr(module, object_name)


def config_digest(config: Mapping[str, Any]) -> str:
    """Short SHA-256 of the canonical JSON form of ``config``."""
    canonical = json.dumps(config, sort_keys=True, separators=(',', ':'), default=str)
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:DIGEST_LENGTH]


class DatasetSummary(NamedTuple):
    os_tag: str
    scenario_tag: str
    view: str
    rows: int
    attributes: int
    attacks: int

    @property
    def attack_percent(self) -> float:
        return 100.0 * self.attacks / self.rows if self.rows else 0.0


def describe_dataset(dataset: BooleanDataset, labels: Optional[LabelSet] = None) -> DatasetSummary:
    """Rows, attributes and labeled attacks present in the dataset."""
    attacks = 0 if labels is None else sum(1 for process_id in dataset.ids if process_id in labels)
    return DatasetSummary(dataset.os_tag, dataset.scenario_tag, dataset.view.value,
                          dataset.row_count, dataset.attribute_count, attacks)


def show_dataset_info(
        logger: Union[Logger, LoggerAdapter],
        summary: DatasetSummary,
        use_ansi: bool = True,
):
    view = click.style(summary.view, fg='green') if use_ansi else summary.view
    tags = '/'.join(tag for tag in (summary.os_tag, summary.scenario_tag) if tag)
    logger.info(
        f"[{view}]{f' {tags}' if tags else ''}: {summary.rows} processes, {summary.attributes} attributes, "
        f"{summary.attacks} attacks ({summary.attack_percent:.4f}%)"
    )
