"""Boolean process-trace datasets.

A dataset is a set of processes (rows) described by boolean attributes
(columns). Rows are stored sparsely as sorted tuples of the attribute indices
that are set, which keeps wide views such as PA (hundreds to thousands of
columns) cheap to hold and share between training jobs.
"""

from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

from collections import Counter
import csv
from dataclasses import dataclass, field
import logging
from pathlib import Path

import numpy as np

from .enums import DataFormats, Views
from .exceptions import ConfigError, DomainError, ParseError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

DICTIONARY_SUFFIX = '.dict'
MERGE_ORDER = (Views.PE, Views.PX, Views.PP, Views.PN)


@dataclass(frozen=True)
class BooleanDataset:
    """Immutable boolean matrix with named rows and columns."""

    ids: Tuple[str, ...]
    attributes: Tuple[str, ...]
    rows: Tuple[Tuple[int, ...], ...]
    view: Views = Views.PA
    os_tag: str = ''
    scenario_tag: str = ''

    def __post_init__(self):
        if len(self.ids) != len(self.rows):
            raise DomainError(f"{len(self.ids)} ids for {len(self.rows)} rows")
        if len(set(self.ids)) != len(self.ids):
            raise DomainError("Process ids must be unique")
        if len(set(self.attributes)) != len(self.attributes):
            raise DomainError("Attribute names must be unique")
        width = len(self.attributes)
        for process_id, row in zip(self.ids, self.rows):
            if any(index < 0 or index >= width for index in row):
                raise DomainError(f"Row {process_id!r} has an index outside 0..{width - 1}")

    @classmethod
    def from_dense(
            cls,
            matrix,
            ids: Sequence[str],
            attributes: Sequence[str],
            view: Views = Views.PA,
            os_tag: str = '',
            scenario_tag: str = '',
    ) -> 'BooleanDataset':
        matrix = np.asarray(matrix)
        if matrix.size and not np.all((matrix == 0) | (matrix == 1)):
            raise DomainError("Dense matrix must only hold 0 and 1")
        matrix = matrix.reshape(len(ids), len(attributes))
        rows = tuple(tuple(int(i) for i in np.flatnonzero(row)) for row in matrix)
        return cls(tuple(ids), tuple(attributes), rows, view, os_tag, scenario_tag)

    @property
    def row_count(self) -> int:
        return len(self.ids)

    @property
    def attribute_count(self) -> int:
        return len(self.attributes)

    @property
    def identity(self) -> Tuple[str, str, str]:
        return self.os_tag, self.scenario_tag, self.view.value

    def dense(self, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
        """The ``(rows, attributes)`` float64 matrix of 0/1 values, optionally of a row range."""
        selected = self.rows[start:stop]
        matrix = np.zeros((len(selected), self.attribute_count))
        for i, row in enumerate(selected):
            matrix[i, list(row)] = 1.0
        return matrix

    def popcounts(self) -> np.ndarray:
        return np.array([len(row) for row in self.rows], dtype=np.int64)

    def subset(self, indices: Iterable[int]) -> 'BooleanDataset':
        """Rows at ``indices`` in the given order, same columns and tags."""
        indices = list(indices)
        return BooleanDataset(
            tuple(self.ids[i] for i in indices),
            self.attributes,
            tuple(self.rows[i] for i in indices),
            self.view,
            self.os_tag,
            self.scenario_tag,
        )

    def with_tags(self, view: Optional[Views] = None, os_tag: Optional[str] = None,
                  scenario_tag: Optional[str] = None) -> 'BooleanDataset':
        return BooleanDataset(
            self.ids,
            self.attributes,
            self.rows,
            self.view if view is None else view,
            self.os_tag if os_tag is None else os_tag,
            self.scenario_tag if scenario_tag is None else scenario_tag,
        )


@dataclass(frozen=True)
class LabelSet:
    """Ids of the processes known to be anomalous."""

    ids: FrozenSet[str] = field(default_factory=frozenset)

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, process_id: object) -> bool:
        return process_id in self.ids

    def missing_from(self, dataset: BooleanDataset) -> List[str]:
        return sorted(self.ids.difference(dataset.ids))

    def relevance(self, ids: Sequence[str]) -> np.ndarray:
        """0/1 relevance aligned with ``ids``."""
        return np.array([1 if process_id in self.ids else 0 for process_id in ids], dtype=np.int64)


class NormalSplit(NamedTuple):
    train: BooleanDataset
    target: BooleanDataset
    missing_labels: List[str]


@dataclass(frozen=True)
class SyntheticSpec:
    """Imbalanced planted-anomaly generator settings.

    Normal rows set bits in the first half of the attributes; anomalous rows
    additionally set bits in the second half.
    """

    normal_count: int = 5000
    anomaly_count: int = 10
    attribute_count: int = 300
    normal_density: float = 0.05
    anomaly_tail_density: float = 0.15
    seed: int = 0

    def __post_init__(self):
        if self.normal_count < 1 or self.anomaly_count < 0:
            raise ConfigError("normal_count must be positive and anomaly_count non-negative")
        if self.anomaly_count >= self.normal_count:
            raise ConfigError(
                f"anomaly_count ({self.anomaly_count}) must be far smaller than normal_count ({self.normal_count})"
            )
        if self.attribute_count < 2:
            raise ConfigError(f"attribute_count must be at least 2, got {self.attribute_count}")
        for name in ('normal_density', 'anomaly_tail_density'):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1), got {value}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")

    @property
    def imbalance_ratio(self) -> float:
        """Anomalies per normal row, e.g. ``0.002`` for 10 in 5000."""
        return self.anomaly_count / self.normal_count


def _ensure_binary(cell: str, path: PathLike, line: int, column: str) -> int:
    if cell == '1':
        return 1
    if cell == '0':
        return 0
    raise ParseError(path, line, f"cell {cell!r} in column {column!r} is not 0 or 1")


def ingest_dense_csv(path: PathLike, view: Views = Views.PA, os_tag: str = '',
                     scenario_tag: str = '') -> BooleanDataset:
    """Read ``id,<attr>,...`` CSV with ``0``/``1`` cells.

    Raises:
        ParseError: On a bad header, ragged row, non-binary cell or duplicate id.
    """
    ids: List[str] = []
    rows: List[Tuple[int, ...]] = []
    with open(path, newline='', encoding='utf-8') as file:
        reader = csv.reader(file)
        header = next(reader, None)
        if not header or header[0] != 'id':
            raise ParseError(path, 1, "header must start with 'id'")
        attributes = header[1:]
        duplicates = [name for name, count in Counter(attributes).items() if count > 1]
        if duplicates:
            raise ParseError(path, 1, f"duplicate attribute names: {', '.join(duplicates)}")

        seen = set()
        for record in reader:
            line = reader.line_num
            if not record:
                continue
            if len(record) != len(header):
                raise ParseError(path, line, f"expected {len(header)} cells, got {len(record)}")
            process_id = record[0]
            if process_id in seen:
                raise ParseError(path, line, f"duplicate process id {process_id!r}")
            seen.add(process_id)
            ids.append(process_id)
            rows.append(tuple(
                index for index, (cell, column) in enumerate(zip(record[1:], attributes))
                if _ensure_binary(cell, path, line, column)
            ))
    return BooleanDataset(tuple(ids), tuple(attributes), tuple(rows), view, os_tag, scenario_tag)


def read_dictionary(path: PathLike) -> Tuple[str, ...]:
    attributes: List[str] = []
    seen = set()
    with open(path, encoding='utf-8') as file:
        for line, text in enumerate(file, start=1):
            name = text.strip()
            if not name:
                continue
            if name in seen:
                raise ParseError(path, line, f"duplicate attribute {name!r}")
            seen.add(name)
            attributes.append(name)
    return tuple(attributes)


def ingest_sparse(path: PathLike, dictionary: Optional[PathLike] = None, view: Views = Views.PA,
                  os_tag: str = '', scenario_tag: str = '') -> BooleanDataset:
    """Read ``id,attr,attr,...`` lines against an attribute dictionary.

    The dictionary defaults to the sibling file with the ``.dict`` suffix and
    fixes the column order.

    Raises:
        ParseError: On an unknown attribute name or duplicate id.
    """
    dictionary = Path(dictionary) if dictionary is not None else Path(path).with_suffix(DICTIONARY_SUFFIX)
    attributes = read_dictionary(dictionary)
    positions = {name: index for index, name in enumerate(attributes)}

    ids: List[str] = []
    rows: List[Tuple[int, ...]] = []
    seen = set()
    with open(path, encoding='utf-8') as file:
        for line, text in enumerate(file, start=1):
            text = text.rstrip('\r\n')
            if not text.strip():
                continue
            process_id, *names = text.split(',')
            if process_id in seen:
                raise ParseError(path, line, f"duplicate process id {process_id!r}")
            seen.add(process_id)
            indices = set()
            for name in names:
                if name not in positions:
                    raise ParseError(path, line, f"unknown attribute {name!r}")
                indices.add(positions[name])
            ids.append(process_id)
            rows.append(tuple(sorted(indices)))
    return BooleanDataset(tuple(ids), attributes, tuple(rows), view, os_tag, scenario_tag)


def format_of(path: PathLike) -> DataFormats:
    return DataFormats.DENSE if Path(path).suffix.lower() == '.csv' else DataFormats.SPARSE


def ingest(path: PathLike, view: Views = Views.PA, os_tag: str = '', scenario_tag: str = '') -> BooleanDataset:
    """Dense ingestion for ``.csv`` files, sparse ingestion for anything else."""
    if format_of(path) is DataFormats.DENSE:
        return ingest_dense_csv(path, view, os_tag, scenario_tag)
    return ingest_sparse(path, view=view, os_tag=os_tag, scenario_tag=scenario_tag)


def export_dense_csv(dataset: BooleanDataset, path: PathLike) -> Path:
    path = Path(path)
    with open(path, 'w', newline='', encoding='utf-8') as file:
        writer = csv.writer(file, lineterminator='\n')
        writer.writerow(['id', *dataset.attributes])
        for process_id, row in zip(dataset.ids, dataset.rows):
            cells = ['0'] * dataset.attribute_count
            for index in row:
                cells[index] = '1'
            writer.writerow([process_id, *cells])
    return path


def export_sparse(dataset: BooleanDataset, path: PathLike, dictionary: Optional[PathLike] = None) -> Path:
    """Write the sparse lines and the attribute dictionary next to them."""
    path = Path(path)
    dictionary = Path(dictionary) if dictionary is not None else path.with_suffix(DICTIONARY_SUFFIX)
    dictionary.write_text(''.join(f'{name}\n' for name in dataset.attributes), encoding='utf-8')
    with open(path, 'w', encoding='utf-8') as file:
        for process_id, row in zip(dataset.ids, dataset.rows):
            file.write(','.join([process_id, *(dataset.attributes[index] for index in row)]) + '\n')
    return path


def export_dataset(dataset: BooleanDataset, path: PathLike, data_format: Optional[DataFormats] = None) -> Path:
    if (data_format or format_of(path)) is DataFormats.DENSE:
        return export_dense_csv(dataset, path)
    return export_sparse(dataset, path)


def read_labels(path: PathLike) -> LabelSet:
    """One process id per line; ``#`` starts a comment."""
    ids = set()
    with open(path, encoding='utf-8') as file:
        for text in file:
            process_id = text.split('#', 1)[0].strip()
            if process_id:
                ids.add(process_id)
    return LabelSet(frozenset(ids))


def write_labels(labels: LabelSet, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(''.join(f'{process_id}\n' for process_id in sorted(labels.ids)), encoding='utf-8')
    return path


def merge_views(pe: BooleanDataset, px: BooleanDataset, pp: BooleanDataset, pn: BooleanDataset) -> BooleanDataset:
    """Disjoint union of the four views' columns (the PA view).

    Processes are the union of all views, in first-seen order over PE, PX, PP,
    PN; a process absent from a view has zeros in that view's columns. Names
    present in more than one view are prefixed with ``"<VIEW>:"``.
    """
    views = (pe, px, pp, pn)
    tags = {(view.os_tag, view.scenario_tag) for view in views}
    if len(tags) > 1:
        raise DomainError(f"Cannot merge views of different os/scenario: {sorted(tags)}")
    os_tag, scenario_tag = tags.pop()

    counts = Counter(name for view in views for name in view.attributes)
    attributes: List[str] = []
    offsets: List[int] = []
    for kind, view in zip(MERGE_ORDER, views):
        offsets.append(len(attributes))
        attributes.extend(f'{kind.value}:{name}' if counts[name] > 1 else name for name in view.attributes)

    merged: Dict[str, List[int]] = {}
    for offset, view in zip(offsets, views):
        for process_id, row in zip(view.ids, view.rows):
            merged.setdefault(process_id, []).extend(offset + index for index in row)

    return BooleanDataset(
        tuple(merged),
        tuple(attributes),
        tuple(tuple(sorted(row)) for row in merged.values()),
        Views.PA,
        os_tag,
        scenario_tag,
    )


def split_normal(dataset: BooleanDataset, labels: LabelSet) -> NormalSplit:
    """Training rows exclude labeled processes; the scoring target is the whole dataset.

    Label ids absent from the dataset are returned (and logged), not raised.
    """
    missing = labels.missing_from(dataset)
    if missing:
        logger.warning("%d labeled ids are not in the %s dataset: %s",
                       len(missing), dataset.view.value, ', '.join(missing[:10]))
    normal = [i for i, process_id in enumerate(dataset.ids) if process_id not in labels.ids]
    return NormalSplit(dataset.subset(normal), dataset, missing)


def generate_synthetic(spec: SyntheticSpec) -> Tuple[BooleanDataset, LabelSet]:
    """Seeded planted-anomaly dataset and its labels."""
    rng = np.random.default_rng(spec.seed)
    total = spec.normal_count + spec.anomaly_count
    half = spec.attribute_count // 2

    matrix = np.zeros((total, spec.attribute_count), dtype=np.int8)
    matrix[:, :half] = rng.random((total, half)) < spec.normal_density
    tail = spec.attribute_count - half
    matrix[spec.normal_count:, half:] = rng.random((spec.anomaly_count, tail)) < spec.anomaly_tail_density

    order = rng.permutation(total)
    ids = [f'p{index:06d}' for index in range(total)]
    anomalous = frozenset(ids[position] for position, source in enumerate(order) if source >= spec.normal_count)
    attributes = [f'a{index:04d}' for index in range(spec.attribute_count)]
    dataset = BooleanDataset.from_dense(matrix[order], ids, attributes, scenario_tag='synthetic')
    return dataset, LabelSet(anomalous)
