"""Rankings of processes by anomaly score and their nDCG.

Relevance is binary: a ranked entry is relevant iff its process is labeled
anomalous. DCG is summed over the full list in ascending rank order, and the
ideal DCG uses the same loop over ranks ``1..k``, so a ranking with every
anomaly on top scores exactly ``1.0``.
"""

from typing import Dict, Iterable, NamedTuple, Sequence, Tuple, Union

from dataclasses import dataclass
import math

import numpy as np

from .data import BooleanDataset, LabelSet
from .exceptions import DomainError, NumericError, ShapeError

DEFAULT_CUTOFFS = (10, 100)


class RankingEntry(NamedTuple):
    process_id: str
    score: float
    rank: int
    relevance: int
    row: int


@dataclass(frozen=True)
class RankingReport:
    """Processes sorted from most to least anomalous (1-based ranks)."""

    entries: Tuple[RankingEntry, ...]

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def anomaly_count(self) -> int:
        return sum(entry.relevance for entry in self.entries)

    @property
    def anomaly_ranks(self) -> Tuple[int, ...]:
        return tuple(entry.rank for entry in self.entries if entry.relevance)

    @property
    def order(self) -> Tuple[int, ...]:
        """Original row index of every ranked entry."""
        return tuple(entry.row for entry in self.entries)

    @property
    def ids(self) -> Tuple[str, ...]:
        return tuple(entry.process_id for entry in self.entries)


@dataclass(frozen=True)
class MetricsReport:
    dcg: float
    idcg: float
    ndcg: float
    anomaly_ranks: Tuple[int, ...]
    size: int

    @property
    def lowest_rank(self) -> int:
        """Worst (numerically largest) rank of an anomaly."""
        return max(self.anomaly_ranks)

    @property
    def highest_rank(self) -> int:
        return min(self.anomaly_ranks)

    def hits_at(self, cutoff: int) -> int:
        """Number of anomalies ranked within the top ``cutoff``."""
        return sum(1 for rank in self.anomaly_ranks if rank <= cutoff)


class RankingSummary(NamedTuple):
    highest_rank: int
    lowest_rank: int
    hits: Dict[int, int]

    def describe(self) -> str:
        hits = ', '.join(f"{count} in top {cutoff}" for cutoff, count in sorted(self.hits.items()))
        return f"{hits}, lowest {self.lowest_rank}"


def rank_processes(
        scores: Union[np.ndarray, Sequence[float]],
        ids: Sequence[str],
        labels: Union[LabelSet, Iterable[str]],
) -> RankingReport:
    """Sort processes by descending score; equal scores keep their row order.

    Raises:
        ShapeError: If ``scores`` and ``ids`` differ in length.
        NumericError: If a score is NaN or infinite.
    """
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    if scores.shape[0] != len(ids):
        raise ShapeError("Scores and ids are not aligned", scores.shape, (len(ids),))
    if not np.all(np.isfinite(scores)):
        raise NumericError("Cannot rank non-finite scores")
    anomalous = labels.ids if isinstance(labels, LabelSet) else frozenset(labels)

    order = np.argsort(-scores, kind='stable')
    return RankingReport(tuple(
        RankingEntry(ids[row], float(scores[row]), rank, 1 if ids[row] in anomalous else 0, int(row))
        for rank, row in enumerate(order, start=1)
    ))


def _discounted(ranks: Iterable[int]) -> float:
    total = 0.0
    for rank in ranks:
        total += 1.0 / math.log2(rank + 1)
    return total


def dcg(ranking: RankingReport) -> float:
    """``sum(rel_i / log2(i + 1))`` over 1-based ranks."""
    return _discounted(ranking.anomaly_ranks)


def idcg(anomaly_count: int) -> float:
    """DCG of the ranking with all anomalies on top."""
    return _discounted(range(1, anomaly_count + 1))


def ndcg(ranking: RankingReport) -> MetricsReport:
    """Normalized DCG of a ranking.

    Raises:
        DomainError: If the ranking holds no anomaly.
    """
    k = ranking.anomaly_count
    if k == 0:
        raise DomainError("nDCG is undefined without any labeled anomaly in the ranking")
    gain, ideal = dcg(ranking), idcg(k)
    return MetricsReport(gain, ideal, gain / ideal, ranking.anomaly_ranks, ranking.size)


def ranking_summary(metrics: MetricsReport, cutoffs: Sequence[int] = DEFAULT_CUTOFFS) -> RankingSummary:
    return RankingSummary(
        metrics.highest_rank,
        metrics.lowest_rank,
        {cutoff: metrics.hits_at(cutoff) for cutoff in cutoffs},
    )


def avf_scores(dataset: BooleanDataset) -> np.ndarray:
    """Attribute Value Frequency of every row; lower means more anomalous.

    ``avf(row) = mean_j freq_j(row[j])`` where ``freq_j(v)`` is the share of
    rows holding value ``v`` in column ``j``.

    Raises:
        DomainError: If the dataset has no rows or no attributes.
    """
    rows, width = dataset.row_count, dataset.attribute_count
    if rows == 0 or width == 0:
        raise DomainError("AVF needs at least one row and one attribute")
    counts = np.zeros(width)
    for row in dataset.rows:
        counts[list(row)] += 1.0
    frequency = counts / rows
    # a row with no bits set scores sum(1 - f); every set bit j swaps (1 - f_j) for f_j
    base = float(np.sum(1.0 - frequency))
    shift = 2.0 * frequency - 1.0
    return np.array([(base + float(np.sum(shift[list(row)]))) / width for row in dataset.rows])


def rank_avf(dataset: BooleanDataset, labels: Union[LabelSet, Iterable[str]]) -> RankingReport:
    """Ranking under the AVF baseline (ascending AVF, ranked on its negation)."""
    return rank_processes(-avf_scores(dataset), dataset.ids, labels)
