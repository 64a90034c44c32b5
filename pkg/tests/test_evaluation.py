from itertools import combinations
import math

import numpy as np
import pytest

from aeapt.data import BooleanDataset, LabelSet
from aeapt.evaluation import (
    avf_scores,
    dcg,
    ndcg,
    rank_avf,
    rank_processes,
    ranking_summary,
)
from aeapt.exceptions import DomainError, NumericError, ShapeError


def ranking_with_anomalies_at(ranks, size):
    """Ranking of ``size`` processes whose anomalies sit exactly at ``ranks``."""
    ids = [f'p{i}' for i in range(size)]
    scores = np.arange(size, 0, -1, dtype=np.float64)
    return rank_processes(scores, ids, {ids[rank - 1] for rank in ranks})


def test_rank_order_by_descending_score():
    ranking = rank_processes([0.9, 0.1, 0.5], ['a', 'b', 'c'], LabelSet(frozenset({'c'})))
    assert ranking.order == (0, 2, 1)
    assert ranking.ids == ('a', 'c', 'b')
    assert [entry.rank for entry in ranking.entries] == [1, 2, 3]
    assert ranking.anomaly_ranks == (2,)


def test_rank_ties_keep_row_order():
    assert rank_processes([0.3] * 5, list('abcde'), set()).order == (0, 1, 2, 3, 4)


def test_rank_is_permutation_invariant():
    rng = np.random.default_rng(0)
    scores = rng.random(20)
    ids = [f'p{i}' for i in range(20)]
    permutation = rng.permutation(20)
    first = rank_processes(scores, ids, {'p3', 'p11'})
    second = rank_processes(scores[permutation], [ids[i] for i in permutation], {'p3', 'p11'})
    assert first.ids == second.ids
    assert first.anomaly_ranks == second.anomaly_ranks


def test_rank_errors():
    with pytest.raises(ShapeError):
        rank_processes([0.1, 0.2], ['a'], set())
    with pytest.raises(NumericError):
        rank_processes([0.1, np.nan], ['a', 'b'], set())


def test_dcg_examples():
    assert dcg(ranking_with_anomalies_at([], 4)) == 0.0
    assert dcg(ranking_with_anomalies_at([1], 4)) == 1.0
    assert dcg(ranking_with_anomalies_at([4], 4)) == pytest.approx(0.43068, abs=1e-5)


def test_ndcg_ideal_ranking_is_exactly_one():
    for k in range(1, 8):
        assert ndcg(ranking_with_anomalies_at(range(1, k + 1), 10)).ndcg == 1.0
    assert ndcg(ranking_with_anomalies_at([2, 1], 5)).ndcg == 1.0


def test_ndcg_by_hand():
    metrics = ndcg(ranking_with_anomalies_at([2, 3], 3))
    assert metrics.dcg == pytest.approx(1.13093, abs=1e-5)
    assert metrics.idcg == pytest.approx(1.63093, abs=1e-5)
    assert metrics.ndcg == pytest.approx(0.69342, abs=1e-5)


def test_ndcg_single_anomaly_last():
    assert ndcg(ranking_with_anomalies_at([4], 4)).ndcg == pytest.approx(1 / math.log2(5), abs=1e-9)


def test_ndcg_without_anomalies():
    with pytest.raises(DomainError):
        ndcg(ranking_with_anomalies_at([], 4))


def test_ndcg_matches_exhaustive_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(500):
        size = int(rng.integers(1, 11))
        k = int(rng.integers(1, size + 1))
        ranks = sorted(rng.choice(np.arange(1, size + 1), size=k, replace=False).tolist())
        relevance = [1 if rank in ranks else 0 for rank in range(1, size + 1)]
        gain = sum(rel / math.log2(i + 2) for i, rel in enumerate(relevance))
        ideal = max(
            sum(1 / math.log2(rank + 1) for rank in placement)
            for placement in combinations(range(1, size + 1), k)
        )
        assert ndcg(ranking_with_anomalies_at(ranks, size)).ndcg == pytest.approx(gain / ideal, abs=1e-12)


def test_ndcg_depends_only_on_order():
    rng = np.random.default_rng(5)
    scores = rng.random(30)
    ids = [f'p{i}' for i in range(30)]
    labels = {'p2', 'p9', 'p20'}
    base = ndcg(rank_processes(scores, ids, labels)).ndcg
    assert ndcg(rank_processes(np.exp(3 * scores) - 7, ids, labels)).ndcg == base


def test_ndcg_drops_when_anomaly_swaps_down():
    better = ndcg(ranking_with_anomalies_at([2, 5], 8)).ndcg
    worse = ndcg(ranking_with_anomalies_at([2, 6], 8)).ndcg
    assert worse < better


def test_metrics_summary():
    metrics = ndcg(ranking_with_anomalies_at([3, 9, 40, 150], 200))
    summary = ranking_summary(metrics)
    assert summary.highest_rank == 3
    assert summary.lowest_rank == 150
    assert summary.hits == {10: 2, 100: 3}
    assert summary.describe() == "2 in top 10, 3 in top 100, lowest 150"


def test_avf_hand_case():
    dataset = BooleanDataset.from_dense([[1, 0], [1, 0], [0, 1]], ['r1', 'r2', 'r3'], ['a', 'b'])
    assert avf_scores(dataset) == pytest.approx([2 / 3, 2 / 3, 1 / 3], abs=1e-9)
    assert rank_avf(dataset, {'r3'}).anomaly_ranks == (1,)


def test_avf_identical_and_single_rows():
    identical = BooleanDataset.from_dense(np.tile([1, 0, 1], (4, 1)), list('abcd'), ['x', 'y', 'z'])
    assert avf_scores(identical) == pytest.approx([1.0] * 4)
    single = BooleanDataset.from_dense([[0, 1]], ['a'], ['x', 'y'])
    assert avf_scores(single) == pytest.approx([1.0])


def test_avf_is_permutation_invariant():
    rng = np.random.default_rng(9)
    matrix = (rng.random((12, 7)) < 0.4).astype(np.int8)
    ids = [f'p{i}' for i in range(12)]
    attributes = [f'a{j}' for j in range(7)]
    scores = avf_scores(BooleanDataset.from_dense(matrix, ids, attributes))
    rows, cols = rng.permutation(12), rng.permutation(7)
    permuted = avf_scores(BooleanDataset.from_dense(matrix[rows][:, cols], [ids[i] for i in rows], attributes))
    assert permuted == pytest.approx(scores[rows], abs=1e-12)


def test_avf_empty_dataset():
    with pytest.raises(DomainError):
        avf_scores(BooleanDataset((), ('a',), ()))
