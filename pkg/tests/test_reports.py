import csv
import json

import numpy as np
import pytest

from aeapt.enums import Architectures, JobTypes, Views
from aeapt.ensemble import Evaluation, make_configs, run_ensemble, run_suite
from aeapt.evaluation import ndcg, rank_processes
from aeapt.exceptions import DomainError
from aeapt.reports import emit_report, ResultRecord
from aeapt.utils import config_digest, describe_dataset

CONFIG = {'seed': 3, 'epochs': 1}
DIGEST = config_digest(CONFIG)


def popcount_evaluator(config, train, target, labels):
    """Ranks by popcount, shifted per architecture so the models disagree."""
    shift = list(Architectures).index(config.architecture)
    scores = target.popcounts().astype(np.float64)
    scores = np.roll(scores, shift)
    ranking = rank_processes(scores, target.ids, labels)
    return Evaluation(None, ranking, ndcg(ranking))


@pytest.fixture
def ensemble(small_synthetic):
    dataset, labels = small_synthetic
    configs = make_configs(dataset.attribute_count, [Architectures.AE, Architectures.GRUAE], epochs=1)
    return run_ensemble(dataset, labels, configs, job_type=JobTypes.INLINE, evaluator=popcount_evaluator)


def read_json(paths):
    return json.loads(paths.json.read_text(encoding='utf-8'))


def test_single_record(tiny_dataset, tmp_path):
    ranking = rank_processes([0.1, 0.2, 0.9, 0.3], tiny_dataset.ids, {'p3'})
    record = ResultRecord.from_metrics(tiny_dataset.identity, 'AE', ndcg(ranking), wall_time=1.5)
    paths = emit_report([record], tmp_path, 0, CONFIG, DIGEST)
    document = read_json(paths)

    assert document['schema_version'] == 1
    assert document['config_digest'] == DIGEST
    assert document['results'] == [{
        'os': 'linux', 'scenario': 'pandex', 'view': 'PE', 'architecture': 'AE',
        'ndcg': 1.0, 'dcg': 1.0, 'idcg': 1.0, 'anomaly_ranks': [1], 'lowest_rank': 1,
        'hits': {'10': 1, '100': 1}, 'processes': 4, 'error': None, 'baseline': False,
    }]
    assert document['timings'] == {'linux/pandex/PE/AE': 1.5}
    assert document['winner'] is None
    assert paths.summary is None

    with open(paths.csv, newline='', encoding='utf-8') as file:
        rows = list(csv.DictReader(file))
    assert len(rows) == 1
    assert rows[0]['ndcg'] == '1.0'
    assert rows[0]['config_digest'] == DIGEST


def test_ensemble_report(ensemble, small_synthetic, tmp_path):
    dataset, labels = small_synthetic
    paths = emit_report([ensemble], tmp_path / 'out', 3, CONFIG, DIGEST, [describe_dataset(dataset, labels)])
    document = read_json(paths)

    assert [record['architecture'] for record in document['results']] == ['AE', 'GRUAE']
    assert [record['architecture'] for record in document['baseline']] == ['AVF']
    assert document['winner']['architecture'] == ensemble.winner.value
    assert document['winner']['ndcg'] == ensemble.winner_ndcg
    assert document['ensembles'][0]['excluded'] == []
    assert document['datasets'][0]['attacks'] == len(labels)
    assert document['summary']['by_architecture']['AVF']['count'] == 1
    assert set(document['timings']) == {'/synthetic/PA/AE', '/synthetic/PA/GRUAE', '/synthetic/PA/AVF'}

    with open(paths.summary, newline='', encoding='utf-8') as file:
        rows = list(csv.DictReader(file))
    assert [row['name'] for row in rows if row['scope'] == 'architecture'] == ['AE', 'GRUAE', 'AVF']


def test_suite_report(small_synthetic, tmp_path):
    dataset, labels = small_synthetic
    suite = run_suite({Views.PA: dataset, Views.PE: dataset.with_tags(view=Views.PE)}, labels,
                      architectures=[Architectures.AE, Architectures.ATAE], job_type=JobTypes.INLINE,
                      evaluator=popcount_evaluator)
    document = read_json(emit_report(suite, tmp_path, 3, CONFIG, DIGEST))
    view, architecture = suite.winner
    assert document['winner'] == {'os': '', 'scenario': 'synthetic', 'view': view.value,
                                  'architecture': architecture.value, 'ndcg': suite.winner_ndcg}
    assert set(document['suite']['best_by_architecture']) == {'AE', 'ATAE'}
    assert len(document['ensembles']) == 2


def test_reports_differ_only_in_timings(ensemble, tmp_path):
    first = read_json(emit_report([ensemble], tmp_path / 'a', 3, CONFIG, DIGEST))
    ensemble.outcomes[Architectures.AE].wall_time += 10.0
    second = read_json(emit_report([ensemble], tmp_path / 'b', 3, CONFIG, DIGEST))
    assert first['timings'] != second['timings']
    del first['timings'], second['timings']
    assert first == second


def test_failed_model_record(small_synthetic, tmp_path):
    dataset, labels = small_synthetic

    def evaluator(config, train, target, labels):
        if config.architecture is Architectures.AE:
            raise DomainError("no luck")
        return popcount_evaluator(config, train, target, labels)

    configs = make_configs(dataset.attribute_count, [Architectures.AE, Architectures.AAE], epochs=1)
    result = run_ensemble(dataset, labels, configs, job_type=JobTypes.INLINE, evaluator=evaluator)
    document = read_json(emit_report([result], tmp_path, 0, CONFIG, DIGEST))
    failed = document['results'][0]
    assert failed['architecture'] == 'AE'
    assert failed['ndcg'] is None
    assert failed['error'] == 'no luck'
    assert document['ensembles'][0]['excluded'] == ['AE']


def test_nothing_to_report(tmp_path):
    with pytest.raises(DomainError):
        emit_report([], tmp_path, 0, CONFIG, DIGEST)
