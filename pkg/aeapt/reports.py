"""Machine-readable result files.

``results.json`` holds the full provenance of a run. Wall-clock timings live
in its separate ``timings`` block, so two runs with the same seed, config and
data differ in nothing else. ``results.csv`` is the flat table with one record
per (os, scenario, view, architecture); ``summary.csv`` holds the box-plot
statistics.
"""

from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Sequence, Union

import csv
from dataclasses import asdict, dataclass, field
import json
from pathlib import Path

from .ensemble import EnsembleResult, score_distribution, ScoreDistribution, SuiteResult
from .evaluation import DEFAULT_CUTOFFS, MetricsReport
from .exceptions import DomainError
from .utils import DatasetSummary

SCHEMA_VERSION = 1
BASELINE_NAME = 'AVF'

RESULTS_JSON = 'results.json'
RESULTS_CSV = 'results.csv'
SUMMARY_CSV = 'summary.csv'


@dataclass
class ResultRecord:
    os: str
    scenario: str
    view: str
    architecture: str
    ndcg: Optional[float] = None
    dcg: Optional[float] = None
    idcg: Optional[float] = None
    anomaly_ranks: List[int] = field(default_factory=list)
    lowest_rank: Optional[int] = None
    hits: Dict[str, int] = field(default_factory=dict)
    processes: int = 0
    error: Optional[str] = None
    baseline: bool = False
    wall_time: float = 0.0

    @classmethod
    def from_metrics(cls, identity: Sequence[str], architecture: str, metrics: MetricsReport,
                     wall_time: float = 0.0, baseline: bool = False) -> 'ResultRecord':
        os_tag, scenario_tag, view = identity
        return cls(
            os_tag, scenario_tag, view, architecture,
            ndcg=metrics.ndcg,
            dcg=metrics.dcg,
            idcg=metrics.idcg,
            anomaly_ranks=list(metrics.anomaly_ranks),
            lowest_rank=metrics.lowest_rank,
            hits={str(cutoff): metrics.hits_at(cutoff) for cutoff in DEFAULT_CUTOFFS},
            processes=metrics.size,
            baseline=baseline,
            wall_time=wall_time,
        )

    @property
    def key(self) -> str:
        return '/'.join((self.os, self.scenario, self.view, self.architecture))

    def to_json(self) -> Dict[str, Any]:
        data = asdict(self)
        del data['wall_time']
        return data


def ensemble_records(result: EnsembleResult) -> List[ResultRecord]:
    """Model records in architecture order, then the AVF baseline."""
    records = []
    for architecture, outcome in result.outcomes.items():
        if outcome.metrics is not None:
            records.append(ResultRecord.from_metrics(result.identity, architecture.value, outcome.metrics,
                                                     outcome.wall_time))
        else:
            os_tag, scenario_tag, view = result.identity
            records.append(ResultRecord(os_tag, scenario_tag, view, architecture.value, error=outcome.error,
                                        wall_time=outcome.wall_time))
    if result.baseline is not None:
        records.append(ResultRecord.from_metrics(result.identity, BASELINE_NAME, result.baseline.metrics,
                                                 result.baseline.wall_time, baseline=True))
    return records


class ReportPaths(NamedTuple):
    json: Path
    csv: Path
    summary: Optional[Path]


def _distribution_json(distribution: ScoreDistribution) -> Dict[str, Any]:
    return {
        'by_architecture': {name: stats._asdict() for name, stats in distribution.by_architecture.items()},
        'winners_by_os': {name: stats._asdict() for name, stats in distribution.winners_by_os.items()},
    }


def _ensemble_json(result: EnsembleResult) -> Dict[str, Any]:
    return {
        'os': result.os_tag,
        'scenario': result.scenario_tag,
        'view': result.view.value,
        'winner': result.winner.value,
        'winner_ndcg': result.winner_ndcg,
        'excluded': [architecture.value for architecture in result.excluded],
        'missing_labels': result.missing_labels,
    }


def _suite_json(suite: SuiteResult) -> Dict[str, Any]:
    return {
        'best_by_architecture': {
            architecture.value: {'view': view.value, 'ndcg': value}
            for architecture, (view, value) in suite.best_by_architecture.items()
        },
        'skipped': {view.value: reason for view, reason in suite.skipped.items()},
    }


def emit_report(
        results: Union[SuiteResult, Sequence[EnsembleResult], Sequence[ResultRecord]],
        out_dir: Union[str, Path],
        seed: int,
        config: Mapping[str, Any],
        digest: str,
        datasets: Sequence[DatasetSummary] = (),
) -> ReportPaths:
    """Write results.json, results.csv and (for ensembles) summary.csv into ``out_dir``.

    Raises:
        DomainError: If there is no evaluated model.
    """
    suite: Optional[SuiteResult] = results if isinstance(results, SuiteResult) else None
    items = list(suite.ensembles.values()) if suite is not None else list(results)  # type: ignore[arg-type]
    if not items:
        raise DomainError("Nothing to report: no model was evaluated")

    ensembles = [item for item in items if isinstance(item, EnsembleResult)]
    records: List[ResultRecord] = [item for item in items if isinstance(item, ResultRecord)]
    for ensemble in ensembles:
        records.extend(ensemble_records(ensemble))

    winner: Optional[Dict[str, Any]] = None
    if suite is not None:
        view, architecture = suite.winner
        winner = {'os': suite.os_tag, 'scenario': suite.scenario_tag, 'view': view.value,
                  'architecture': architecture.value, 'ndcg': suite.winner_ndcg}
    elif len(ensembles) == 1:
        only = ensembles[0]
        winner = {'os': only.os_tag, 'scenario': only.scenario_tag, 'view': only.view.value,
                  'architecture': only.winner.value, 'ndcg': only.winner_ndcg}

    distribution = score_distribution(ensembles) if ensembles else None
    document = {
        'schema_version': SCHEMA_VERSION,
        'seed': seed,
        'config_digest': digest,
        'config': dict(config),
        'datasets': [{**summary._asdict(), 'attack_percent': summary.attack_percent} for summary in datasets],
        'results': [record.to_json() for record in records if not record.baseline],
        'baseline': [record.to_json() for record in records if record.baseline],
        'ensembles': [_ensemble_json(ensemble) for ensemble in ensembles],
        'winner': winner,
        'suite': _suite_json(suite) if suite is not None else None,
        'summary': _distribution_json(distribution) if distribution is not None else None,
        'timings': {record.key: record.wall_time for record in records},
    }

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / RESULTS_JSON
    json_path.write_text(json.dumps(document, indent=2) + '\n', encoding='utf-8')

    csv_path = out_dir / RESULTS_CSV
    with open(csv_path, 'w', newline='', encoding='utf-8') as file:
        writer = csv.writer(file, lineterminator='\n')
        writer.writerow([
            'os', 'scenario', 'view', 'architecture', 'baseline', 'ndcg', 'anomaly_ranks', 'lowest_rank',
            *(f'hits_at_{cutoff}' for cutoff in DEFAULT_CUTOFFS), 'processes', 'wall_time', 'error', 'seed',
            'config_digest',
        ])
        for record in records:
            writer.writerow([
                record.os, record.scenario, record.view, record.architecture, int(record.baseline),
                '' if record.ndcg is None else repr(record.ndcg),
                ' '.join(str(rank) for rank in record.anomaly_ranks),
                '' if record.lowest_rank is None else record.lowest_rank,
                *(record.hits.get(str(cutoff), '') for cutoff in DEFAULT_CUTOFFS),
                record.processes, f'{record.wall_time:.3f}', record.error or '', seed, digest,
            ])

    summary_path: Optional[Path] = None
    if distribution is not None:
        summary_path = out_dir / SUMMARY_CSV
        with open(summary_path, 'w', newline='', encoding='utf-8') as file:
            writer = csv.writer(file, lineterminator='\n')
            writer.writerow(['scope', 'name', 'count', 'min', 'q1', 'median', 'q3', 'max', 'seed', 'config_digest'])
            for scope, table in (('architecture', distribution.by_architecture),
                                 ('os_winner', distribution.winners_by_os)):
                for name, stats in table.items():
                    writer.writerow([scope, name, stats.count, *(repr(value) for value in stats[:5]), seed, digest])
    return ReportPaths(json_path, csv_path, summary_path)
