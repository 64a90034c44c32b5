"""Train every architecture on a dataset and elect the one with the best nDCG.

The election is supervised model selection: it needs ground-truth labels. The
AVF baseline is evaluated next to the models and reported, but never takes
part in the election.
"""

from typing import Any, Callable, Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

from collections import defaultdict
from dataclasses import dataclass, field
import logging
from logging import Logger, LoggerAdapter
import time

import numpy as np

from .data import BooleanDataset, LabelSet, split_normal
from .enums import Architectures, JobTypes, Views
from .evaluation import MetricsReport, ndcg, rank_avf, rank_processes, RankingReport
from .exceptions import DomainError, RunError, ShapeError
from .jobs import make_job
from .models import fit, ModelConfig, score_all, TrainedModel
from .schedulers import Scheduler

LoggerHint = Union[Logger, LoggerAdapter, None]


class Evaluation(NamedTuple):
    model: Optional[TrainedModel]
    ranking: RankingReport
    metrics: MetricsReport


Evaluator = Callable[[ModelConfig, BooleanDataset, BooleanDataset, LabelSet], Evaluation]


def train_and_evaluate(config: ModelConfig, train: BooleanDataset, target: BooleanDataset,
                       labels: LabelSet) -> Evaluation:
    """Fit on ``train``, score every row of ``target`` and compute the nDCG."""
    model = fit(config, train)
    ranking = rank_processes(score_all(model, target), target.ids, labels)
    return Evaluation(model, ranking, ndcg(ranking))


@dataclass
class ModelOutcome:
    architecture: Architectures
    config: ModelConfig
    evaluation: Optional[Evaluation] = None
    error: Optional[str] = None
    error_type: Optional[str] = None
    wall_time: float = 0.0

    @property
    def ok(self) -> bool:
        return self.evaluation is not None

    @property
    def metrics(self) -> Optional[MetricsReport]:
        return self.evaluation.metrics if self.evaluation is not None else None

    @property
    def model(self) -> Optional[TrainedModel]:
        return self.evaluation.model if self.evaluation is not None else None


@dataclass
class BaselineOutcome:
    ranking: RankingReport
    metrics: MetricsReport
    wall_time: float = 0.0


@dataclass
class EnsembleResult:
    os_tag: str
    scenario_tag: str
    view: Views
    outcomes: Dict[Architectures, ModelOutcome]
    winner: Architectures
    winner_ndcg: float
    baseline: Optional[BaselineOutcome] = None
    missing_labels: List[str] = field(default_factory=list)

    @property
    def identity(self) -> Tuple[str, str, str]:
        return self.os_tag, self.scenario_tag, self.view.value

    @property
    def ndcgs(self) -> Dict[Architectures, float]:
        """nDCG of every model that finished training."""
        return {
            architecture: outcome.metrics.ndcg
            for architecture, outcome in self.outcomes.items()
            if outcome.metrics is not None
        }

    @property
    def excluded(self) -> List[Architectures]:
        return [architecture for architecture, outcome in self.outcomes.items() if not outcome.ok]


def elect(ndcgs: Mapping[Architectures, float]) -> Tuple[Architectures, float]:
    """Architecture with the maximal nDCG; ties go to the earlier architecture.

    Raises:
        RunError: If there is no candidate.
    """
    winner: Optional[Architectures] = None
    best = -np.inf
    for architecture in Architectures:
        if architecture in ndcgs and ndcgs[architecture] > best:
            winner, best = architecture, ndcgs[architecture]
    if winner is None:
        raise RunError("Every model diverged or failed; there is nothing to elect")
    return winner, float(best)


def make_configs(
        input_dim: int,
        architectures: Sequence[Architectures] = tuple(Architectures),
        **overrides: Any,
) -> Dict[Architectures, ModelConfig]:
    return {
        architecture: ModelConfig.create(architecture, input_dim, **overrides)
        for architecture in Architectures
        if architecture in architectures
    }


def _timed_baseline(dataset: BooleanDataset, labels: LabelSet) -> BaselineOutcome:
    started = time.perf_counter()
    ranking = rank_avf(dataset, labels)
    return BaselineOutcome(ranking, ndcg(ranking), time.perf_counter() - started)


def run_ensemble(
        dataset: BooleanDataset,
        labels: LabelSet,
        configs: Union[Mapping[Architectures, ModelConfig], Iterable[ModelConfig]],
        job_type: JobTypes = JobTypes.THREAD,
        max_workers: Optional[int] = None,
        evaluator: Evaluator = train_and_evaluate,
        with_baseline: bool = True,
        logger: LoggerHint = None,
        use_ansi: bool = True,
) -> EnsembleResult:
    """Train one model per config on the normal rows, rank all rows and elect a winner.

    A model that diverges or fails is recorded and excluded from the election.

    Raises:
        DomainError: If ``labels`` is empty or no labeled process is in the dataset.
        ShapeError: If a config's ``input_dim`` differs from the dataset width.
        RunError: If every model failed.
    """
    log = logger or logging.getLogger(__name__)
    if not isinstance(configs, Mapping):
        configs = {config.architecture: config for config in configs}
    ordered = [(arch, configs[arch]) for arch in Architectures if arch in configs]
    if not ordered:
        raise DomainError("No architecture selected")
    if not labels.ids:
        raise DomainError("Electing a winner needs ground-truth labels; none were given")
    for architecture, config in ordered:
        if config.input_dim != dataset.attribute_count:
            raise ShapeError(f"{architecture.value} config does not fit the {dataset.view.value} dataset",
                             (config.input_dim,), (dataset.attribute_count,))

    split = split_normal(dataset, labels)
    if len(split.missing_labels) == len(labels):
        raise DomainError(f"None of the labeled processes is in the {dataset.view.value} dataset")

    scheduler = Scheduler(max_workers=max_workers)
    for architecture, config in ordered:
        scheduler.add_job(make_job(
            job_type, evaluator, config, split.train, split.target, labels,
            name=architecture.value, logger=logger, use_ansi=use_ansi,
        ))
    try:
        results = scheduler.run()
    finally:
        scheduler.stop()

    outcomes: Dict[Architectures, ModelOutcome] = {}
    for (architecture, config), result in zip(ordered, results):
        outcomes[architecture] = ModelOutcome(
            architecture, config, result.value, result.error, result.error_type, result.wall_time,
        )
        if result.ok:
            log.info("%s on %s: nDCG %.4f (%.1fs)", architecture.value, dataset.view.value,
                     result.value.metrics.ndcg, result.wall_time)
        else:
            log.error("%s on %s excluded from the election: %s", architecture.value, dataset.view.value,
                      result.error)

    result_ndcgs = {arch: outcome.metrics.ndcg for arch, outcome in outcomes.items() if outcome.metrics}
    winner, winner_ndcg = elect(result_ndcgs)
    baseline = _timed_baseline(dataset, labels) if with_baseline else None
    if baseline is not None:
        log.info("AVF baseline on %s: nDCG %.4f", dataset.view.value, baseline.metrics.ndcg)
    log.info("Winner on %s: %s with nDCG %.4f", dataset.view.value, winner.value, winner_ndcg)

    return EnsembleResult(
        dataset.os_tag, dataset.scenario_tag, dataset.view, outcomes, winner, winner_ndcg, baseline,
        split.missing_labels,
    )


@dataclass
class SuiteResult:
    """All views of one OS and scenario."""

    os_tag: str
    scenario_tag: str
    ensembles: Dict[Views, EnsembleResult]
    best_by_architecture: Dict[Architectures, Tuple[Views, float]]
    winner: Tuple[Views, Architectures]
    winner_ndcg: float
    skipped: Dict[Views, str] = field(default_factory=dict)


def run_suite(
        views: Mapping[Views, BooleanDataset],
        labels: LabelSet,
        architectures: Sequence[Architectures] = tuple(Architectures),
        overrides: Optional[Mapping[str, Any]] = None,
        logger: LoggerHint = None,
        **ensemble_options: Any,
) -> SuiteResult:
    """Run an ensemble per view and elect the best (view, architecture) pair.

    Ties go to the earlier view in PA, PE, PX, PP, PN order, then to the
    earlier architecture. A view without any labeled process is skipped.
    """
    log = logger or logging.getLogger(__name__)
    overrides = dict(overrides or {})
    ensembles: Dict[Views, EnsembleResult] = {}
    skipped: Dict[Views, str] = {}
    for view in Views:
        if view not in views:
            continue
        dataset = views[view]
        configs = make_configs(dataset.attribute_count, architectures, **overrides)
        try:
            ensembles[view] = run_ensemble(dataset, labels, configs, logger=logger, **ensemble_options)
        except (DomainError, RunError) as e:
            log.warning("Skipping the %s view: %s", view.value, e)
            skipped[view] = str(e)
    if not ensembles:
        raise RunError("No view produced an ensemble result")

    best: Dict[Architectures, Tuple[Views, float]] = {}
    winner: Optional[Tuple[Views, Architectures]] = None
    winner_ndcg = -np.inf
    for view, ensemble in ensembles.items():
        for architecture, value in ensemble.ndcgs.items():
            if architecture not in best or value > best[architecture][1]:
                best[architecture] = (view, value)
            if value > winner_ndcg:
                winner, winner_ndcg = (view, architecture), value

    first = next(iter(ensembles.values()))
    assert winner is not None
    return SuiteResult(first.os_tag, first.scenario_tag, ensembles,
                       {arch: best[arch] for arch in Architectures if arch in best},
                       winner, float(winner_ndcg), skipped)


class FiveNumbers(NamedTuple):
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    count: int

    @classmethod
    def of(cls, values: Sequence[float]) -> 'FiveNumbers':
        minimum, q1, median, q3, maximum = (float(v) for v in np.percentile(values, [0, 25, 50, 75, 100]))
        return cls(minimum, q1, median, q3, maximum, len(values))


@dataclass
class ScoreDistribution:
    by_architecture: Dict[str, FiveNumbers]
    winners_by_os: Dict[str, FiveNumbers]


def score_distribution(results: Iterable[EnsembleResult]) -> ScoreDistribution:
    """Box-plot statistics: nDCG per architecture over all datasets and winner nDCG per OS."""
    per_architecture: Dict[str, List[float]] = defaultdict(list)
    per_os: Dict[str, List[float]] = defaultdict(list)
    for result in results:
        for architecture, value in result.ndcgs.items():
            per_architecture[architecture.value].append(value)
        if result.baseline is not None:
            per_architecture['AVF'].append(result.baseline.metrics.ndcg)
        per_os[result.os_tag].append(result.winner_ndcg)

    names = [arch.value for arch in Architectures] + ['AVF']
    return ScoreDistribution(
        {name: FiveNumbers.of(per_architecture[name]) for name in names if per_architecture[name]},
        {os_tag: FiveNumbers.of(values) for os_tag, values in sorted(per_os.items())},
    )
