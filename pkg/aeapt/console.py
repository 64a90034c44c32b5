"""Autoencoder ensembles ranking anomalous processes in boolean provenance-trace datasets.

Ingest datasets, train and score the six autoencoder architectures, evaluate
rankings with nDCG, elect the best model per dataset and render figures.
"""

from typing import Callable, Dict, Iterator, Optional, Tuple, Union

from contextlib import contextmanager
import logging
from logging import Logger
from pathlib import Path

import click

from . import __version__
from .config import describe_defaults, load_run_config, OUTPUT_ENV_VAR, RunConfig
from .data import (
    BooleanDataset,
    export_dataset,
    generate_synthetic,
    ingest,
    LabelSet,
    merge_views,
    read_labels,
    split_normal,
    SyntheticSpec,
    write_labels,
)
from .enums import Architectures, DataFormats, FigureFormats, JobTypes, Views
from .ensemble import run_suite
from .evaluation import ndcg, rank_avf, rank_processes, ranking_summary, RankingReport
from .exceptions import AeaptException
from .figures import GridLayout, render_ranking_band, render_reconstruction_grid
from .logging import LOGGER_NAME, make_default_logger, prod_log_format, ScopeLoggerAdapter, set_verbose
from .models import fit, ModelConfig, score_all, TrainedModel
from .reports import emit_report, ResultRecord
from .storage import load_model, save_model
from .utils import config_digest, describe_dataset, load_object, show_dataset_info

logger_param_help = (
    "Path to logger factory in the following format: "
    "<module>:<logger_factory>. Example: `src.logger:make_logger`."
)
verbose_param_help = "Set DEBUG level to logger."
no_ansi_param_help = "Disable ANSI colors."
print_config_param_help = "Print every config key with its default and exit."
input_param_help = "View file as VIEW=PATH (VIEW is one of PA, PE, PX, PP, PN). Repeat for several views."
labels_param_help = "Ground-truth file, one anomalous process id per line."
config_param_help = "Run config file (flat key = value)."
out_dir_param_help = f"Output directory. Also read from ${OUTPUT_ENV_VAR}."
arch_param_help = "Autoencoder architecture."
jobs_param_help = "How models train side by side."
format_param_help = "Figure format."

AVF_SCOPE = 'AVF'


def _get_loggers(logger_uri: Optional[str], use_ansi: bool, verbose: bool) -> Tuple[Logger, ScopeLoggerAdapter]:
    logger_factory: Union[Callable[[], Logger], None] = load_object(logger_uri) if logger_uri else None
    logger: Logger = (
        logger_factory()
        if logger_factory
        else make_default_logger(use_ansi=use_ansi, fmt=prod_log_format)
    )
    if verbose:
        set_verbose(logger)
        set_verbose(logging.getLogger(LOGGER_NAME))

    wrapped_logger = ScopeLoggerAdapter(
        logger,
        plain_scope='aeapt',
        styled_scope=click.style('aeapt', fg='magenta'),
        use_ansi=use_ansi,
    )
    return logger, wrapped_logger


def logging_options(func):
    func = click.option('--no-ansi', 'disable_ansi', is_flag=True, help=no_ansi_param_help)(func)
    func = click.option('--verbose', '-V', 'verbose', is_flag=True, help=verbose_param_help)(func)
    func = click.option('--logger', '-L', 'logger_uri', help=logger_param_help)(func)
    return func


@contextmanager
def reported_errors() -> Iterator[None]:
    """Turn package errors into a one-line diagnostic with exit code 1."""
    try:
        yield
    except AeaptException as e:
        raise click.ClickException(str(e)) from e
    except OSError as e:
        raise click.ClickException(f"{e.strerror or e}: {e.filename}" if e.filename else str(e)) from e


def _require_labels(labels: Optional[Path], hint: str = "--labels") -> LabelSet:
    if labels is None:
        raise click.ClickException(
            f"Ground-truth labels are required here; pass {hint} PATH (one anomalous process id per line)."
        )
    return read_labels(labels)


def _parse_view_input(ctx, param, values) -> Dict[Views, Path]:  # pylint: disable=unused-argument
    inputs: Dict[Views, Path] = {}
    for value in values:
        view_name, separator, path = value.partition('=')
        try:
            view = Views(view_name.strip().upper())
        except ValueError:
            raise click.BadParameter(f"{value!r} does not start with one of PA, PE, PX, PP, PN") from None
        if not separator or not path:
            raise click.BadParameter(f"expected VIEW=PATH, got {value!r}")
        inputs[view] = Path(path)
    return inputs


def _load_views(paths: Dict[Views, Path], os_tag: str, scenario_tag: str, merge: bool) -> Dict[Views, BooleanDataset]:
    views = {view: ingest(path, view, os_tag, scenario_tag) for view, path in paths.items()}
    parts = (Views.PE, Views.PX, Views.PP, Views.PN)
    if merge and Views.PA not in views and all(view in views for view in parts):
        views[Views.PA] = merge_views(*(views[view] for view in parts))
    return {view: views[view] for view in Views if view in views}


def _score_ranking(dataset: BooleanDataset, labels: LabelSet, model_path: Optional[Path],
                   use_avf: bool) -> Tuple[str, RankingReport, int, str]:
    """Ranking from a model file or from the AVF baseline, with its seed and digest."""
    if use_avf == (model_path is not None):
        raise click.UsageError("Pass exactly one of --model PATH and --avf.")
    if use_avf:
        return AVF_SCOPE, rank_avf(dataset, labels), 0, config_digest({'scorer': AVF_SCOPE})
    model = load_model(model_path)  # type: ignore[arg-type]
    ranking = rank_processes(score_all(model, dataset), dataset.ids, labels)
    return model.architecture.value, ranking, model.config.seed, config_digest(model.config.to_dict())


@click.group(help=__doc__, invoke_without_command=True)
@click.version_option(__version__)
@click.option('--print-config', 'print_config', is_flag=True, help=print_config_param_help)
@click.pass_context
def main(ctx: click.Context, print_config: bool):
    if print_config:
        for line in describe_defaults():
            click.echo(line)
        ctx.exit(0)
    if ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())
        ctx.exit(2)


@main.command(name='ingest')
@click.option(
    '--input', '-i', 'inputs',
    multiple=True,
    required=True,
    callback=_parse_view_input,
    help=input_param_help,
)
@click.option('--labels', 'labels', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help=labels_param_help)
@click.option('--os', 'os_tag', default='', help="Operating system tag.")
@click.option('--scenario', 'scenario_tag', default='', help="Scenario tag.")
@click.option('--no-merge', 'no_merge', is_flag=True, help="Do not build PA from the four views.")
@click.option('--export', 'export_path', type=click.Path(dir_okay=False, path_type=Path),
              help="Write the dataset (PA when merged) to this file.")
@click.option(
    '--export-format', 'export_format',
    type=click.Choice([data_format.value for data_format in DataFormats]),
    help="Export format. Defaults to dense for .csv, sparse otherwise.",
)
@logging_options
def ingest_command(inputs: Dict[Views, Path], labels: Optional[Path], os_tag: str, scenario_tag: str,
                   no_merge: bool, export_path: Optional[Path], export_format: Optional[str],
                   logger_uri: Optional[str], verbose: bool, disable_ansi: bool):
    """Ingest dataset views, print their summaries and optionally export them."""
    use_ansi = not disable_ansi
    _, wrapped_logger = _get_loggers(logger_uri, use_ansi, verbose)

    with reported_errors():
        views = _load_views(inputs, os_tag, scenario_tag, merge=not no_merge)
        label_set = read_labels(labels) if labels is not None else None
        for dataset in views.values():
            show_dataset_info(wrapped_logger, describe_dataset(dataset, label_set), use_ansi=use_ansi)

        if export_path is not None:
            if Views.PA in views:
                target = views[Views.PA]
            elif len(views) == 1:
                target = next(iter(views.values()))
            else:
                raise click.UsageError("--export needs a single view or the four views to merge into PA.")
            export_dataset(target, export_path, DataFormats(export_format) if export_format else None)
            wrapped_logger.info("Dataset written to %s", export_path)


@main.command()
@click.option('--normal', 'normal_count', default=5000, show_default=True, type=click.IntRange(min=1),
              help="Normal processes.")
@click.option('--anomalies', 'anomaly_count', default=10, show_default=True, type=click.IntRange(min=0),
              help="Anomalous processes.")
@click.option('--attributes', 'attribute_count', default=300, show_default=True, type=click.IntRange(min=2),
              help="Attributes per process.")
@click.option('--normal-density', default=0.05, show_default=True, type=float,
              help="Probability of a set bit in the first half of a row.")
@click.option('--tail-density', default=0.15, show_default=True, type=float,
              help="Probability of an extra set bit in the second half of an anomalous row.")
@click.option('--seed', default=0, show_default=True, type=click.IntRange(min=0), help="Generator seed.")
@click.option('--format', 'data_format', default=DataFormats.DENSE.value, show_default=True,
              type=click.Choice([data_format.value for data_format in DataFormats]), help="Dataset file format.")
@click.option('--out', 'out_dir', required=True, type=click.Path(file_okay=False, path_type=Path),
              help="Directory receiving the dataset and labels.txt.")
@logging_options
def synth(normal_count: int, anomaly_count: int, attribute_count: int, normal_density: float, tail_density: float,
          seed: int, data_format: str, out_dir: Path, logger_uri: Optional[str], verbose: bool, disable_ansi: bool):
    """Generate a seeded planted-anomaly dataset."""
    use_ansi = not disable_ansi
    _, wrapped_logger = _get_loggers(logger_uri, use_ansi, verbose)

    with reported_errors():
        spec = SyntheticSpec(normal_count, anomaly_count, attribute_count, normal_density, tail_density, seed)
        dataset, labels = generate_synthetic(spec)
        out_dir.mkdir(parents=True, exist_ok=True)
        file_format = DataFormats(data_format)
        data_path = out_dir / ('synthetic.csv' if file_format is DataFormats.DENSE else 'synthetic.sparse')
        export_dataset(dataset, data_path, file_format)
        labels_path = write_labels(labels, out_dir / 'labels.txt')

        show_dataset_info(wrapped_logger, describe_dataset(dataset, labels), use_ansi=use_ansi)
        wrapped_logger.info("Imbalance ratio %.4f%%; written %s and %s",
                            100 * spec.imbalance_ratio, data_path, labels_path)


@main.command()
@click.argument('dataset_path', metavar='DATASET', type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option('--labels', 'labels', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Labeled processes are left out of training.")
@click.option('--arch', 'architecture', default=Architectures.AE.value, show_default=True,
              type=click.Choice([arch.value for arch in Architectures], case_sensitive=False), help=arch_param_help)
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help=config_param_help)
@click.option('--epochs', type=click.IntRange(min=1), help="Training epochs.")
@click.option('--seed', type=click.IntRange(min=0), help="Training seed.")
@click.option('--model-out', 'model_out', required=True, type=click.Path(dir_okay=False, path_type=Path),
              help="Model file to write.")
@logging_options
def train(dataset_path: Path, labels: Optional[Path], architecture: str, config_path: Optional[Path],
          epochs: Optional[int], seed: Optional[int], model_out: Path, logger_uri: Optional[str], verbose: bool,
          disable_ansi: bool):
    """Train one architecture on the normal rows of DATASET."""
    use_ansi = not disable_ansi
    logger, wrapped_logger = _get_loggers(logger_uri, use_ansi, verbose)

    with reported_errors():
        run_config = load_run_config(config_path, epochs=epochs, seed=seed)
        dataset = ingest(dataset_path)
        train_rows = split_normal(dataset, read_labels(labels)).train if labels is not None else dataset
        config = ModelConfig.create(Architectures(architecture.upper()), dataset.attribute_count,
                                    **run_config.model_overrides())
        model_logger = ScopeLoggerAdapter(logger, config.architecture.value,
                                          click.style(config.architecture.value, fg='blue'), use_ansi)
        model = fit(config, train_rows, logger=model_logger)
        save_model(model, model_out)
        wrapped_logger.info("%s trained on %d rows, final loss %.6f; written %s", config.architecture.value,
                            train_rows.row_count, model.loss_trace[-1][1], model_out)


@main.command()
@click.argument('model_path', metavar='MODEL', type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument('dataset_path', metavar='DATASET', type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option('--out', 'out_path', required=True, type=click.Path(dir_okay=False, path_type=Path),
              help="CSV file of id,score.")
@logging_options
def score(model_path: Path, dataset_path: Path, out_path: Path, logger_uri: Optional[str], verbose: bool,
          disable_ansi: bool):
    """Write the anomaly score of every process of DATASET."""
    _, wrapped_logger = _get_loggers(logger_uri, not disable_ansi, verbose)

    with reported_errors():
        model = load_model(model_path)
        dataset = ingest(dataset_path)
        scores = score_all(model, dataset)
        digest = config_digest(model.config.to_dict())
        lines = [f'# seed={model.config.seed} config={digest}', 'id,score']
        lines.extend(f'{process_id},{value!r}' for process_id, value in zip(dataset.ids, scores.tolist()))
        out_path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
        wrapped_logger.info("%d scores written to %s", len(scores), out_path)


@main.command()
@click.argument('dataset_path', metavar='DATASET', type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option('--labels', 'labels', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help=labels_param_help)
@click.option('--model', 'model_path', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Model file to evaluate.")
@click.option('--avf', 'use_avf', is_flag=True, help="Evaluate the AVF baseline instead of a model.")
@click.option('--out', 'out_dir', default=Path('results'), show_default=True, envvar=OUTPUT_ENV_VAR,
              type=click.Path(file_okay=False, path_type=Path), help=out_dir_param_help)
@click.option('--view', 'view', default=Views.PA.value, show_default=True,
              type=click.Choice([view.value for view in Views]), help="View tag of DATASET.")
@logging_options
def evaluate(dataset_path: Path, labels: Optional[Path], model_path: Optional[Path], use_avf: bool, out_dir: Path,
             view: str, logger_uri: Optional[str], verbose: bool, disable_ansi: bool):
    """Rank DATASET with a model (or AVF) and report its nDCG."""
    _, wrapped_logger = _get_loggers(logger_uri, not disable_ansi, verbose)

    with reported_errors():
        label_set = _require_labels(labels)
        dataset = ingest(dataset_path, Views(view))
        name, ranking, seed, digest = _score_ranking(dataset, label_set, model_path, use_avf)
        metrics = ndcg(ranking)
        record = ResultRecord.from_metrics(dataset.identity, name, metrics)
        paths = emit_report([record], out_dir, seed, {'scorer': name, 'dataset': str(dataset_path)}, digest,
                            [describe_dataset(dataset, label_set)])
        wrapped_logger.info("%s: nDCG %.4f (%s)", name, metrics.ndcg, ranking_summary(metrics).describe())
        wrapped_logger.info("Report written to %s", paths.json)


@main.command()
@click.option('--config', 'config_path', required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help=config_param_help)
@click.option('--labels', 'labels', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help=labels_param_help)
@click.option('--out', 'out_dir', envvar=OUTPUT_ENV_VAR, type=click.Path(file_okay=False, path_type=Path),
              help=out_dir_param_help)
@click.option('--jobs', 'job_type', type=click.Choice([job_type.value for job_type in JobTypes]),
              help=jobs_param_help)
@click.option('--seed', type=click.IntRange(min=0), help="Seed of every model.")
@click.option('--epochs', type=click.IntRange(min=1), help="Training epochs.")
@logging_options
def ensemble(config_path: Path, labels: Optional[Path], out_dir: Optional[Path], job_type: Optional[str],
             seed: Optional[int], epochs: Optional[int], logger_uri: Optional[str], verbose: bool,
             disable_ansi: bool):
    """Train every selected architecture on every view and elect the winners."""
    use_ansi = not disable_ansi
    logger, wrapped_logger = _get_loggers(logger_uri, use_ansi, verbose)

    with reported_errors():
        run_config: RunConfig = load_run_config(
            config_path,
            labels=labels,
            output_dir=out_dir,
            jobs=JobTypes(job_type) if job_type else None,
            seed=seed,
            epochs=epochs,
        ).validate()
        label_set = _require_labels(run_config.labels, hint="--labels (or the labels key)")

        views = _load_views(dict(run_config.datasets), run_config.os, run_config.scenario, run_config.merge_views)
        summaries = [describe_dataset(dataset, label_set) for dataset in views.values()]
        for summary in summaries:
            show_dataset_info(wrapped_logger, summary, use_ansi=use_ansi)

        suite = run_suite(
            views, label_set,
            architectures=run_config.architectures,
            overrides=run_config.model_overrides(),
            logger=logger,
            job_type=run_config.jobs,
            use_ansi=use_ansi,
        )

        provenance = run_config.to_dict()
        for key in ('output_dir', 'jobs'):
            provenance.pop(key)
        digest = config_digest(provenance)
        models_dir = run_config.output_dir / 'models'
        models_dir.mkdir(parents=True, exist_ok=True)
        for view, result in suite.ensembles.items():
            for architecture, outcome in result.outcomes.items():
                if outcome.model is not None:
                    save_model(outcome.model, models_dir / f'{view.value}-{architecture.value}.aeapt')

        paths = emit_report(suite, run_config.output_dir, run_config.seed, provenance, digest, summaries)
        winner_view, winner_architecture = suite.winner
        winner = f"{winner_architecture.value} on {winner_view.value}"
        wrapped_logger.info(
            "Winner: %s with nDCG %.4f",
            click.style(winner, fg='green') if use_ansi else winner,
            suite.winner_ndcg,
        )
        wrapped_logger.info("Results written to %s", paths.json.parent)


@main.command(name='render-band')
@click.argument('dataset_path', metavar='DATASET', type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option('--labels', 'labels', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help=labels_param_help)
@click.option('--model', 'model_path', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Model file ranking the processes.")
@click.option('--avf', 'use_avf', is_flag=True, help="Rank with the AVF baseline instead of a model.")
@click.option('--title', default='', help="Figure title; the nDCG is always appended.")
@click.option('--out', 'out_path', required=True, type=click.Path(dir_okay=False, path_type=Path),
              help="SVG file to write.")
@logging_options
def render_band(dataset_path: Path, labels: Optional[Path], model_path: Optional[Path], use_avf: bool, title: str,
                out_path: Path, logger_uri: Optional[str], verbose: bool, disable_ansi: bool):
    """Draw where the labeled anomalies land in the ranking of DATASET."""
    _, wrapped_logger = _get_loggers(logger_uri, not disable_ansi, verbose)

    with reported_errors():
        label_set = _require_labels(labels)
        dataset = ingest(dataset_path)
        name, ranking, seed, digest = _score_ranking(dataset, label_set, model_path, use_avf)
        render_ranking_band(ranking, out_path, title=title or name, seed=seed, digest=digest)
        wrapped_logger.info("Ranking band written to %s", out_path)


@main.command(name='render-grid')
@click.argument('dataset_path', metavar='DATASET', type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option('--model', 'model_path', required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Model reconstructing the process.")
@click.option('--process', 'process_id', required=True, help="Id of the process to draw.")
@click.option('--format', 'figure_format', default=FigureFormats.SVG.value, show_default=True,
              type=click.Choice([figure_format.value for figure_format in FigureFormats]), help=format_param_help)
@click.option('--out', 'out_path', required=True, type=click.Path(dir_okay=False, path_type=Path),
              help="Figure file to write.")
@logging_options
def render_grid(dataset_path: Path, model_path: Path, process_id: str, figure_format: str, out_path: Path,
                logger_uri: Optional[str], verbose: bool, disable_ansi: bool):
    """Draw a process, its reconstruction and the reconstruction error as grids."""
    _, wrapped_logger = _get_loggers(logger_uri, not disable_ansi, verbose)

    with reported_errors():
        model: TrainedModel = load_model(model_path)
        dataset = ingest(dataset_path)
        if process_id not in dataset.ids:
            raise click.ClickException(f"Process {process_id!r} is not in {dataset_path}")
        index = dataset.ids.index(process_id)
        row = dataset.dense(index, index + 1)[0]
        reconstruction = model.reconstruct(row[None, :])[0]
        render_reconstruction_grid(
            row, reconstruction, GridLayout.for_size(dataset.attribute_count), out_path,
            figure_format=FigureFormats(figure_format),
            title=f"{model.architecture.value} {process_id}",
            seed=model.config.seed,
            digest=config_digest(model.config.to_dict()),
        )
        wrapped_logger.info("Reconstruction grid written to %s", out_path)
