"""Run configuration: a flat ``key = value`` text file.

Blank lines and ``#`` comments are ignored. Every key has a default, listed by
``aeapt --print-config``. Values are resolved with this precedence: explicit
command-line flag, then the ``AEAPT_OUT`` environment variable (output
directory only), then the file, then the default.
"""

from typing import Any, Callable, Dict, List, Mapping, NamedTuple, Optional, Tuple, Union

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .enums import Activations, Architectures, JobTypes, Similarities, Views
from .exceptions import ConfigError, ParseError

OUTPUT_ENV_VAR = 'AEAPT_OUT'
DATASET_PREFIX = 'dataset.'


def _parse_bool(value: str) -> bool:
    lowered = value.lower()
    if lowered in ('1', 'true', 'yes', 'on'):
        return True
    if lowered in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def _parse_list(parse: Callable[[str], Any]) -> Callable[[str], Tuple[Any, ...]]:
    def parser(value: str) -> Tuple[Any, ...]:
        return tuple(parse(item.strip()) for item in value.split(',') if item.strip())
    return parser


def _parse_architecture(value: str) -> Architectures:
    return Architectures(value.upper())


class ConfigKey(NamedTuple):
    name: str
    field: str
    parse: Callable[[str], Any]
    default: str
    description: str


CONFIG_KEYS: Tuple[ConfigKey, ...] = (
    ConfigKey('os', 'os', str, '', "Operating system tag of the datasets (e.g. linux, bsd)."),
    ConfigKey('scenario', 'scenario', str, '', "Scenario tag of the datasets (e.g. pandex, bovia)."),
    *(
        ConfigKey(f'{DATASET_PREFIX}{view.value}', 'datasets', Path, '',
                  f"{view.value} view file; .csv is dense, anything else sparse with a sibling .dict.")
        for view in Views
    ),
    ConfigKey('merge_views', 'merge_views', _parse_bool, 'false',
              "Build PA from the PE, PX, PP and PN views when no PA file is given."),
    ConfigKey('labels', 'labels', Path, '', "Ground-truth file, one anomalous process id per line."),
    ConfigKey('architectures', 'architectures', _parse_list(_parse_architecture),
              ','.join(arch.value for arch in Architectures), "Comma-separated architectures to train."),
    ConfigKey('output_dir', 'output_dir', Path, 'results', f"Artifact directory (overridden by {OUTPUT_ENV_VAR})."),
    ConfigKey('seed', 'seed', int, '0', "Seed of every model and of the synthetic generator."),
    ConfigKey('jobs', 'jobs', JobTypes, JobTypes.THREAD.value, "How models train side by side: inline|thread|process."),
    ConfigKey('epochs', 'epochs', int, '20', "Training epochs."),
    ConfigKey('batch_size', 'batch_size', int, '64', "Rows per optimizer step."),
    ConfigKey('learning_rate', 'learning_rate', float, '0.005', "Adam learning rate."),
    ConfigKey('latent_dim', 'latent_dim', int, 'min(16, max(1, m // 4))', "Latent code size n (n < m)."),
    ConfigKey('hidden_sizes', 'hidden_sizes', _parse_list(int), 'ceil(m / 2)',
              "Comma-separated hidden layer sizes of the dense encoder."),
    ConfigKey('activation', 'activation', Activations, Activations.TANH.value, "Hidden activation."),
    ConfigKey('chunk_size', 'chunk_size', int, '8', "Attributes per step of the recurrent and attention models."),
    ConfigKey('lambda', 'lam', float, '0.5', "Weight of the adversarial term of AAE."),
    ConfigKey('similarity', 'similarity', Similarities, Similarities.SCALED_DOT.value,
              "Attention similarity: scaled_dot|dot."),
)
KEYS_BY_NAME: Dict[str, ConfigKey] = {key.name: key for key in CONFIG_KEYS}


@dataclass(frozen=True)
class RunConfig:
    os: str = ''
    scenario: str = ''
    datasets: Mapping[Views, Path] = field(default_factory=dict)
    merge_views: bool = False
    labels: Optional[Path] = None
    architectures: Tuple[Architectures, ...] = tuple(Architectures)
    output_dir: Path = Path('results')
    seed: int = 0
    jobs: JobTypes = JobTypes.THREAD
    epochs: int = 20
    batch_size: int = 64
    learning_rate: float = 0.005
    latent_dim: Optional[int] = None
    hidden_sizes: Optional[Tuple[int, ...]] = None
    activation: Activations = Activations.TANH
    chunk_size: int = 8
    lam: float = 0.5
    similarity: Similarities = Similarities.SCALED_DOT

    def model_overrides(self) -> Dict[str, Any]:
        """Keyword arguments for :meth:`aeapt.models.ModelConfig.create`."""
        return {
            'epochs': self.epochs,
            'batch_size': self.batch_size,
            'learning_rate': self.learning_rate,
            'latent_dim': self.latent_dim,
            'hidden_sizes': self.hidden_sizes,
            'activation': self.activation,
            'chunk_size': self.chunk_size,
            'lam': self.lam,
            'similarity': self.similarity,
            'seed': self.seed,
        }

    def with_overrides(self, **overrides: Any) -> 'RunConfig':
        """Copy with every override that is not ``None`` applied."""
        return replace(self, **{key: value for key, value in overrides.items() if value is not None})

    def validate(self) -> 'RunConfig':
        """Check that every referenced path exists and the views can be assembled.

        Raises:
            ConfigError: On a missing file or an unusable view selection.
        """
        for view, path in self.datasets.items():
            if not Path(path).exists():
                raise ConfigError(f"dataset.{view.value} file does not exist: {path}")
        if self.labels is not None and not Path(self.labels).exists():
            raise ConfigError(f"labels file does not exist: {self.labels}")
        if not self.datasets:
            raise ConfigError("No dataset.<VIEW> key is set")
        if self.merge_views and Views.PA not in self.datasets:
            missing = [view.value for view in Views if view is not Views.PA and view not in self.datasets]
            if missing:
                raise ConfigError(f"merge_views needs every view; missing {', '.join(missing)}")
        if not self.architectures:
            raise ConfigError("No architecture selected")
        return self

    def to_dict(self) -> Dict[str, Any]:
        """Plain, JSON-ready values in key order; the basis of the config digest."""
        data: Dict[str, Any] = {}
        for item in fields(self):
            value = getattr(self, item.name)
            if item.name == 'datasets':
                value = {view.value: str(value[view]) for view in Views if view in value}
            elif item.name == 'architectures':
                value = [arch.value for arch in value]
            elif isinstance(value, Path):
                value = str(value)
            elif isinstance(value, tuple):
                value = list(value)
            elif hasattr(value, 'value'):
                value = value.value
            data[item.name] = value
        return data


def parse_lines(text: str, path: Union[str, Path] = '<config>') -> Dict[str, Tuple[str, int]]:
    """Raw ``key -> (value, line)`` pairs.

    Raises:
        ParseError: On a line without ``=``, an unknown or repeated key.
    """
    values: Dict[str, Tuple[str, int]] = {}
    for line, raw in enumerate(text.splitlines(), start=1):
        content = raw.split('#', 1)[0].strip()
        if not content:
            continue
        key, separator, value = content.partition('=')
        key, value = key.strip(), value.strip()
        if not separator:
            raise ParseError(path, line, f"expected 'key = value', got {content!r}")
        if key not in KEYS_BY_NAME:
            raise ParseError(path, line, f"unknown key {key!r}")
        if key in values:
            raise ParseError(path, line, f"key {key!r} is set twice (first on line {values[key][1]})")
        values[key] = (value, line)
    return values


def parse_config(text: str, path: Union[str, Path] = '<config>', base_dir: Optional[Path] = None) -> RunConfig:
    """Build a :class:`RunConfig` from file contents.

    Relative paths are resolved against ``base_dir``.
    """
    kwargs: Dict[str, Any] = {}
    datasets: Dict[Views, Path] = {}
    for name, (raw, line) in parse_lines(text, path).items():
        key = KEYS_BY_NAME[name]
        if not raw:
            continue
        try:
            value = key.parse(raw)
        except ValueError as e:
            raise ParseError(path, line, f"invalid value for {name}: {e}") from e
        if isinstance(value, Path) and base_dir is not None and not value.is_absolute():
            value = base_dir / value
        if key.field == 'datasets':
            datasets[Views(name[len(DATASET_PREFIX):])] = value
        else:
            kwargs[key.field] = value
    return RunConfig(datasets=datasets, **kwargs)


def load_run_config(path: Union[str, Path, None] = None, **overrides: Any) -> RunConfig:
    """Read ``path`` (if given) and apply command-line overrides on top."""
    config = RunConfig()
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding='utf-8')
        except OSError as e:
            raise ConfigError(f"Cannot read config {path}: {e}") from e
        config = parse_config(text, path, base_dir=path.parent)
    return config.with_overrides(**overrides)


def describe_defaults() -> List[str]:
    """One ``key = default  # description`` line per key."""
    width = max(len(f'{key.name} = {key.default}') for key in CONFIG_KEYS)
    return [f"{f'{key.name} = {key.default}':<{width}}  # {key.description}" for key in CONFIG_KEYS]
