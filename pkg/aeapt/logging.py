from typing import Dict, Union

from logging import DEBUG, Formatter, getLogger, Handler, INFO, Logger, LoggerAdapter, LogRecord
from pathlib import Path
import traceback

import click
from click import style

LOGGER_NAME = 'aeapt'
prod_log_format = '%(asctime)s [%(scope)s] [%(levelname)s] - %(message)s'
empty_log_format = '%(message)s'

_PACKAGE_DIR = Path(__file__).resolve().parent


def _is_package_file(filename: str) -> bool:
    return _PACKAGE_DIR in Path(filename).resolve().parents


def _short_path(filename: str) -> str:
    path = Path(filename).resolve()
    if _PACKAGE_DIR in path.parents:
        return path.relative_to(_PACKAGE_DIR.parent).as_posix()
    return filename


class ClickFormatter(Formatter):
    def __init__(self, *args, use_ansi: bool = True, **kwargs):
        super().__init__(*args, **kwargs)
        self.use_ansi = use_ansi

    def format(self, record: LogRecord) -> str:
        # records of module loggers (aeapt.models, ...) carry no adapter extra
        if not hasattr(record, 'scope'):
            record.scope = record.name
        return super().format(record)

    def formatException(self, ei) -> str:
        """Compact traceback: one ``path:line in function`` row per frame, package frames highlighted."""
        exc_class, exc, exc_traceback = ei
        lines = []
        for frame in traceback.extract_tb(exc_traceback):
            inside = _is_package_file(frame.filename)
            location = f'  {_short_path(frame.filename)}:{frame.lineno} in {frame.name}'
            lines.append(self._paint(location, fg='cyan' if inside else 'bright_black'))
            if frame.line:
                lines.append(self._paint(f'    {frame.line}', dim=True))
        lines.append(self._paint(f'{exc_class.__name__}: {exc}', fg='red', bold=True))
        return '\n'.join(lines)

    def _paint(self, text: str, **styles) -> str:
        return style(text, **styles) if self.use_ansi else text


class ClickStreamHandler(Handler):
    """Writes records to stderr through :func:`click.echo`.

    click strips ANSI codes when stderr is not a terminal, so stdout stays
    free for machine-readable output.
    """

    def __init__(self, use_ansi: bool, level: int = INFO):
        super().__init__(level=level)
        self.use_ansi = use_ansi

    def emit(self, record):
        try:
            click.echo(self.format(record), err=True, color=None if self.use_ansi else False)
        except RecursionError:
            raise
        except Exception:  # pylint: disable=broad-except
            self.handleError(record)


def make_default_logger(use_ansi: bool, fmt: str = prod_log_format, level: int = INFO) -> Logger:
    """Configure the package logger with a single :class:`ClickStreamHandler`.

    Calling it again replaces the handler instead of stacking another one.
    """
    logger = getLogger(LOGGER_NAME)
    for handler in list(logger.handlers):
        if isinstance(handler, ClickStreamHandler):
            logger.removeHandler(handler)

    handler = ClickStreamHandler(use_ansi=use_ansi, level=level)
    handler.setFormatter(ClickFormatter(fmt, use_ansi=use_ansi))
    logger.addHandler(handler)
    logger.setLevel(level)
    logger.propagate = False
    return logger


def set_verbose(logger: Logger):
    logger.setLevel(DEBUG)
    for handler in logger.handlers:
        handler.setLevel(DEBUG)


class ScopeLoggerAdapter(LoggerAdapter):
    """Tags every record with the scope it comes from (a command or an architecture)."""

    def __init__(
            self,
            logger: Union[Logger, LoggerAdapter],
            plain_scope: str,
            styled_scope: Union[str, None] = None,
            use_ansi: bool = True,
            extra: Union[Dict[str, str], None] = None,
    ):
        if extra is None:
            extra = {}
        updated_extra = {
            "scope": (styled_scope or plain_scope) if use_ansi else plain_scope,
            **extra,
        }
        super().__init__(logger=logger, extra=updated_extra)  # type: ignore[arg-type]

    def process(self, msg, kwargs):
        kwargs['extra'] = {**self.extra, **kwargs.get('extra', {})}  # type: ignore[dict-item]
        return msg, kwargs
