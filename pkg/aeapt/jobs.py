"""One-shot jobs used to train several models side by side.

Job flavours (see :data:`jobs_classes`):
    * :class:`InlineJob` runs in the caller's thread when started
    * :class:`ThreadJob` runs in a :class:`threading.Thread`
    * :class:`ProcessJob` runs in a :class:`multiprocessing.Process` and sends
      its :class:`JobResult` back through a queue

Every job calls :attr:`BaseJob.func` exactly once. Package exceptions are
logged and turned into a failed :class:`JobResult`; the caller decides what a
failure means.
"""

from typing import Any, Callable, Dict, Iterable, Optional, Type, Union

from abc import ABC, abstractmethod
from dataclasses import dataclass
from logging import getLogger, Logger, LoggerAdapter
from multiprocessing import Process, Queue
from threading import Thread
import time

import click

from .enums import JobTypes
from .exceptions import AeaptException, StateError
from .logging import LOGGER_NAME, ScopeLoggerAdapter


@dataclass
class JobResult:
    name: str
    value: Any = None
    error: Optional[str] = None
    error_type: Optional[str] = None
    wall_time: float = 0.0

    @property
    def ok(self) -> bool:
        return self.error is None


class AbstractJob(ABC):
    """Interface which every job implements."""

    func: Callable[..., Any]
    """The function the job is built on. Called once with :attr:`args` and :attr:`kwargs`."""

    @abstractmethod
    def execute(self) -> JobResult:
        """Call :attr:`func`, time it and log the outcome."""
        raise NotImplementedError

    @abstractmethod
    def start(self):
        raise NotImplementedError

    @abstractmethod
    def join(self, timeout: Optional[float] = None):
        raise NotImplementedError

    @abstractmethod
    def result(self) -> JobResult:
        """Outcome of a finished job.

        Raises:
            StateError: If the job has not finished.
        """
        raise NotImplementedError


class BaseJob(AbstractJob):
    """Base job class which implements common logic."""

    logger: Union[Logger, LoggerAdapter, None] = None
    """Receives the job's start, finish and failure records. If it isn't
    specified, the package logger is used.
    """

    def __init__(
            self,
            func: Callable[..., Any],
            *args,
            name: Optional[str] = None,
            logger: Union[Logger, LoggerAdapter, None] = None,
            use_ansi: bool = True,
            **kwargs,
    ):
        self.func = func
        self.args: Iterable = args
        self.kwargs: Dict[str, Any] = kwargs
        self.job_name = name or getattr(func, '__name__', self.__class__.__name__)
        self._result: Optional[JobResult] = None

        _logger = self.logger or logger or getLogger(LOGGER_NAME)
        self.logger = ScopeLoggerAdapter(
            _logger,
            plain_scope=self.get_plain_job_name(),
            styled_scope=self.get_styled_job_name(),
            use_ansi=use_ansi,
        )

    def get_plain_job_name(self) -> str:
        return self.job_name

    def get_styled_job_name(self) -> str:
        return click.style(self.job_name, fg='blue')

    def execute(self) -> JobResult:
        started = time.perf_counter()
        try:
            value = self.func(*self.args, **self.kwargs)
        except AeaptException as e:
            self.logger.error("%s failed: %s", self.job_name, e)  # type: ignore[union-attr]
            return JobResult(self.job_name, None, str(e), e.__class__.__name__, time.perf_counter() - started)
        except Exception as e:  # pylint: disable=broad-except
            self.logger.exception(e)  # type: ignore[union-attr]
            return JobResult(self.job_name, None, str(e), e.__class__.__name__, time.perf_counter() - started)
        return JobResult(self.job_name, value, None, None, time.perf_counter() - started)

    def result(self) -> JobResult:
        if self._result is None:
            raise StateError(f"Job {self.job_name} has not finished")
        return self._result


class InlineJob(BaseJob):
    """Runs in the calling thread when :meth:`start` is called."""

    def start(self):
        self._result = self.execute()

    def join(self, timeout: Optional[float] = None): pass


class ThreadJob(BaseJob, Thread):
    """Job based on a thread."""

    def __init__(self, func: Callable[..., Any], *args, name: Optional[str] = None,
                 logger: Union[Logger, LoggerAdapter, None] = None, use_ansi: bool = True, **kwargs):
        Thread.__init__(self, daemon=True)
        BaseJob.__init__(self, func, *args, name=name, logger=logger, use_ansi=use_ansi, **kwargs)

    def run(self):
        self._result = self.execute()

    def start(self):
        Thread.start(self)

    def join(self, timeout: Optional[float] = None):
        Thread.join(self, timeout)


class ProcessJob(BaseJob, Process):
    """Job based on a process. :attr:`func`, its arguments and its return
    value must be picklable.
    """

    def __init__(self, func: Callable[..., Any], *args, name: Optional[str] = None,
                 logger: Union[Logger, LoggerAdapter, None] = None, use_ansi: bool = True, **kwargs):
        Process.__init__(self, daemon=True)
        BaseJob.__init__(self, func, *args, name=name, logger=logger, use_ansi=use_ansi, **kwargs)
        self._queue: Queue = Queue()

    def start(self):
        Process.start(self)

    def run(self):
        self._queue.put(self.execute())

    def result(self) -> JobResult:
        # the queue must be drained before join, or a large payload blocks the child
        if self._result is None:
            self._result = self._queue.get()
        return self._result

    def join(self, timeout: Optional[float] = None):
        self.result()
        Process.join(self, timeout)

    def stop(self):
        if self.is_alive():
            self.terminate()
        Process.join(self)


JobHint = Union[InlineJob, ThreadJob, ProcessJob]

jobs_classes: Dict[JobTypes, Type[BaseJob]] = {
    JobTypes.INLINE: InlineJob,
    JobTypes.THREAD: ThreadJob,
    JobTypes.PROCESS: ProcessJob,
}


def make_job(job_type: JobTypes, func: Callable[..., Any], *args, **kwargs) -> BaseJob:
    """Build a job of the given type around ``func``."""
    return jobs_classes[job_type](func, *args, **kwargs)
