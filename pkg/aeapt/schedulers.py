"""Runs a batch of one-shot jobs and collects their results.

Jobs of every type can be mixed in one :class:`Scheduler`. Results always come
back in the order the jobs were added, whatever order they finish in.
"""

from typing import List, Optional

from abc import ABC, abstractmethod
import os

from .exceptions import IncorrectJobType
from .jobs import BaseJob, JobResult, ProcessJob


class AbstractScheduler(ABC):
    """Interface which every scheduler implements."""

    @abstractmethod
    def add_job(self, job: BaseJob):
        """Add a job to the batch.

        Args:
            job: The job will be added.

        Raises:
            IncorrectJobType: If incorrect job type will be passed.
        """
        raise NotImplementedError

    @abstractmethod
    def run(self) -> List[JobResult]:
        """Run every added job and wait for all of them."""
        raise NotImplementedError

    @abstractmethod
    def stop(self):
        """Stop whatever is still running."""
        raise NotImplementedError


class Scheduler(AbstractScheduler):
    """Starts at most ``max_workers`` jobs at a time."""

    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = max(1, max_workers or os.cpu_count() or 1)
        self._jobs: List[BaseJob] = []
        self._running: List[BaseJob] = []

    @property
    def jobs(self) -> List[BaseJob]:
        return list(self._jobs)

    def add_job(self, job: BaseJob):
        if not isinstance(job, BaseJob):
            raise IncorrectJobType(job, self)
        self._jobs.append(job)

    def run(self) -> List[JobResult]:
        results: List[JobResult] = []
        for start in range(0, len(self._jobs), self.max_workers):
            self._running = self._jobs[start:start + self.max_workers]
            for job in self._running:
                job.start()
            for job in self._running:
                job.join()
                results.append(job.result())
        self._running = []
        return results

    def stop(self):
        for job in self._running:
            if isinstance(job, ProcessJob):
                job.stop()
        self._running = []
