import logging

import pytest

from aeapt.enums import JobTypes
from aeapt.exceptions import DomainError, StateError
from aeapt.jobs import InlineJob, jobs_classes, JobResult, make_job, ProcessJob, ThreadJob


def add(a, b, scale=1):
    return (a + b) * scale


def reject(value):
    raise DomainError(f"cannot use {value}")


def crash():
    raise ZeroDivisionError("division by zero")


@pytest.mark.parametrize('job_type', list(JobTypes), ids=lambda job_type: job_type.value)
def test_job_returns_value(job_type):
    job = make_job(job_type, add, 2, 3, scale=10, name='adder')
    job.start()
    job.join()
    result = job.result()
    assert isinstance(result, JobResult)
    assert result.ok
    assert result.name == 'adder'
    assert result.value == 50
    assert result.wall_time >= 0.0


@pytest.mark.parametrize('job_type', list(JobTypes), ids=lambda job_type: job_type.value)
def test_package_error_becomes_failed_result(job_type):
    job = make_job(job_type, reject, 'x')
    job.start()
    job.join()
    result = job.result()
    assert not result.ok
    assert result.value is None
    assert result.error == 'cannot use x'
    assert result.error_type == 'DomainError'
    assert result.name == 'reject'


def test_unexpected_error_is_logged_with_traceback(aeapt_log):
    job = InlineJob(crash)
    with aeapt_log.at_level(logging.ERROR, logger='aeapt'):
        job.start()
    assert job.result().error_type == 'ZeroDivisionError'
    assert any(record.exc_info for record in aeapt_log.records)


def test_package_error_is_logged_without_traceback(aeapt_log):
    job = InlineJob(reject, 3, name='AE')
    with aeapt_log.at_level(logging.ERROR, logger='aeapt'):
        job.start()
    assert "AE failed: cannot use 3" in aeapt_log.text
    assert not any(record.exc_info for record in aeapt_log.records)


def test_records_carry_job_scope(aeapt_log):
    job = InlineJob(reject, 1, name='GRUAE', use_ansi=False)
    with aeapt_log.at_level(logging.ERROR, logger='aeapt'):
        job.start()
    assert aeapt_log.records[-1].scope == 'GRUAE'


@pytest.mark.parametrize('job_class', [InlineJob, ThreadJob])
def test_result_before_finish(job_class):
    with pytest.raises(StateError):
        job_class(add, 1, 2).result()


def test_job_classes_cover_every_type():
    assert set(jobs_classes) == set(JobTypes)
    assert jobs_classes[JobTypes.PROCESS] is ProcessJob
