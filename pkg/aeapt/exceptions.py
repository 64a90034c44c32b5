from typing import Sequence, Union

from pathlib import Path


class AeaptException(Exception):
    pass


class ShapeError(AeaptException):
    def __init__(self, message: str, *shapes: Sequence[int]):
        if shapes:
            message = f"{message}: " + " vs ".join(str(tuple(shape)) for shape in shapes)
        super().__init__(message)


class DomainError(AeaptException):
    pass


class NumericError(AeaptException):
    pass


class DivergenceError(NumericError):
    def __init__(self, architecture: str, epoch: int, loss: float):
        self.architecture = architecture
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"{architecture} diverged at epoch {epoch} (batch loss {loss!r})")


class StateError(AeaptException):
    pass


class FormatError(AeaptException):
    pass


class ParseError(AeaptException):
    def __init__(self, path: Union[str, Path], line: int, message: str):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class ConfigError(AeaptException):
    pass


class RunError(AeaptException):
    pass


class IncorrectJobType(AeaptException):
    """Raised when a scheduler is handed something that is not a job."""

    def __init__(self, job, scheduler):
        self.rejected = type(job).__name__
        super().__init__(
            f"{type(scheduler).__name__} runs InlineJob, ThreadJob or ProcessJob instances, got {self.rejected}"
        )
