# ptgain/errors.py

from typing import Optional


class PtgainError(Exception):
    """Base class for every error raised by the toolkit."""

    # errors cross process boundaries in the ensemble runner; rebuild from ctor args
    def __reduce__(self):
        return (self.__class__, getattr(self, '_ctor_args', self.args))


class DimensionError(PtgainError):
    pass


class StructureError(PtgainError):
    """A jump operator does not map the excited manifold into the ground manifold."""


class SingularBlockError(PtgainError):
    """The excited-manifold block cannot be inverted; the effective-operator reduction is invalid."""


class StateError(PtgainError):
    """A matrix handed in as a density matrix is not Hermitian or not normalized."""


class NumericsError(PtgainError):
    def __init__(self, message: str, step: Optional[int] = None):
        self._ctor_args = (message, step)
        self.step = step
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)


class GainBlowUpError(NumericsError):
    pass


class TrajectoryError(NumericsError):
    def __init__(self, message: str, trajectory: int, step: Optional[int] = None):
        super().__init__(f"trajectory {trajectory}: {message}", step)
        self._ctor_args = (message, trajectory, step)
        self.trajectory = trajectory


class ConfigError(PtgainError, ValueError):
    """Invalid parameters, from a config document or handed to a model constructor."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self._ctor_args = (message, field, line)
        self.field = field
        self.line = line
        where = []
        if field is not None:
            where.append(f"field '{field}'")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)


class OutputError(PtgainError):
    def __init__(self, message: str, path: str):
        self._ctor_args = (message, path)
        self.path = path
        super().__init__(f"{message}: '{path}'")
