from pathlib import Path
from typing import Any, Optional, Sequence, Union


class SimplexCFError(Exception):
    """Base class for all simplexcf errors.

    Attributes:
        exit_code: The process exit code used by the command-line interface.
    """

    exit_code: int = 70


###################################################################################
#                                  COMPOSITIONS                                   #
###################################################################################


class CompositionError(SimplexCFError):
    """Base class for errors raised while building or combining compositions."""

    exit_code = 65


class DegenerateInput(CompositionError):
    """Indicates an input with nothing to work on (all zeros, an empty sample).

    Args:
        msg: The exception message.
    """

    exit_code = 2

    def __init__(self, msg: str) -> None:
        super().__init__(msg)


class InvalidValue(CompositionError, ValueError):
    """Indicates a negative or non-finite entry where a proportion was expected.

    Args:
        value: The offending value.
        where: A short description of where the value was found.
    """

    def __init__(self, value: Any, where: str = "input") -> None:
        msg = f"Invalid value {value!r} in {where}.\n"
        super().__init__(msg)
        self.value = value
        self.where = where


class DimensionError(CompositionError, ValueError):
    """Indicates two operands of different dimension.

    Args:
        expected: The expected dimension.
        actual: The dimension that was supplied.
    """

    def __init__(self, expected: int, actual: int) -> None:
        msg = f"Dimension mismatch: expected {expected}, got {actual}.\n"
        super().__init__(msg)
        self.expected = expected
        self.actual = actual


class InvalidDimension(CompositionError, ValueError):
    """Indicates a simplex dimension smaller than two.

    Args:
        d: The requested dimension.
    """

    def __init__(self, d: int) -> None:
        msg = f"A simplex needs at least 2 parts, got d={d}.\n"
        super().__init__(msg)
        self.d = d


class InvalidParameter(CompositionError, ValueError):
    """Indicates a scalar parameter outside of its domain.

    Args:
        name: The parameter name.
        value: The value that was supplied.
        domain: A description of the accepted values.
    """

    exit_code = 64

    def __init__(self, name: str, value: Any, domain: str) -> None:
        msg = f"Parameter {name}={value!r} must lie in {domain}.\n"
        super().__init__(msg)
        self.name = name
        self.value = value
        self.domain = domain


###################################################################################
#                                   TRANSPORT                                     #
###################################################################################


class TransportError(SimplexCFError):
    """Base class for errors raised while fitting or solving transport problems."""

    pass


class SingularCovariance(TransportError):
    """Indicates a covariance matrix that stays singular after regularization.

    Args:
        group_label: The sensitive group the covariance was estimated on.
    """

    exit_code = 2

    def __init__(self, group_label: int) -> None:
        msg = (
            f"The covariance of group {group_label} is singular even after ridge "
            "regularization.\nAll points of the group may be identical."
        )
        super().__init__(msg)
        self.group_label = group_label


class SolverFailure(TransportError):
    """Indicates the transport solver hit its iteration limit or gave up.

    Args:
        iterations: The number of simplex iterations performed.
    """

    def __init__(self, iterations: int) -> None:
        msg = f"The transport solver stopped after {iterations} iterations."
        super().__init__(msg)
        self.iterations = iterations


###################################################################################
#                                    ENCODERS                                     #
###################################################################################


class EncoderError(SimplexCFError):
    """Base class for errors raised while encoding categories as compositions."""

    exit_code = 65


class MissingCategory(EncoderError):
    """Indicates a declared category with no training row.

    Args:
        column: The categorical column.
        category: The category absent from the training data.
    """

    exit_code = 2

    def __init__(self, column: str, category: str) -> None:
        msg = f"Category {category!r} of column {column!r} has no training rows."
        super().__init__(msg)
        self.column = column
        self.category = category


class MalformedScores(EncoderError):
    """Indicates an external score row that is not a probability vector.

    Args:
        row: The 1-based data row number.
        total: The row sum that was found.
    """

    def __init__(self, row: int, total: float) -> None:
        msg = f"Score row {row} sums to {total!r}, more than 0.01 away from 1."
        super().__init__(msg)
        self.row = row
        self.total = total


###################################################################################
#                                      DATA                                       #
###################################################################################


class DataError(SimplexCFError):
    """Base class for errors raised while reading or writing datasets."""

    exit_code = 65


class ParseError(DataError):
    """Indicates a CSV file that cannot be parsed.

    Args:
        line: The 1-based line number of the problem, if known.
        msg: The exception message.
    """

    def __init__(self, line: Optional[int], msg: str) -> None:
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{msg}")
        self.line = line


class ColumnTypeError(DataError, TypeError):
    """Indicates a non-numeric token in a numeric column.

    Args:
        column: The column name.
        line: The 1-based line number of the token.
        token: The offending token.
    """

    def __init__(self, column: str, line: int, token: str) -> None:
        msg = f"Column {column!r} is numeric but line {line} holds {token!r}."
        super().__init__(msg)
        self.column = column
        self.line = line
        self.token = token


class SchemaError(DataError):
    """Indicates a dataset that does not match the declared schema.

    Args:
        msg: The exception message.
    """

    def __init__(self, msg: str) -> None:
        super().__init__(msg)


class NotBinary(DataError):
    """Indicates a sensitive column with more than two categories.

    Args:
        column: The column name.
        categories: The categories that were found.
    """

    def __init__(self, column: str, categories: Sequence[str]) -> None:
        msg = (
            f"Sensitive column {column!r} must be binary, "
            f"found {len(categories)} categories: {list(categories)}"
        )
        super().__init__(msg)
        self.column = column
        self.categories = list(categories)


class IoError(DataError):
    """Indicates a file that cannot be read or written.

    Args:
        path: The file path.
    """

    def __init__(self, path: Union[str, Path]) -> None:
        msg = f"Cannot access {str(path)!r}."
        super().__init__(msg)
        self.path = path


###################################################################################
#                                     RUNNER                                      #
###################################################################################


class RunnerError(SimplexCFError):
    """Base class for all :class:`~.Runner` errors."""

    pass


class RunnerUninitializedError(RunnerError):
    """Indicates the :class:`~.Runner` was used outside of its context manager."""

    def __init__(self) -> None:
        msg = "The runner was not initialized properly.\nUse it with `async with`."
        super().__init__(msg)


class ConfigError(RunnerError):
    """Indicates an invalid run configuration.

    Args:
        problems: Every problem found while validating the configuration.
    """

    exit_code = 65

    def __init__(self, problems: Sequence[str]) -> None:
        msg = "Invalid configuration:\n" + "\n".join(f"  - {p}" for p in problems)
        super().__init__(msg)
        self.problems = list(problems)


class SpecViolationError(RunnerError):
    """Indicates a structural causal model spec that fails validation.

    Args:
        violations: Every violation reported by :func:`~.validate_spec`.
    """

    exit_code = 65

    def __init__(self, violations: Sequence[str]) -> None:
        msg = "Invalid pipeline spec:\n" + "\n".join(f"  - {v}" for v in violations)
        super().__init__(msg)
        self.violations = list(violations)


class UsageError(RunnerError):
    """Indicates a command-line usage mistake.

    Args:
        msg: The exception message.
    """

    exit_code = 64

    def __init__(self, msg: str) -> None:
        super().__init__(msg)
