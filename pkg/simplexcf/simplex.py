"""Arithmetic and geometry of the open simplex.

A :class:`Composition` is a strictly positive vector of ``d >= 2`` parts summing
to one. Compositions form a commutative group under :func:`perturb` whose
neutral element is the uniform composition, and a Euclidean space once the
Aitchison inner product is added.

Real encoders emit exact zeros near the boundary of the simplex, so
:func:`closure` lifts zero entries to a floor ``epsilon`` (default ``1e-9``)
before normalizing; every log-ratio is then finite.
"""
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from .decorators import same_dimension
from .exceptions import DegenerateInput, InvalidDimension, InvalidValue

DEFAULT_EPSILON = 1e-9
SUM_TOLERANCE = 1e-12

CompositionLike = Union["Composition", np.ndarray, Sequence[float]]


def close_rows(raw: Union[np.ndarray, Sequence], epsilon: float = DEFAULT_EPSILON):
    """Close every vector along the last axis of ``raw``.

    Args:
        raw: An array of nonnegative reals, of shape ``(..., d)``.
        epsilon: The floor zero entries are lifted to before normalization.

    Returns:
        An array of the same shape whose last axis lies on the open simplex.

    Raises:
        DegenerateInput: A vector is all zeros.
        InvalidDimension: ``d < 2``.
        InvalidValue: An entry is negative or not finite.
    """
    values = np.array(raw, dtype=float)
    if values.ndim == 0 or values.shape[-1] < 2:
        raise InvalidDimension(values.shape[-1] if values.ndim else 0)
    if not np.all(np.isfinite(values)):
        raise InvalidValue(values[~np.isfinite(values)][0], "closure input")
    if np.any(values < 0):
        raise InvalidValue(values[values < 0][0], "closure input")
    if np.any(values.sum(axis=-1) == 0):
        raise DegenerateInput("Cannot close an all-zero vector.")

    values = np.where(values == 0, epsilon, values)
    return values / values.sum(axis=-1, keepdims=True)


def _validated_parts(parts: np.ndarray, where: str) -> np.ndarray:
    if parts.shape[-1] < 2:
        raise InvalidDimension(parts.shape[-1])
    if not np.all(np.isfinite(parts)) or np.any(parts <= 0):
        bad = parts[~(np.isfinite(parts) & (parts > 0))][0]
        raise InvalidValue(bad, where)
    gap = np.abs(parts.sum(axis=-1) - 1.0)
    if np.any(gap > SUM_TOLERANCE):
        raise InvalidValue(float(parts.sum(axis=-1).flat[np.argmax(gap)]), where)
    parts.setflags(write=False)
    return parts


@dataclass(frozen=True, eq=False)
class Composition:
    """A point of the open simplex.

    Build compositions with :func:`closure`; the constructor only validates.

    Args:
        parts: The ``d`` strictly positive proportions, summing to one.

    Raises:
        InvalidDimension: Fewer than two parts.
        InvalidValue: A part is not strictly positive, or the parts do not sum
            to one within ``1e-12``.
    """

    parts: np.ndarray

    def __post_init__(self) -> None:
        parts = np.array(self.parts, dtype=float)
        if parts.ndim != 1:
            raise InvalidDimension(parts.ndim)
        object.__setattr__(self, "parts", _validated_parts(parts, "composition"))

    @property
    def d(self) -> int:
        return self.parts.shape[0]

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        if dtype is not None and dtype != self.parts.dtype:
            return self.parts.astype(dtype)
        return self.parts

    def __len__(self) -> int:
        return self.d

    def __iter__(self) -> Iterator[float]:
        return iter(self.parts.tolist())

    def __getitem__(self, index: int) -> float:
        return float(self.parts[index])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Composition):
            return NotImplemented
        return np.array_equal(self.parts, other.parts)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Composition({np.array2string(self.parts, precision=6)})"


@dataclass(frozen=True, eq=False)
class CompositionSample:
    """The compositions observed in one sensitive group.

    Args:
        group_label: The group tag, 0 or 1.
        points: An ``(n, d)`` array whose rows are compositions.

    Raises:
        DegenerateInput: The sample is empty.
        InvalidValue: The group label is not 0 or 1, or a row is not a
            composition.
    """

    group_label: int
    points: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.group_label not in (0, 1):
            raise InvalidValue(self.group_label, "group label")
        points = np.array(self.points, dtype=float)
        if points.ndim != 2 or points.shape[0] == 0:
            raise DegenerateInput(f"Group {self.group_label} has no compositions.")
        object.__setattr__(self, "points", _validated_parts(points, "sample"))

    @classmethod
    def from_array(
        cls,
        raw: Union[np.ndarray, Sequence],
        group_label: int,
        epsilon: float = DEFAULT_EPSILON,
    ) -> "CompositionSample":
        """Close the rows of ``raw`` and wrap them as a sample."""
        raw = np.asarray(raw, dtype=float)
        if raw.ndim != 2 or raw.shape[0] == 0:
            raise DegenerateInput(f"Group {group_label} has no compositions.")
        return cls(group_label, close_rows(raw, epsilon))

    @classmethod
    def from_compositions(
        cls, compositions: Iterable[Composition], group_label: int
    ) -> "CompositionSample":
        rows = [np.asarray(x) for x in compositions]
        if not rows:
            raise DegenerateInput(f"Group {group_label} has no compositions.")
        return cls(group_label, np.vstack(rows))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def as_array(self) -> np.ndarray:
        return self.points

    def mean(self) -> Composition:
        """The arithmetic mean composition of the sample."""
        return closure(self.points.mean(axis=0))

    def __len__(self) -> int:
        return self.n

    def __iter__(self) -> Iterator[Composition]:
        return (Composition(row) for row in self.points)

    def __getitem__(self, index: int) -> Composition:
        return Composition(self.points[index])


def closure(
    raw: Union[np.ndarray, Sequence[float]], epsilon: float = DEFAULT_EPSILON
) -> Composition:
    """Normalize a nonnegative vector onto the open simplex.

    Zero entries are lifted to ``epsilon`` before dividing by the sum.

    Args:
        raw: The ``d >= 2`` nonnegative reals.
        epsilon: The zero floor.

    Returns:
        The closed composition.

    Raises:
        DegenerateInput: Every entry is zero.
        InvalidDimension: Fewer than two entries.
        InvalidValue: An entry is negative or not finite.
    """
    values = np.asarray(raw, dtype=float)
    if values.ndim != 1:
        raise InvalidDimension(values.ndim)
    return Composition(close_rows(values, epsilon))


def uniform(d: int) -> Composition:
    """The neutral element ``(1/d, ..., 1/d)`` of perturbation."""
    if d < 2:
        raise InvalidDimension(d)
    return Composition(np.full(d, 1.0 / d))


@same_dimension
def perturb(x: CompositionLike, y: CompositionLike) -> Composition:
    """Perturb ``x`` by ``y``: the closure of the componentwise product.

    Raises:
        DimensionError: ``x`` and ``y`` differ in dimension.
    """
    return closure(np.asarray(x) * np.asarray(y))


def inverse(x: CompositionLike) -> Composition:
    """The perturbation inverse ``C(1/x)``."""
    return closure(1.0 / np.asarray(x, dtype=float))


def power(x: CompositionLike, a: float) -> Composition:
    """The Aitchison scalar multiple ``C(x_1^a, ..., x_d^a)``."""
    logs = a * np.log(np.asarray(x, dtype=float))
    return closure(np.exp(logs - logs.max()))


@same_dimension
def aitchison_inner(x: CompositionLike, y: CompositionLike) -> float:
    """The Aitchison inner product.

    Computed from its definition, ``(1/d) sum_{i<j} log(x_i/x_j) log(y_i/y_j)``.

    Raises:
        DimensionError: ``x`` and ``y`` differ in dimension.
    """
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    dx = lx[:, None] - lx[None, :]
    dy = ly[:, None] - ly[None, :]
    # The full double sum counts every unordered pair twice.
    return float(0.5 * np.sum(dx * dy) / lx.shape[0])


def aitchison_norm(x: CompositionLike) -> float:
    return float(np.sqrt(max(aitchison_inner(x, x), 0.0)))


@same_dimension
def aitchison_distance(x: CompositionLike, y: CompositionLike) -> float:
    """The Aitchison distance ``||x ⋄ y⁻¹||``.

    Raises:
        DimensionError: ``x`` and ``y`` differ in dimension.
    """
    return aitchison_norm(perturb(x, inverse(y)))
