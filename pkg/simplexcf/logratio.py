"""Log-ratio isomorphisms between the simplex and Euclidean coordinates.

``alr`` uses the last part as reference, ``clr`` centers the logarithms on
their mean, and ``ilr`` projects ``clr`` coordinates on an orthonormal contrast
basis (the normalized Helmert matrix). ``clr`` and ``ilr`` are isometries for
the Aitchison distance; ``alr`` is not.

All forward maps accept a single composition or an ``(n, d)`` array of them
and work along the last axis.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np
import scipy.linalg

from .exceptions import DimensionError, InvalidDimension
from .models import TransformKind
from .simplex import DEFAULT_EPSILON, Composition, CompositionLike, close_rows

Coordinates = Union[np.ndarray, list]


def _softmax_rows(z: np.ndarray, epsilon: float) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    return close_rows(np.exp(shifted), epsilon)


def _as_composition(parts: np.ndarray) -> Union[Composition, np.ndarray]:
    return Composition(parts) if parts.ndim == 1 else parts


def _logs(x: CompositionLike) -> np.ndarray:
    return np.log(np.asarray(x, dtype=float))


def alr(x: CompositionLike) -> np.ndarray:
    """Additive log-ratio coordinates ``log(x_i / x_d)``, ``i < d``."""
    logs = _logs(x)
    return logs[..., :-1] - logs[..., -1:]


def alr_inv(z: Coordinates, epsilon: float = DEFAULT_EPSILON):
    """Map additive log-ratio coordinates back to the simplex.

    Returns:
        A :class:`~.Composition` for a single vector, an ``(n, d)`` array for
        a matrix of coordinates.
    """
    z = np.asarray(z, dtype=float)
    padded = np.concatenate([z, np.zeros(z.shape[:-1] + (1,))], axis=-1)
    return _as_composition(_softmax_rows(padded, epsilon))


def clr(x: CompositionLike) -> np.ndarray:
    """Centered log-ratio coordinates ``log(x_i / g(x))``; they sum to zero."""
    logs = _logs(x)
    return logs - logs.mean(axis=-1, keepdims=True)


def clr_inv(z: Coordinates, epsilon: float = DEFAULT_EPSILON):
    """The softmax; invariant to adding a constant to every coordinate."""
    z = np.asarray(z, dtype=float)
    return _as_composition(_softmax_rows(z, epsilon))


@lru_cache(maxsize=None)
def _helmert(d: int) -> np.ndarray:
    basis = scipy.linalg.helmert(d, full=False).T
    basis.setflags(write=False)
    return basis


def ilr_basis(d: int) -> np.ndarray:
    """The ``d × (d-1)`` normalized Helmert contrast basis.

    Column ``k`` contrasts the first ``k`` parts against part ``k + 1``; each
    column sums to zero and the columns are orthonormal.

    Raises:
        InvalidDimension: ``d < 2``.
    """
    if d < 2:
        raise InvalidDimension(d)
    return _helmert(d)


def _check_basis(d: int, basis: np.ndarray) -> None:
    if basis.shape[0] != d:
        raise DimensionError(basis.shape[0], d)


def ilr(x: CompositionLike, basis: Optional[np.ndarray] = None) -> np.ndarray:
    """Isometric log-ratio coordinates ``clr(x) · M``.

    Raises:
        DimensionError: The basis does not have one row per part.
    """
    coords = clr(x)
    d = coords.shape[-1]
    basis = ilr_basis(d) if basis is None else np.asarray(basis)
    _check_basis(d, basis)
    return coords @ basis


def ilr_inv(
    z: Coordinates,
    basis: Optional[np.ndarray] = None,
    epsilon: float = DEFAULT_EPSILON,
):
    """Map isometric log-ratio coordinates back with ``C(exp(z Mᵀ))``.

    Raises:
        DimensionError: The basis does not have one column per coordinate.
    """
    z = np.asarray(z, dtype=float)
    basis = ilr_basis(z.shape[-1] + 1) if basis is None else np.asarray(basis)
    if basis.shape[1] != z.shape[-1]:
        raise DimensionError(basis.shape[1], z.shape[-1])
    return clr_inv(z @ basis.T, epsilon)


@dataclass(frozen=True, eq=False)
class LogRatioTransform:
    """A log-ratio transform bound to a simplex dimension.

    Args:
        kind: Which isomorphism to use.
        d: The number of parts.
        basis: The contrast basis; set for ``ilr`` only.
    """

    kind: TransformKind
    d: int
    basis: Optional[np.ndarray] = None

    @classmethod
    def create(cls, kind: Union[TransformKind, str], d: int) -> "LogRatioTransform":
        kind = TransformKind(kind)
        if d < 2:
            raise InvalidDimension(d)
        basis = ilr_basis(d) if kind is TransformKind.ILR else None
        return cls(kind, d, basis)

    @property
    def coordinates_dim(self) -> int:
        return self.d - 1

    def _check(self, points: np.ndarray) -> None:
        if points.shape[-1] != self.d:
            raise DimensionError(self.d, points.shape[-1])

    def forward(self, points: CompositionLike) -> np.ndarray:
        """The transform itself: ``d - 1`` coordinates for alr/ilr, ``d`` for clr."""
        points = np.asarray(points, dtype=float)
        self._check(points)
        if self.kind is TransformKind.ALR:
            return alr(points)
        if self.kind is TransformKind.CLR:
            return clr(points)
        return ilr(points, self.basis)

    def inverse(self, coords: Coordinates, epsilon: float = DEFAULT_EPSILON):
        coords = np.asarray(coords, dtype=float)
        if self.kind is TransformKind.ALR:
            return alr_inv(coords, epsilon)
        if self.kind is TransformKind.CLR:
            return clr_inv(coords, epsilon)
        return ilr_inv(coords, self.basis, epsilon)

    def coordinates(self, points: CompositionLike) -> np.ndarray:
        """Full-rank ``d - 1`` coordinates.

        ``clr`` lives on the zero-sum hyperplane, so its coordinates are taken
        on the Helmert basis of that hyperplane (which makes it ``ilr``).
        """
        points = np.asarray(points, dtype=float)
        self._check(points)
        if self.kind is TransformKind.ALR:
            return alr(points)
        return ilr(points, ilr_basis(self.d))

    def from_coordinates(self, coords: Coordinates, epsilon: float = DEFAULT_EPSILON):
        coords = np.asarray(coords, dtype=float)
        if coords.shape[-1] != self.coordinates_dim:
            raise DimensionError(self.coordinates_dim, coords.shape[-1])
        if self.kind is TransformKind.ALR:
            return alr_inv(coords, epsilon)
        return ilr_inv(coords, ilr_basis(self.d), epsilon)
