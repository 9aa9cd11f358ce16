"""Gaussian optimal transport of compositions in log-ratio coordinates.

Both groups are mapped to ``d - 1`` Euclidean coordinates, a Gaussian is fitted
to each, and the closed-form Bures-Wasserstein map

    T(z) = m1 + A (z - m0),  A = S0^{-1/2} (S0^{1/2} S1 S0^{1/2})^{1/2} S0^{-1/2}

is applied before mapping back to the simplex.
"""
import logging
from dataclasses import dataclass
from typing import List, Union

import numpy as np
import scipy.linalg

from .decorators import unit_interval
from .exceptions import DimensionError, SingularCovariance
from .logratio import LogRatioTransform
from .models import TransformKind
from .simplex import DEFAULT_EPSILON, Composition, CompositionLike, CompositionSample

logger = logging.getLogger(__name__)

EIGENVALUE_FLOOR = 1e-12
RIDGE = 1e-8


def sqrtm_spd(matrix: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Square root (or inverse square root) of a symmetric positive matrix.

    Eigenvalues below ``1e-12`` are clamped to ``1e-12``.
    """
    eigenvalues, eigenvectors = scipy.linalg.eigh(matrix)
    eigenvalues = np.maximum(eigenvalues, EIGENVALUE_FLOOR)
    roots = eigenvalues ** (-0.5 if inverse else 0.5)
    root = (eigenvectors * roots) @ eigenvectors.T
    return 0.5 * (root + root.T)


def _moments(z: np.ndarray, group_label: int):
    if z.shape[0] < 2:
        raise SingularCovariance(group_label)
    mean = z.mean(axis=0)
    cov = np.atleast_2d(np.cov(z, rowvar=False, ddof=1))
    k = cov.shape[0]
    trace = float(np.trace(cov))
    cov = cov + RIDGE * trace / k * np.eye(k)
    if not np.all(np.isfinite(cov)) or trace <= 0:
        raise SingularCovariance(group_label)
    smallest = scipy.linalg.eigvalsh(cov)[0]
    if smallest <= 0:
        raise SingularCovariance(group_label)
    if smallest <= 2 * RIDGE * trace / k:
        logger.warning(
            "Covariance of group %d is rank deficient; ridge regularization "
            "fills its null space",
            group_label,
        )
    return mean, cov


@dataclass(frozen=True, eq=False)
class GaussianTransportMap:
    """A fitted Gaussian transport map between two groups.

    Args:
        transform: The log-ratio transform giving the coordinates.
        m0: The source mean, in coordinates.
        m1: The target mean, in coordinates.
        S0: The regularized source covariance.
        S1: The regularized target covariance.
        A: The symmetric positive definite matrix with ``A S0 A = S1``.
        source_label: The source group tag.
        target_label: The target group tag.
        epsilon: The zero floor used when mapping back to the simplex.
    """

    transform: LogRatioTransform
    m0: np.ndarray
    m1: np.ndarray
    S0: np.ndarray
    S1: np.ndarray
    A: np.ndarray
    source_label: int = 0
    target_label: int = 1
    epsilon: float = DEFAULT_EPSILON

    @property
    def d(self) -> int:
        return self.transform.d

    def _displace(self, z: np.ndarray) -> np.ndarray:
        return self.m1 + (z - self.m0) @ self.A


def _optimal_matrix(S0: np.ndarray, S1: np.ndarray) -> np.ndarray:
    root = sqrtm_spd(S0)
    inv_root = sqrtm_spd(S0, inverse=True)
    middle = sqrtm_spd(root @ S1 @ root)
    A = inv_root @ middle @ inv_root
    return 0.5 * (A + A.T)


def fit(
    source: CompositionSample,
    target: CompositionSample,
    transform: Union[LogRatioTransform, TransformKind, str] = TransformKind.ILR,
    epsilon: float = DEFAULT_EPSILON,
) -> GaussianTransportMap:
    """Fit the Gaussian transport map from ``source`` to ``target``.

    Means and unbiased covariances are estimated on the transformed points;
    each covariance gets a ridge of ``1e-8 · tr(S) / (d - 1)``.

    Args:
        source: The sample to transport.
        target: The sample whose distribution is the destination.
        transform: The coordinates; ``clr`` is taken on the Helmert basis.
        epsilon: The zero floor used when mapping back.

    Returns:
        The fitted map.

    Raises:
        DimensionError: The samples differ in dimension.
        SingularCovariance: A covariance is singular after regularization.
    """
    if source.d != target.d:
        raise DimensionError(source.d, target.d)
    if not isinstance(transform, LogRatioTransform):
        transform = LogRatioTransform.create(transform, source.d)
    elif transform.d != source.d:
        raise DimensionError(transform.d, source.d)

    m0, S0 = _moments(transform.coordinates(source.points), source.group_label)
    m1, S1 = _moments(transform.coordinates(target.points), target.group_label)
    A = _optimal_matrix(S0, S1)
    logger.debug(
        "Fitted Gaussian map %d->%d on %d and %d points (%s)",
        source.group_label,
        target.group_label,
        source.n,
        target.n,
        transform.kind.value,
    )
    return GaussianTransportMap(
        transform,
        m0,
        m1,
        S0,
        S1,
        A,
        source_label=source.group_label,
        target_label=target.group_label,
        epsilon=epsilon,
    )


def apply(transport: GaussianTransportMap, x: CompositionLike):
    """Transport one composition, or every row of an ``(n, d)`` array.

    Raises:
        DimensionError: ``x`` does not have the map's dimension.
    """
    z = transport.transform.coordinates(x)
    return transport.transform.from_coordinates(
        transport._displace(z), transport.epsilon
    )


@unit_interval("t")
def interpolate(transport: GaussianTransportMap, x: CompositionLike, t: float):
    """The displacement interpolation ``h⁻¹((1 - t) h(x) + t T(h(x)))``.

    Raises:
        InvalidParameter: ``t`` is outside ``[0, 1]``.
    """
    if t == 0:
        points = np.asarray(x, dtype=float)
        return Composition(points) if points.ndim == 1 else points
    z = transport.transform.coordinates(x)
    zt = (1.0 - t) * z + t * transport._displace(z)
    return transport.transform.from_coordinates(zt, transport.epsilon)


@unit_interval("t")
def interpolated_law(transport: GaussianTransportMap, t: float):
    """The Gaussian law ``N(μ_t, Σ_t)`` of the interpolated coordinates.

    ``Σ_t = S0^{-1/2} ((1 - t) S0 + t (S0^{1/2} S1 S0^{1/2})^{1/2})² S0^{-1/2}``.

    Returns:
        The pair ``(mean, covariance)``.

    Raises:
        InvalidParameter: ``t`` is outside ``[0, 1]``.
    """
    root = sqrtm_spd(transport.S0)
    inv_root = sqrtm_spd(transport.S0, inverse=True)
    middle = sqrtm_spd(root @ transport.S1 @ root)
    inner = (1.0 - t) * transport.S0 + t * middle
    cov = inv_root @ inner @ inner @ inv_root
    mean = (1.0 - t) * transport.m0 + t * transport.m1
    return mean, 0.5 * (cov + cov.T)


def inverse_map(transport: GaussianTransportMap) -> GaussianTransportMap:
    """The reverse map, from the target group back to the source group."""
    A_inv = np.linalg.inv(transport.A)
    return GaussianTransportMap(
        transport.transform,
        transport.m1,
        transport.m0,
        transport.S1,
        transport.S0,
        0.5 * (A_inv + A_inv.T),
        source_label=transport.target_label,
        target_label=transport.source_label,
        epsilon=transport.epsilon,
    )


def trajectory(
    transport: GaussianTransportMap, x: CompositionLike, steps: int = 21
) -> List[Composition]:
    """The interpolation path of ``x`` sampled at ``steps`` evenly spaced times."""
    return [interpolate(transport, x, float(t)) for t in np.linspace(0.0, 1.0, steps)]


def transport_sample(
    transport: GaussianTransportMap, sample: CompositionSample
) -> CompositionSample:
    """Transport every point of ``sample``; the result carries the target label."""
    return CompositionSample(transport.target_label, apply(transport, sample.points))
