"""Dirichlet densities on the simplex and their maximum-likelihood fit."""
import logging
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.special import digamma, gammaln, polygamma

from .exceptions import DimensionError, InvalidDimension, InvalidValue
from .simplex import CompositionLike, CompositionSample

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DirichletParams:
    """The concentration vector of a Dirichlet law.

    Args:
        alpha: ``d >= 2`` strictly positive concentrations.
        converged: Whether the fit that produced these parameters converged.
        iterations: The number of Newton iterations of that fit.
    """

    alpha: np.ndarray
    converged: bool = field(default=True, compare=False)
    iterations: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        alpha = np.array(self.alpha, dtype=float)
        if alpha.ndim != 1 or alpha.shape[0] < 2:
            raise InvalidDimension(alpha.shape[0] if alpha.ndim else 0)
        if not np.all(np.isfinite(alpha)) or np.any(alpha <= 0):
            raise InvalidValue(alpha.tolist(), "Dirichlet concentrations")
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)

    @property
    def d(self) -> int:
        return self.alpha.shape[0]

    @property
    def log_normalizer(self) -> float:
        """``log B(α) = Σ logΓ(α_i) - logΓ(Σ α_i)``."""
        return float(gammaln(self.alpha).sum() - gammaln(self.alpha.sum()))


def log_density(
    params: DirichletParams, x: CompositionLike
) -> Union[float, np.ndarray]:
    """The log-density ``Σ (α_i - 1) log x_i - log B(α)``.

    Accepts one composition or an ``(n, d)`` array of them.

    Raises:
        DimensionError: ``x`` does not have ``d`` parts.
    """
    points = np.asarray(x, dtype=float)
    if points.shape[-1] != params.d:
        raise DimensionError(params.d, points.shape[-1])
    values = np.log(points) @ (params.alpha - 1.0) - params.log_normalizer
    return float(values) if np.ndim(values) == 0 else values


def _mean_log_likelihood(alpha: np.ndarray, mean_log: np.ndarray) -> float:
    return float(
        gammaln(alpha.sum()) - gammaln(alpha).sum() + (alpha - 1.0) @ mean_log
    )


def _gradient(alpha: np.ndarray, mean_log: np.ndarray) -> np.ndarray:
    return digamma(alpha.sum()) - digamma(alpha) + mean_log


def _moment_start(points: np.ndarray) -> np.ndarray:
    mean = points.mean(axis=0)
    second = (points ** 2).mean(axis=0)
    spread = second - mean ** 2
    valid = spread > 0
    precision = 0.0
    if valid.any():
        precision = float(np.median((mean[valid] - second[valid]) / spread[valid]))
    if not np.isfinite(precision) or precision <= 0:
        precision = float(points.shape[1])
    return precision * mean


def fit_mle(
    sample: CompositionSample, max_iter: int = 200, tol: float = 1e-10
) -> DirichletParams:
    """Fit a Dirichlet law by maximum likelihood.

    Starts from the method-of-moments estimate and takes Newton steps on the
    mean log-likelihood. The Hessian is a diagonal plus a rank-one term, so
    each step is solved in closed form. Steps are halved until they keep every
    concentration positive and do not decrease the likelihood.

    Args:
        sample: The compositions to fit.
        max_iter: The Newton iteration limit.
        tol: The gradient norm at which the fit is considered converged.

    Returns:
        The fitted parameters; ``converged`` is false when ``max_iter`` was
        reached first.
    """
    points = sample.points
    mean_log = np.log(points).mean(axis=0)
    alpha = _moment_start(points)
    value = _mean_log_likelihood(alpha, mean_log)

    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        gradient = _gradient(alpha, mean_log)
        if np.linalg.norm(gradient) < tol:
            converged = True
            break
        q = -polygamma(1, alpha)
        z = float(polygamma(1, alpha.sum()))
        b = np.sum(gradient / q) / (1.0 / z + np.sum(1.0 / q))
        step = (gradient - b) / q

        scale = 1.0
        for _ in range(60):
            candidate = alpha - scale * step
            if np.all(candidate > 0):
                candidate_value = _mean_log_likelihood(candidate, mean_log)
                # Ties at rounding level count as progress near the optimum.
                if candidate_value >= value - 1e-14 * max(1.0, abs(value)):
                    break
            scale *= 0.5
        else:
            logger.debug("Dirichlet line search stalled at iteration %d", iterations)
            converged = bool(np.linalg.norm(gradient) < 1e3 * tol)
            break
        alpha, value = candidate, candidate_value
        logger.debug("Dirichlet iteration %d: log-likelihood %.12g", iterations, value)

    if not converged:
        logger.warning(
            "Dirichlet fit of group %d did not converge in %d iterations",
            sample.group_label,
            iterations,
        )
    return DirichletParams(alpha, converged=converged, iterations=iterations)
