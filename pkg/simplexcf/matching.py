"""Discrete Kantorovich matching of compositions under the Dirichlet cost.

The cost between two compositions is the cross-entropy L-divergence

    c(x, y) = log((1/d) Σ y_i / x_i) - (1/d) Σ log(y_i / x_i),

which is nonnegative (arithmetic against geometric mean of the ratios) and
vanishes only when ``y = x``.

Couplings live in the transportation polytope ``U(n0, n1)``: every row sums to
one and every column to ``n0 / n1``. They are solved exactly with the
dual simplex of :mod:`simplexcf.transportation`.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.special import logsumexp

from .decorators import same_dimension, unit_interval
from .exceptions import DegenerateInput, DimensionError
from .logratio import clr, clr_inv
from .models import CounterfactualMode
from .simplex import (
    DEFAULT_EPSILON,
    Composition,
    CompositionLike,
    CompositionSample,
    close_rows,
    inverse,
    perturb,
)
from .transportation import transportation_simplex

logger = logging.getLogger(__name__)

# Upper bound on the number of floats held at once while building a cost matrix.
_BLOCK_FLOATS = 1 << 22


@dataclass(frozen=True, eq=False)
class CouplingPlan:
    """An optimal coupling between a source and a target sample.

    Args:
        P: The ``n0 × n1`` coupling; rows sum to 1, columns to ``n0 / n1``.
        total_cost: ``Σ P_ij C_ij``.
        pivots: The number of simplex iterations the solver performed.
    """

    P: np.ndarray
    total_cost: float
    pivots: int = 0

    @property
    def n0(self) -> int:
        return self.P.shape[0]

    @property
    def n1(self) -> int:
        return self.P.shape[1]

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.P))

    def row_weights(self, i: int) -> np.ndarray:
        """Row ``i`` of the plan normalized to sum to one."""
        if not 0 <= i < self.n0:
            raise IndexError(f"Source index {i} out of range for {self.n0} rows")
        row = self.P[i]
        return row / row.sum()

    def triplets(self) -> List[Tuple[int, int, float]]:
        """The nonzero entries as ``(i, j, weight)`` in row-major order."""
        rows, cols = np.nonzero(self.P)
        return [(int(i), int(j), float(self.P[i, j])) for i, j in zip(rows, cols)]


@same_dimension
def dirichlet_cost(x: CompositionLike, y: CompositionLike) -> float:
    """The Dirichlet transport cost ``c(x, y)``; not symmetric.

    Raises:
        DimensionError: ``x`` and ``y`` differ in dimension.
    """
    ratios = np.log(np.asarray(y, dtype=float)) - np.log(np.asarray(x, dtype=float))
    d = ratios.shape[0]
    return max(float(logsumexp(ratios) - np.log(d) - ratios.mean()), 0.0)


def cost_matrix(source: CompositionSample, target: CompositionSample) -> np.ndarray:
    """The ``n0 × n1`` matrix ``C_ij = c(x_0i, x_1j)``.

    Raises:
        DimensionError: The samples differ in dimension.
    """
    if source.d != target.d:
        raise DimensionError(source.d, target.d)
    log_x = np.log(source.points)
    log_y = np.log(target.points)
    n0, n1, d = source.n, target.n, source.d
    cost = np.empty((n0, n1))
    block = max(1, _BLOCK_FLOATS // (n1 * d))
    for start in range(0, n0, block):
        ratios = log_y[None, :, :] - log_x[start : start + block, None, :]
        cost[start : start + block] = (
            logsumexp(ratios, axis=2) - np.log(d) - ratios.mean(axis=2)
        )
    return np.maximum(cost, 0.0)


def solve_coupling(C: np.ndarray, max_pivots: Optional[int] = None) -> CouplingPlan:
    """Solve the discrete Kantorovich problem over ``U(n0, n1)`` exactly.

    Args:
        C: A finite nonnegative ``n0 × n1`` cost matrix.
        max_pivots: The simplex iteration limit.

    Returns:
        The optimal plan, with rows summing to 1 and columns to ``n0 / n1``.

    Raises:
        DegenerateInput: ``C`` has no rows or no columns.
        InvalidValue: ``C`` has a negative or non-finite entry.
        SolverFailure: The iteration limit was hit.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or 0 in C.shape:
        raise DegenerateInput("Cannot couple an empty sample.")
    n0, n1 = C.shape
    flow, pivots = transportation_simplex(
        C, np.full(n0, n1), np.full(n1, n0), max_pivots=max_pivots
    )
    P = flow / n1
    total_cost = float(np.sum(P * C))
    logger.info(
        "Coupled %d source and %d target points in %d iterations (cost %.6g)",
        n0,
        n1,
        pivots,
        total_cost,
    )
    return CouplingPlan(P, total_cost, pivots)


def match(
    source: CompositionSample,
    target: CompositionSample,
    max_pivots: Optional[int] = None,
) -> CouplingPlan:
    """Couple two samples under the Dirichlet cost."""
    return solve_coupling(cost_matrix(source, target), max_pivots=max_pivots)


def _check_target(plan: CouplingPlan, target: CompositionSample) -> None:
    if target.n != plan.n1:
        raise DimensionError(plan.n1, target.n)


def counterfactual_of(
    plan: CouplingPlan,
    target: CompositionSample,
    i: int,
    mode: Union[CounterfactualMode, str] = CounterfactualMode.EUCLIDEAN_MEAN,
    epsilon: float = DEFAULT_EPSILON,
) -> Composition:
    """The counterfactual of source point ``i`` read off row ``i`` of the plan.

    Args:
        plan: A coupling solved against ``target``.
        target: The target sample the plan's columns refer to.
        i: The source index.
        mode: Weighted arithmetic mean, weighted mean in clr coordinates, or the
            heaviest matched point (lowest index on ties).
        epsilon: The zero floor.

    Raises:
        IndexError: ``i`` is out of range.
    """
    _check_target(plan, target)
    weights = plan.row_weights(i)
    mode = CounterfactualMode(mode)
    if mode is CounterfactualMode.ARGMAX_ROW:
        return target[int(np.argmax(weights))]
    if mode is CounterfactualMode.AITCHISON_MEAN:
        return clr_inv(weights @ clr(target.points), epsilon)
    return Composition(close_rows(weights @ target.points, epsilon))


def counterfactuals(
    plan: CouplingPlan,
    target: CompositionSample,
    mode: Union[CounterfactualMode, str] = CounterfactualMode.EUCLIDEAN_MEAN,
    epsilon: float = DEFAULT_EPSILON,
) -> np.ndarray:
    """The counterfactual of every source point, as an ``n0 × d`` array."""
    _check_target(plan, target)
    weights = plan.P / plan.P.sum(axis=1, keepdims=True)
    mode = CounterfactualMode(mode)
    if mode is CounterfactualMode.ARGMAX_ROW:
        return target.points[np.argmax(weights, axis=1)].copy()
    if mode is CounterfactualMode.AITCHISON_MEAN:
        return clr_inv(weights @ clr(target.points), epsilon)
    return close_rows(weights @ target.points, epsilon)


@unit_interval("t")
def diamond_interpolate(
    x: CompositionLike, y: CompositionLike, t: float
) -> Composition:
    """Interpolate from ``x`` to ``y`` along ``x ⋄ ((1 - t) u + t p)``.

    Here ``u`` is the uniform composition and ``p = C(y ⋄ x⁻¹)``, so that
    ``y = x ⋄ p``.

    Raises:
        DimensionError: ``x`` and ``y`` differ in dimension.
        InvalidParameter: ``t`` is outside ``[0, 1]``.
    """
    x_parts = np.asarray(x, dtype=float)
    p = np.asarray(perturb(y, inverse(x_parts)))
    if t == 0:
        return Composition(x_parts)
    d = p.shape[0]
    return perturb(x_parts, (1.0 - t) / d + t * p)
