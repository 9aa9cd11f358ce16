"""Exact transportation problems with integer masses.

``min <F, C>`` subject to ``F 1 = supply``, ``Fᵀ 1 = demand`` and ``F ≥ 0`` is
handed to the HiGHS dual simplex with sparse margin constraints. The simplex
stops at a vertex of the transportation polytope, and with integer margins
every vertex is integral, so flows are recovered exactly by rounding.
"""
import logging
from typing import Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .exceptions import DegenerateInput, InvalidValue, SolverFailure

logger = logging.getLogger(__name__)

#: HiGHS status for a hit iteration limit.
_ITERATION_LIMIT = 1


def margin_constraints(n0: int, n1: int) -> sparse.csr_matrix:
    """The ``(n0 + n1) × n0 n1`` row-sum and column-sum operator of a
    row-major flattened ``n0 × n1`` matrix."""
    rows = sparse.kron(sparse.identity(n0), np.ones((1, n1)))
    cols = sparse.kron(np.ones((1, n0)), sparse.identity(n1))
    return sparse.vstack([rows, cols], format="csr")


def transportation_simplex(
    cost: np.ndarray,
    supply: np.ndarray,
    demand: np.ndarray,
    max_pivots: Optional[int] = None,
) -> Tuple[np.ndarray, int]:
    """Solve ``min <F, C>`` over integer flows with the given margins.

    Args:
        cost: The ``n0 × n1`` cost matrix, finite and nonnegative.
        supply: The ``n0`` integer row masses.
        demand: The ``n1`` integer column masses, with the same total.
        max_pivots: The simplex iteration limit (default: the solver's own).

    Returns:
        The optimal integer flow matrix and the number of simplex iterations.

    Raises:
        DegenerateInput: An empty side.
        InvalidValue: A negative or non-finite cost, or unbalanced masses.
        SolverFailure: The iteration limit was hit or the solver gave up.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or 0 in cost.shape:
        raise DegenerateInput("The transport problem has an empty side.")
    if not np.all(np.isfinite(cost)) or np.any(cost < 0):
        bad = cost[~(np.isfinite(cost) & (cost >= 0))][0]
        raise InvalidValue(bad, "cost matrix")
    supply = np.asarray(supply, dtype=np.int64)
    demand = np.asarray(demand, dtype=np.int64)
    if supply.sum() != demand.sum():
        raise InvalidValue((int(supply.sum()), int(demand.sum())), "margins")

    n0, n1 = cost.shape
    options = {} if max_pivots is None else {"maxiter": int(max_pivots)}
    result = linprog(
        cost.ravel(),
        A_eq=margin_constraints(n0, n1),
        b_eq=np.concatenate([supply, demand]).astype(float),
        bounds=(0, None),
        method="highs-ds",
        options=options,
    )
    iterations = int(getattr(result, "nit", 0) or 0)
    if result.status == _ITERATION_LIMIT or result.x is None:
        raise SolverFailure(iterations)

    flow = np.rint(result.x).reshape(n0, n1).astype(np.int64)
    np.maximum(flow, 0, out=flow)
    if not (
        np.array_equal(flow.sum(axis=1), supply)
        and np.array_equal(flow.sum(axis=0), demand)
    ):
        raise SolverFailure(iterations)

    logger.debug("Dual simplex finished after %d iterations", iterations)
    return flow, iterations
