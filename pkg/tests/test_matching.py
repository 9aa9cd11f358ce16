import itertools
import time

import numpy as np
import pytest

from simplexcf import (
    CompositionSample,
    CounterfactualMode,
    DegenerateInput,
    DimensionError,
    InvalidParameter,
    closure,
    dirichlet_cost,
    match,
)
from simplexcf.matching import (
    CouplingPlan,
    cost_matrix,
    counterfactual_of,
    counterfactuals,
    diamond_interpolate,
    solve_coupling,
)
from tests import gap, random_compositions


@pytest.fixture
def samples(rng):
    source = CompositionSample(0, random_compositions(rng, 9, 3))
    target = CompositionSample(1, random_compositions(rng, 6, 3))
    return source, target


def test_dirichlet_cost_example():
    x, y = [0.5, 0.25, 0.25], [0.25, 0.25, 0.5]
    assert dirichlet_cost(x, y) == pytest.approx(0.154151, abs=1e-6)
    assert dirichlet_cost(x, y) == pytest.approx(np.log(3.5 / 3), abs=1e-14)


def test_dirichlet_cost_properties(rng):
    xs = random_compositions(rng, 200, 4)
    ys = random_compositions(rng, 200, 4)
    for x, y in zip(xs, ys):
        assert dirichlet_cost(x, x) == pytest.approx(0, abs=1e-15)
        assert dirichlet_cost(x, y) > 0
    assert dirichlet_cost(xs[0], ys[0]) != pytest.approx(dirichlet_cost(ys[0], xs[0]))
    with pytest.raises(DimensionError):
        dirichlet_cost([0.5, 0.5], [0.2, 0.3, 0.5])


def test_cost_matrix(samples):
    source, target = samples
    C = cost_matrix(source, target)
    assert C.shape == (9, 6)
    for i, j in itertools.product(range(9), range(6)):
        assert C[i, j] == pytest.approx(dirichlet_cost(source[i], target[j]), abs=1e-12)

    same = cost_matrix(source, CompositionSample(1, source.points))
    assert np.all(np.diag(same) == 0)
    single = cost_matrix(
        CompositionSample(0, source.points[:1]), CompositionSample(1, target.points[:1])
    )
    assert single.shape == (1, 1)


def test_cost_matrix_dimension_mismatch(rng, samples):
    source, _ = samples
    with pytest.raises(DimensionError):
        cost_matrix(source, CompositionSample(1, random_compositions(rng, 4, 4)))


def test_solve_coupling_examples():
    plan = solve_coupling(np.array([[0.7]]))
    assert plan.P.tolist() == [[1.0]]
    assert plan.total_cost == pytest.approx(0.7)

    plan = solve_coupling(np.array([[0.0, 5.0], [5.0, 0.0]]))
    assert np.array_equal(plan.P, np.eye(2))
    assert plan.total_cost == 0

    with pytest.raises(DegenerateInput):
        solve_coupling(np.empty((0, 2)))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_square_plans_reach_the_best_permutation(rng, n):
    C = rng.random((n, n))
    best = min(
        sum(C[i, j] for i, j in enumerate(perm))
        for perm in itertools.permutations(range(n))
    )
    plan = solve_coupling(C)
    assert plan.total_cost == pytest.approx(best, abs=1e-12)


def test_plan_lies_in_the_transportation_polytope(samples):
    source, target = samples
    plan = match(source, target)
    assert plan.n0 == 9 and plan.n1 == 6
    assert np.all(plan.P >= 0)
    assert np.allclose(plan.P.sum(axis=1), 1.0, atol=1e-12)
    assert np.allclose(plan.P.sum(axis=0), 9 / 6, atol=1e-12)
    assert plan.support_size <= 9 + 6 - 1
    assert plan.total_cost == pytest.approx(
        np.sum(plan.P * cost_matrix(source, target))
    )
    assert all(w > 0 for _, _, w in plan.triplets())
    assert len(plan.triplets()) == plan.support_size


def test_match_is_deterministic(samples):
    first, second = match(*samples), match(*samples)
    assert np.array_equal(first.P, second.P)


def test_row_weights(samples):
    plan = match(*samples)
    assert plan.row_weights(0).sum() == pytest.approx(1.0)
    with pytest.raises(IndexError):
        plan.row_weights(9)


def test_permutation_plan_gives_matched_point(rng):
    target = CompositionSample(1, random_compositions(rng, 3, 3))
    plan = CouplingPlan(np.eye(3)[[2, 0, 1]], 0.0)
    for mode in CounterfactualMode:
        assert gap(counterfactual_of(plan, target, 0, mode), target[2]) < 1e-12
        assert gap(counterfactual_of(plan, target, 1, mode), target[0]) < 1e-12


def test_weighted_counterfactuals():
    target = CompositionSample(1, [[0.6, 0.2, 0.2], [0.2, 0.6, 0.2]])
    plan = CouplingPlan(np.array([[0.5, 0.5]]), 0.0)
    euclidean = counterfactual_of(plan, target, 0, CounterfactualMode.EUCLIDEAN_MEAN)
    assert np.allclose(euclidean, [0.4, 0.4, 0.2])

    aitchison = counterfactual_of(plan, target, 0, CounterfactualMode.AITCHISON_MEAN)
    geometric = np.sqrt(np.prod(target.points, axis=0))
    assert gap(aitchison, closure(geometric)) < 1e-12

    argmax = counterfactual_of(plan, target, 0, "argmax_row")
    assert argmax == target[0]

    with pytest.raises(IndexError):
        counterfactual_of(plan, target, 1)
    with pytest.raises(DimensionError):
        counterfactual_of(plan, CompositionSample(1, target.points[:1]), 0)


@pytest.mark.parametrize("mode", list(CounterfactualMode))
def test_vectorized_counterfactuals(samples, mode):
    source, target = samples
    plan = match(source, target)
    rows = counterfactuals(plan, target, mode)
    assert rows.shape == (9, 3)
    for i in range(9):
        assert gap(rows[i], counterfactual_of(plan, target, i, mode)) < 1e-12


def test_diamond_interpolate(rng):
    x, y = random_compositions(rng, 2, 4)
    assert gap(diamond_interpolate(x, y, 0.0), x) < 1e-15
    assert gap(diamond_interpolate(x, y, 1.0), y) < 1e-10
    for t in (0.1, 0.5, 0.9):
        assert gap(diamond_interpolate(x, x, t), x) < 1e-12
        assert diamond_interpolate(x, y, t).d == 4

    with pytest.raises(InvalidParameter):
        diamond_interpolate(x, y, 1.01)
    with pytest.raises(DimensionError):
        diamond_interpolate(x, [0.5, 0.5], 0.5)


def best_time(function, *args, repeat=1):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        result = function(*args)
        times.append(time.perf_counter() - start)
    return min(times), result


def test_scaling_from_200_to_400_points(rng, record_property):
    timings = {}
    for n in (200, 400):
        source = CompositionSample(0, random_compositions(rng, n, 3))
        target = CompositionSample(1, random_compositions(rng, n, 3))
        build, C = best_time(cost_matrix, source, target, repeat=5)
        solve, plan = best_time(solve_coupling, C)
        timings[n] = (build, solve)
        assert np.allclose(plan.P.sum(axis=1), 1.0, atol=1e-8)
        assert np.allclose(plan.P.sum(axis=0), 1.0, atol=1e-8)

    build_ratio = timings[400][0] / timings[200][0]
    solve_ratio = timings[400][1] / timings[200][1]
    record_property("cost_matrix_ratio", round(build_ratio, 2))
    record_property("solve_coupling_ratio", round(solve_ratio, 2))
    assert 2.0 < build_ratio < 8.0
    assert timings[400][1] < 120.0
