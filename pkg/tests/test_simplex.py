import numpy as np
import pytest

from simplexcf import (
    Composition,
    CompositionSample,
    DegenerateInput,
    DimensionError,
    InvalidDimension,
    InvalidValue,
    aitchison_distance,
    aitchison_inner,
    aitchison_norm,
    closure,
    clr,
    inverse,
    perturb,
    power,
    uniform,
)

from tests import gap, random_compositions


def test_closure_normalizes():
    assert np.allclose(closure([2, 6, 2]), [0.2, 0.6, 0.2], atol=1e-15)
    assert np.allclose(closure([1, 1, 1, 1]), [0.25] * 4, atol=1e-15)


def test_closure_lifts_zeros_to_floor():
    x = closure([0, 1, 3], epsilon=1e-9)
    total = 4 + 1e-9
    assert np.allclose(x, [1e-9 / total, 1 / total, 3 / total], rtol=1e-12, atol=0)
    assert x[0] == pytest.approx(2.5e-10, rel=1e-6)
    assert abs(sum(x) - 1) < 1e-15


def test_closure_is_idempotent(rng):
    for raw in rng.random((50, 4)) * 10:
        once = closure(raw)
        assert np.allclose(closure(once), once, atol=1e-15)


@pytest.mark.parametrize(
    "raw,error",
    [
        ([0, 0, 0], DegenerateInput),
        ([0.5, -0.1, 0.6], InvalidValue),
        ([0.5, np.nan, 0.6], InvalidValue),
        ([np.inf, 1.0], InvalidValue),
        ([1.0], InvalidDimension),
    ],
)
def test_closure_errors(raw, error):
    with pytest.raises(error):
        closure(raw)


def test_composition_validates():
    with pytest.raises(InvalidValue):
        Composition([0.5, 0.6])
    with pytest.raises(InvalidValue):
        Composition([0.0, 1.0])
    with pytest.raises(InvalidDimension):
        Composition([1.0])

    x = Composition([0.25, 0.75])
    assert x.d == len(x) == 2
    assert list(x) == [0.25, 0.75]
    assert x[1] == 0.75
    assert x == closure([1, 3])
    with pytest.raises(ValueError):
        x.parts[0] = 0.5


def test_composition_sample():
    sample = CompositionSample.from_array([[1, 1, 2], [0, 2, 2]], group_label=1)
    assert sample.n == len(sample) == 2
    assert sample.d == 3
    assert sample.group_label == 1
    assert np.allclose(sample[0], [0.25, 0.25, 0.5])
    assert np.allclose(sample.mean(), closure(sample.points.mean(axis=0)))

    with pytest.raises(DegenerateInput):
        CompositionSample.from_array(np.empty((0, 3)), group_label=0)
    with pytest.raises(DegenerateInput):
        CompositionSample.from_compositions([], group_label=0)
    with pytest.raises(InvalidValue):
        CompositionSample(2, [[0.5, 0.5]])


def test_perturb_examples():
    assert np.allclose(perturb([0.2, 0.3, 0.5], uniform(3)), [0.2, 0.3, 0.5])
    x = [0.5, 0.25, 0.25]
    assert np.allclose(perturb(x, inverse(x)), uniform(3), atol=1e-15)
    assert np.allclose(perturb([0.5, 0.5], [0.8, 0.2]), [0.8, 0.2])


def test_perturb_dimension_mismatch():
    with pytest.raises(DimensionError):
        perturb([0.5, 0.5], [0.2, 0.3, 0.5])
    with pytest.raises(DimensionError):
        aitchison_inner([0.5, 0.5], [0.2, 0.3, 0.5])
    with pytest.raises(DimensionError):
        aitchison_distance([0.5, 0.5], [0.2, 0.3, 0.5])


def test_inverse_examples():
    assert np.allclose(inverse([0.5, 0.25, 0.25]), [0.2, 0.4, 0.4])
    assert np.allclose(inverse(uniform(5)), uniform(5))
    assert np.allclose(inverse([0.9, 0.1]), [0.1, 0.9])


@pytest.mark.parametrize("d", [2, 3, 5, 10])
def test_group_axioms(rng, d):
    xs, ys, zs = (random_compositions(rng, pytest.TRIALS, d) for _ in range(3))
    neutral = uniform(d)
    for x, y, z in zip(xs, ys, zs):
        left = perturb(perturb(x, y), z)
        right = perturb(x, perturb(y, z))
        assert gap(left, right) < 1e-12
        assert gap(perturb(x, y), perturb(y, x)) < 1e-12
        assert gap(perturb(x, neutral), x) < 1e-12
        assert gap(perturb(x, inverse(x)), neutral) < 1e-12


def test_power(rng):
    x = random_compositions(rng, 1, 4)[0]
    assert np.allclose(power(x, 1.0), x, atol=1e-14)
    assert np.allclose(power(x, 0.0), uniform(4))
    assert np.allclose(power(x, -1.0), inverse(x), atol=1e-14)
    assert np.allclose(power(x, 2.0), perturb(x, x), atol=1e-14)


def test_inner_product_examples():
    assert aitchison_inner(uniform(3), [0.1, 0.3, 0.6]) == pytest.approx(0, abs=1e-15)
    x = [0.5, 0.25, 0.25]
    assert aitchison_inner(x, x) == pytest.approx(0.320302, abs=1e-6)
    assert aitchison_inner(x, x) == pytest.approx(2 * np.log(2) ** 2 / 3, abs=1e-14)
    assert aitchison_norm(x) == pytest.approx(np.sqrt(2 * np.log(2) ** 2 / 3))


@pytest.mark.parametrize("d", [2, 3, 5, 10])
def test_inner_product_matches_clr_dot(rng, d):
    xs = random_compositions(rng, 100, d)
    ys = random_compositions(rng, 100, d)
    for x, y in zip(xs, ys):
        assert aitchison_inner(x, y) == pytest.approx(clr(x) @ clr(y), abs=1e-10)


def test_distance_is_a_metric(rng):
    xs, ys, zs = (random_compositions(rng, 100, 4) for _ in range(3))
    for x, y, z in zip(xs, ys, zs):
        assert aitchison_distance(x, x) == pytest.approx(0, abs=1e-7)
        assert aitchison_distance(x, y) == pytest.approx(aitchison_distance(y, x))
        assert aitchison_distance(x, y) == pytest.approx(
            np.linalg.norm(clr(x) - clr(y)), abs=1e-10
        )
        assert aitchison_distance(x, z) <= (
            aitchison_distance(x, y) + aitchison_distance(y, z) + 1e-12
        )
