import numpy as np
import pytest
from hypothesis import given, seed
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from simplexcf import (
    closure,
    DimensionError,
    InvalidDimension,
    LogRatioTransform,
    TransformKind,
    aitchison_distance,
    alr,
    alr_inv,
    clr,
    clr_inv,
    ilr,
    ilr_basis,
    ilr_inv,
    perturb,
    uniform,
)
from tests import gap, random_compositions

LOG = np.log

dimensions = st.integers(min_value=2, max_value=8)
positive = st.floats(1e-3, 1e3)
parts = dimensions.flatmap(lambda d: arrays(np.float64, (d,), elements=positive))
pairs = dimensions.flatmap(lambda d: arrays(np.float64, (2, d), elements=positive))


def test_alr_examples():
    assert np.allclose(alr(uniform(3)), [0, 0], atol=1e-15)
    assert np.allclose(alr([0.2, 0.3, 0.5]), [-0.916291, -0.510826], atol=1e-6)
    assert np.allclose(alr([0.2, 0.3, 0.5]), [LOG(0.4), LOG(0.6)], atol=1e-15)


def test_alr_inv_examples():
    assert gap(alr_inv([0, 0]), uniform(3)) < 1e-15
    assert np.allclose(alr_inv([LOG(2), LOG(2)]), [0.4, 0.4, 0.2], atol=1e-15)


def test_alr_inv_does_not_overflow():
    x = alr_inv([700.0, 0.0])
    assert np.all(np.isfinite(np.asarray(x)))
    assert x[0] == pytest.approx(1.0, abs=1e-12)
    assert x[1] > 0 and x[2] > 0


def test_clr_examples():
    assert np.allclose(clr(uniform(4)), 0, atol=1e-15)
    expected = [2 / 3 * LOG(2), -1 / 3 * LOG(2), -1 / 3 * LOG(2)]
    assert np.allclose(clr([0.5, 0.25, 0.25]), expected, atol=1e-15)
    rounded = [0.462098, -0.231049, -0.231049]
    assert np.allclose(clr([0.5, 0.25, 0.25]), rounded, atol=1e-6)
    assert gap(clr_inv(np.zeros(5)), uniform(5)) < 1e-15


def test_clr_inv_is_shift_invariant(rng):
    z = rng.normal(size=4)
    assert gap(clr_inv(z), clr_inv(z + 3.5)) < 1e-14


def test_ilr_basis_two_parts():
    basis = ilr_basis(2)
    assert basis.shape == (2, 1)
    assert np.allclose(basis[:, 0], [1 / np.sqrt(2), -1 / np.sqrt(2)])


@pytest.mark.parametrize("d", [2, 3, 5, 10])
def test_ilr_basis_is_an_orthonormal_contrast(d):
    basis = ilr_basis(d)
    assert basis.shape == (d, d - 1)
    assert np.allclose(basis.T @ basis, np.eye(d - 1), atol=1e-14)
    assert np.allclose(np.ones(d) @ basis, 0, atol=1e-14)


def test_ilr_basis_rejects_small_dimension():
    with pytest.raises(InvalidDimension):
        ilr_basis(1)


def test_ilr_examples():
    assert np.allclose(ilr(uniform(3)), [0, 0], atol=1e-15)
    assert gap(ilr_inv([0.0, 0.0, 0.0]), uniform(4)) < 1e-15
    with pytest.raises(DimensionError):
        ilr([0.2, 0.3, 0.5], ilr_basis(4))
    with pytest.raises(DimensionError):
        ilr_inv([0.1, 0.2], ilr_basis(4))


@pytest.mark.parametrize("d", [2, 3, 5, 10])
def test_round_trips(rng, d):
    xs = random_compositions(rng, pytest.TRIALS, d)
    assert gap(alr_inv(alr(xs)), xs) < pytest.TOL
    assert gap(clr_inv(clr(xs)), xs) < pytest.TOL
    assert gap(ilr_inv(ilr(xs)), xs) < pytest.TOL


def test_single_vectors_come_back_as_compositions(rng):
    x = random_compositions(rng, 1, 3)[0]
    for back in (alr_inv(alr(x)), clr_inv(clr(x)), ilr_inv(ilr(x))):
        assert back.d == 3
        assert gap(back, x) < pytest.TOL


def test_clr_and_ilr_are_isometries(rng):
    xs = random_compositions(rng, 100, 5)
    ys = random_compositions(rng, 100, 5)
    for x, y in zip(xs, ys):
        distance = aitchison_distance(x, y)
        assert np.linalg.norm(clr(x) - clr(y)) == pytest.approx(distance, abs=1e-10)
        assert np.linalg.norm(ilr(x) - ilr(y)) == pytest.approx(distance, abs=1e-10)


def test_alr_is_not_an_isometry():
    x, y = [0.2, 0.3, 0.5], [0.6, 0.3, 0.1]
    assert np.linalg.norm(alr(x) - alr(y)) != pytest.approx(
        aitchison_distance(x, y), abs=1e-3
    )


def test_ilr_is_a_homomorphism(rng):
    xs = random_compositions(rng, 200, 4)
    ys = random_compositions(rng, 200, 4)
    for x, y in zip(xs, ys):
        assert gap(ilr(perturb(x, y)), ilr(x) + ilr(y)) < 1e-10


@pytest.mark.parametrize("kind", list(TransformKind))
def test_transform_object(rng, kind):
    transform = LogRatioTransform.create(kind, 4)
    xs = random_compositions(rng, 50, 4)

    forward = transform.forward(xs)
    assert forward.shape == (50, 4 if kind is TransformKind.CLR else 3)
    assert gap(transform.inverse(forward), xs) < pytest.TOL

    coords = transform.coordinates(xs)
    assert coords.shape == (50, transform.coordinates_dim)
    assert gap(transform.from_coordinates(coords), xs) < pytest.TOL
    if kind is not TransformKind.ALR:
        assert gap(coords, ilr(xs)) < 1e-14

    with pytest.raises(DimensionError):
        transform.forward(random_compositions(rng, 2, 3))
    with pytest.raises(DimensionError):
        transform.from_coordinates(np.zeros((2, 4)))


def test_transform_create_validates():
    assert LogRatioTransform.create("ilr", 3).kind is TransformKind.ILR
    with pytest.raises(ValueError):
        LogRatioTransform.create("log", 3)
    with pytest.raises(InvalidDimension):
        LogRatioTransform.create(TransformKind.ALR, 1)


@seed(1)
@given(raw=parts)
def test_round_trip_of_arbitrary_parts(raw):
    x = closure(raw)
    for forward, back in ((alr, alr_inv), (clr, clr_inv), (ilr, ilr_inv)):
        assert gap(back(forward(x)), x) < pytest.TOL


@seed(2)
@given(pair=pairs)
def test_ilr_preserves_distances(pair):
    x, y = closure(pair[0]), closure(pair[1])
    expected = np.linalg.norm(ilr(x) - ilr(y))
    assert aitchison_distance(x, y) == pytest.approx(expected, rel=1e-9, abs=1e-12)
