import json

import numpy as np
import pytest

from simplexcf.datasets import credit_lookalike, scm_sample


def pytest_configure():
    pytest.SEED = 20240601
    pytest.TOL = 1e-10
    pytest.DIMENSIONS = (2, 3, 5, 10)
    pytest.TRIALS = 1000
    pytest.CATEGORIES = ("cars", "equipment", "other")


@pytest.fixture
def rng():
    return np.random.default_rng(pytest.SEED)


@pytest.fixture
def credit_frame():
    return credit_lookalike(n=300, seed=7)


@pytest.fixture
def credit_csv(tmp_path, credit_frame):
    path = tmp_path / "credit.csv"
    credit_frame.to_csv(path, index=False)
    return path


@pytest.fixture
def scm_frame():
    return scm_sample(n=5000, seed=11)


@pytest.fixture
def write_config(tmp_path):
    """Write a JSON config next to the test's output directory."""

    def write(document):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(document), encoding="utf-8")
        return path

    return write
