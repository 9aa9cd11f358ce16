import numpy as np
import pandas as pd

from simplexcf.datasets import credit_lookalike, logistic_normal_groups, scm_sample
from simplexcf.logratio import ilr


def test_logistic_normal_groups():
    source, target = logistic_normal_groups(n=4000, d=4, seed=1)
    assert (source.group_label, target.group_label) == (0, 1)
    assert source.points.shape == target.points.shape == (4000, 4)
    assert np.allclose(source.points.sum(axis=1), 1.0)
    assert np.abs(ilr(source.points).mean(axis=0)).max() < 0.1


def test_credit_lookalike():
    frame = credit_lookalike(n=300, seed=2)
    assert list(frame.columns) == [
        "Sex",
        "Age",
        "Duration",
        "Amount",
        "Purpose",
        "Risk",
    ]
    assert set(frame["Sex"]) == {"female", "male"}
    assert set(frame["Purpose"]) == {"cars", "equipment", "other"}
    assert frame["Age"].between(19, 75).all()
    pd.testing.assert_frame_equal(frame, credit_lookalike(n=300, seed=2))


def test_scm_sample_depends_on_the_sensitive_attribute():
    frame = scm_sample(n=5000, seed=3)
    assert set(frame["S"]) == {"A", "B"}
    means = frame.groupby("S")["X1"].mean()
    assert means["B"] - means["A"] > 0.8
    shares = pd.crosstab(frame["S"], frame["X2"], normalize="index")
    assert shares.loc["B", "c"] > shares.loc["A", "c"]
