"""Seeded synthetic data.

Every generator draws from ``numpy.random.default_rng(seed)`` only, so equal
seeds give equal data on every platform.
"""
from typing import Tuple

import numpy as np
import pandas as pd
from scipy.special import softmax

from .logratio import ilr_inv
from .simplex import CompositionSample


def logistic_normal_groups(
    n: int = 500, d: int = 3, seed: int = 0
) -> Tuple[CompositionSample, CompositionSample]:
    """Two groups of compositions whose ilr coordinates are Gaussian.

    The groups differ in both mean and covariance.
    """
    rng = np.random.default_rng(seed)
    k = d - 1
    m0 = np.zeros(k)
    m1 = np.linspace(0.8, -0.4, k)
    S0 = 0.3 * np.eye(k)
    S1 = 0.5 * np.eye(k) + 0.2 * np.ones((k, k))
    z0 = rng.multivariate_normal(m0, S0, size=n)
    z1 = rng.multivariate_normal(m1, S1, size=n)
    return CompositionSample(0, ilr_inv(z0)), CompositionSample(1, ilr_inv(z1))


def _draw_labels(rng: np.random.Generator, logits: np.ndarray, labels) -> np.ndarray:
    probs = softmax(logits, axis=1)
    u = rng.random(probs.shape[0])[:, None]
    index = np.minimum((u >= np.cumsum(probs, axis=1)).sum(axis=1), len(labels) - 1)
    return np.asarray(labels, dtype=object)[index]


def credit_lookalike(n: int = 300, seed: int = 0) -> pd.DataFrame:
    """A small credit dataset whose loan purpose frequencies depend on sex.

    Columns: ``Sex`` (female, male), ``Age``, ``Duration``, ``Amount``,
    ``Purpose`` (cars, equipment, other) and ``Risk`` (bad, good).
    """
    rng = np.random.default_rng(seed)
    male = rng.random(n) < 0.65
    age = np.clip(np.round(rng.normal(35.0, 10.0, n) + 3.0 * male), 19, 75)
    duration = np.clip(np.round(rng.normal(20.0, 10.0, n)), 4, 72)
    amount = np.clip(np.round(rng.normal(3000.0, 1200.0, n) + 400.0 * male), 250, None)

    scaled_age = (age - 35.0) / 10.0
    scaled_amount = (amount - 3000.0) / 1200.0
    logits = np.column_stack(
        [
            0.6 * male + 0.5 * scaled_amount,
            -0.2 + 0.5 * male - 0.3 * scaled_age,
            0.4 - 0.8 * male + 0.2 * scaled_age,
        ]
    )
    purpose = _draw_labels(rng, logits, ["cars", "equipment", "other"])

    risk_logit = 0.9 - 0.04 * (duration - 20.0) - 0.2 * scaled_amount
    good = rng.random(n) < 1.0 / (1.0 + np.exp(-risk_logit))
    return pd.DataFrame(
        {
            "Sex": np.where(male, "male", "female"),
            "Age": age,
            "Duration": duration,
            "Amount": amount,
            "Purpose": purpose,
            "Risk": np.where(good, "good", "bad"),
        }
    )


def scm_sample(n: int = 5000, seed: int = 0) -> pd.DataFrame:
    """Rows of the chain ``S → X1 → X2 → X3 → Y``.

    ``S`` is binary (A, B), ``X1`` numeric, ``X2`` categorical over (a, b, c)
    with parents ``S, X1``, ``X3`` categorical over (u, v, w) with parents
    ``S, X2`` and ``Y`` a binary outcome (no, yes).
    """
    rng = np.random.default_rng(seed)
    s = (rng.random(n) < 0.5).astype(float)
    x1 = rng.normal(0.0, 1.0, n) + 1.0 * s

    x2 = _draw_labels(
        rng,
        np.column_stack([np.zeros(n), 0.5 * x1 + 1.0 * s, -0.5 + 1.5 * s]),
        ["a", "b", "c"],
    )
    is_b, is_c = (x2 == "b").astype(float), (x2 == "c").astype(float)

    x3 = _draw_labels(
        rng,
        np.column_stack(
            [np.zeros(n), 0.8 * is_b - 0.7 * s, 0.3 + 1.2 * is_c + 0.6 * s]
        ),
        ["u", "v", "w"],
    )
    y_logit = -0.3 + 0.5 * x1 + 0.4 * is_c - 0.6 * (x3 == "u")
    y = rng.random(n) < 1.0 / (1.0 + np.exp(-y_logit))
    return pd.DataFrame(
        {
            "S": np.where(s > 0, "B", "A"),
            "X1": x1,
            "X2": x2,
            "X3": x3,
            "Y": np.where(y, "yes", "no"),
        }
    )
