import numpy as np


def random_compositions(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """``n`` compositions drawn from a flat Dirichlet, kept away from zero."""
    return rng.dirichlet(np.ones(d), size=n) * 0.98 + 0.02 / d


def gap(x, y) -> float:
    """The sup-norm distance between two compositions or arrays."""
    difference = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return float(np.max(np.abs(difference)))
