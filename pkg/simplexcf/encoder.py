"""Categorical columns as compositions.

A multinomial logistic regression fitted on the other columns turns every
label into its vector of predicted class probabilities. The first category in
sorted order is the reference, so a model with ``d`` categories carries
``d - 1`` coefficient vectors over an intercept plus ``p`` predictors:

    T(x) = C(1, exp(x'β_2), ..., exp(x'β_d)).

Scores computed by other models can be ingested from CSV instead.
"""
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import scipy.optimize
from scipy.special import log_softmax

from .exceptions import (
    DimensionError,
    IoError,
    InvalidValue,
    MalformedScores,
    MissingCategory,
    SchemaError,
)
from .io import DatasetSchema, score_columns
from .models import LabelMode, Provenance
from .simplex import DEFAULT_EPSILON, Composition, CompositionLike, close_rows

logger = logging.getLogger(__name__)

DEFAULT_L2 = 1e-4
DEFAULT_MAX_ITER = 500
DEFAULT_TOL = 1e-8
SCORE_SUM_GATE = 0.01


###################################################################################
#                                 DESIGN MATRIX                                   #
###################################################################################


@dataclass(frozen=True)
class DesignMatrix:
    """How predictor columns become a numeric design matrix.

    Categorical predictors are one-hot encoded with their first category as
    reference; numeric predictors are standardized with the mean and standard
    deviation seen at fit time. Applying the same instance to counterfactual
    rows keeps their encoding comparable with the training rows.

    Args:
        predictors: The predictor columns, in order.
        levels: The categories of each categorical predictor.
        centers: The training mean of each numeric predictor.
        scales: The training standard deviation of each numeric predictor.
    """

    predictors: Tuple[str, ...]
    levels: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    centers: Dict[str, float] = field(default_factory=dict)
    scales: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def fit(
        cls, frame: pd.DataFrame, predictors: Sequence[str], schema: DatasetSchema
    ) -> "DesignMatrix":
        levels, centers, scales = {}, {}, {}
        for name in predictors:
            column = schema.column(name)
            if column.is_categorical:
                levels[name] = column.categories
                continue
            values = frame[name].to_numpy(dtype=float)
            centers[name] = float(values.mean()) if values.size else 0.0
            scale = float(values.std()) if values.size else 0.0
            scales[name] = scale if scale > 0 else 1.0
        return cls(tuple(predictors), levels, centers, scales)

    @property
    def feature_names(self) -> List[str]:
        names = []
        for name in self.predictors:
            if name in self.levels:
                names.extend(f"{name}={level}" for level in self.levels[name][1:])
            else:
                names.append(name)
        return names

    @property
    def p(self) -> int:
        return len(self.feature_names)

    def transform(self, frame: pd.DataFrame) -> np.ndarray:
        """The ``n × p`` design matrix of ``frame``, without intercept.

        Raises:
            SchemaError: A predictor is missing or holds an unknown category.
        """
        missing = [name for name in self.predictors if name not in frame.columns]
        if missing:
            raise SchemaError(f"Predictor columns {missing} are missing")
        blocks = [np.empty((len(frame), 0))]
        for name in self.predictors:
            if name in self.levels:
                codes = pd.Categorical(frame[name], categories=self.levels[name]).codes
                if np.any(codes < 0):
                    stray = sorted(set(frame[name]) - set(self.levels[name]))
                    raise SchemaError(f"Column {name!r} holds unknown levels {stray}")
                onehot = codes[:, None] == np.arange(1, len(self.levels[name]))
                blocks.append(onehot.astype(float))
            else:
                values = frame[name].to_numpy(dtype=float)
                scaled = (values - self.centers[name]) / self.scales[name]
                blocks.append(scaled[:, None])
        return np.hstack(blocks)


###################################################################################
#                                MULTINOMIAL LOGIT                                #
###################################################################################


@dataclass(frozen=True, eq=False)
class MultinomialModel:
    """A fitted multinomial logistic regression.

    Args:
        categories: The class labels; the first one is the reference.
        coefficients: A ``(p + 1) × (d - 1)`` matrix, intercept in row 0 and
            one column per non-reference category.
        converged: Whether the optimizer met the gradient tolerance.
        iterations: The number of optimizer iterations.
        losses: The training loss after every iteration.
        design: The predictor encoding, when fitted from a data frame.
    """

    categories: Tuple[str, ...]
    coefficients: np.ndarray
    converged: bool = True
    iterations: int = 0
    losses: Tuple[float, ...] = ()
    design: Optional[DesignMatrix] = None

    def __post_init__(self) -> None:
        coefficients = np.array(self.coefficients, dtype=float)
        if coefficients.ndim != 2 or coefficients.shape[1] != len(self.categories) - 1:
            raise DimensionError(len(self.categories) - 1, coefficients.shape[-1])
        coefficients.setflags(write=False)
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def d(self) -> int:
        return len(self.categories)

    @property
    def p(self) -> int:
        return self.coefficients.shape[0] - 1

    @property
    def reference_category(self) -> str:
        return self.categories[0]


def _with_intercept(features: np.ndarray) -> np.ndarray:
    return np.hstack([np.ones((features.shape[0], 1)), features])


def _linear_scores(coefficients: np.ndarray, design: np.ndarray) -> np.ndarray:
    scores = design @ coefficients
    return np.hstack([np.zeros((design.shape[0], 1)), scores])


def multinomial_loss(
    coefficients: np.ndarray, design: np.ndarray, labels: np.ndarray, l2: float
) -> Tuple[float, np.ndarray]:
    """The penalized mean negative log-likelihood and its gradient.

    The intercept row is not penalized, so an intercept-only fit reproduces
    the class frequencies exactly.

    Args:
        coefficients: The ``(p + 1) × (d - 1)`` coefficients, or the same
            values flattened.
        design: The ``n × (p + 1)`` design matrix, intercept column first.
        labels: The ``n`` category indices in ``[0, d)``.
        l2: The ridge penalty ``λ`` in ``λ/2 ‖β‖²``.

    Returns:
        The loss and its gradient, shaped like ``coefficients``.
    """
    shape = np.shape(coefficients)
    beta = np.reshape(coefficients, (design.shape[1], -1))
    n = design.shape[0]
    log_probs = log_softmax(_linear_scores(beta, design), axis=1)
    rows = np.arange(n)
    loss = -log_probs[rows, labels].mean()

    residual = np.exp(log_probs)
    residual[rows, labels] -= 1.0
    gradient = design.T @ residual[:, 1:] / n

    penalized = beta.copy()
    penalized[0] = 0.0
    loss += 0.5 * l2 * float(np.sum(penalized ** 2))
    gradient += l2 * penalized
    return float(loss), gradient.reshape(shape)


def fit_mlr(
    features: np.ndarray,
    labels: Sequence[int],
    categories: Sequence[str],
    l2: float = DEFAULT_L2,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    column: str = "label",
) -> MultinomialModel:
    """Fit a multinomial logistic regression by full-batch L-BFGS from zero.

    Args:
        features: The ``n × p`` design matrix, without intercept.
        labels: The ``n`` category indices.
        categories: The ``d`` category names, reference first.
        l2: The ridge penalty on the non-intercept coefficients.
        max_iter: The iteration limit.
        tol: The gradient tolerance.
        column: The column name used in error messages.

    Returns:
        The fitted model; ``converged`` is false when the gradient tolerance
        was not met, in which case the last iterate is returned.

    Raises:
        DimensionError: ``features`` and ``labels`` differ in length.
        InvalidValue: A feature is not finite.
        MissingCategory: A category has no training row.
    """
    features = np.asarray(features, dtype=float)
    if features.ndim == 1:
        features = features[:, None]
    labels = np.asarray(labels, dtype=int)
    if features.shape[0] != labels.shape[0]:
        raise DimensionError(features.shape[0], labels.shape[0])
    if not np.all(np.isfinite(features)):
        raise InvalidValue(features[~np.isfinite(features)][0], "features")
    d = len(categories)
    counts = np.bincount(labels, minlength=d)
    for index in np.flatnonzero(counts == 0):
        raise MissingCategory(column, categories[index])

    design = _with_intercept(features)
    x0 = np.zeros(design.shape[1] * (d - 1))
    losses: List[float] = []

    def objective(beta):
        return multinomial_loss(beta, design, labels, l2)

    def record(beta):
        value = objective(beta)[0]
        losses.append(value)
        logger.debug("MLR %s iteration %d: loss %.12g", column, len(losses), value)

    result = scipy.optimize.minimize(
        objective,
        x0,
        jac=True,
        method="L-BFGS-B",
        callback=record,
        options={"maxiter": max_iter, "gtol": tol, "ftol": 1e-15},
    )
    beta = result.x.reshape(design.shape[1], d - 1)
    gradient_norm = float(np.abs(objective(result.x)[1]).max())
    converged = gradient_norm <= tol
    if not converged:
        logger.warning(
            "MLR for %r stopped after %d iterations with gradient norm %.3g",
            column,
            result.nit,
            gradient_norm,
        )
    return MultinomialModel(
        tuple(categories),
        beta,
        converged=converged,
        iterations=int(result.nit),
        losses=tuple(losses),
    )


def predict_proba(
    model: MultinomialModel, features: np.ndarray, epsilon: float = DEFAULT_EPSILON
) -> np.ndarray:
    """The predicted composition of every row of an ``n × p`` design matrix."""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    if features.shape[1] != model.p:
        raise DimensionError(model.p, features.shape[1])
    scores = _linear_scores(model.coefficients, _with_intercept(features))
    shifted = scores - scores.max(axis=1, keepdims=True)
    return close_rows(np.exp(shifted), epsilon)


def predict(
    model: MultinomialModel, row: Sequence[float], epsilon: float = DEFAULT_EPSILON
) -> Composition:
    """The softmax of ``(0, x'β_2, ..., x'β_d)`` for one feature vector.

    Raises:
        DimensionError: ``row`` does not have ``p`` entries.
    """
    row = np.asarray(row, dtype=float).reshape(-1)
    if row.shape[0] != model.p:
        raise DimensionError(model.p, row.shape[0])
    return Composition(predict_proba(model, row[None, :], epsilon)[0])


###################################################################################
#                                 ENCODED COLUMNS                                 #
###################################################################################


@dataclass(frozen=True, eq=False)
class EncodedColumn:
    """The composition of every row of one categorical column.

    Args:
        name: The column name.
        categories: The category labels, one per part.
        scores: An ``n × d`` array of compositions, one row per dataset row.
        provenance: Whether the scores were fitted here or ingested.
        model: The fitted model, for fitted scores.
    """

    name: str
    categories: Tuple[str, ...]
    scores: np.ndarray = field(repr=False)
    provenance: Provenance = Provenance.FITTED_MLR
    model: Optional[MultinomialModel] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        scores = np.array(self.scores, dtype=float)
        if scores.ndim != 2 or scores.shape[1] != len(self.categories):
            raise DimensionError(len(self.categories), scores.shape[-1])
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)

    @property
    def d(self) -> int:
        return len(self.categories)

    def __len__(self) -> int:
        return self.scores.shape[0]

    def score_columns(self) -> List[str]:
        return score_columns(self.name, self.categories)


def load_external_scores(
    path: Union[str, Path],
    column: str,
    categories: Sequence[str],
    epsilon: float = DEFAULT_EPSILON,
) -> EncodedColumn:
    """Ingest probability scores computed by another model.

    The file has one ``<column>__<category>`` column per category, rows in
    dataset order. Rows whose sum is within 0.01 of one are closed.

    Raises:
        IoError: The file cannot be read.
        SchemaError: A score column is missing.
        InvalidValue: A score is negative or not finite.
        MalformedScores: A row sum is more than 0.01 away from one.
    """
    names = score_columns(column, categories)
    try:
        frame = pd.read_csv(path, encoding="utf-8")
    except OSError as e:
        raise IoError(path) from e
    missing = [name for name in names if name not in frame.columns]
    if missing:
        raise SchemaError(f"{path} lacks score columns {missing}")
    scores = frame[names].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
    bad = ~np.isfinite(scores) | (scores < 0)
    if bad.any():
        raise InvalidValue(scores[bad][0], f"scores of {column!r}")
    totals = scores.sum(axis=1)
    off = np.flatnonzero(np.abs(totals - 1.0) > SCORE_SUM_GATE)
    if off.size:
        raise MalformedScores(int(off[0]) + 1, float(totals[off[0]]))
    logger.info("Loaded %d external score rows for %r", len(scores), column)
    return EncodedColumn(
        column,
        tuple(categories),
        close_rows(scores, epsilon),
        provenance=Provenance.EXTERNAL_FILE,
    )


def label_indices(frame: pd.DataFrame, column: str, categories: Sequence[str]):
    codes = pd.Categorical(frame[column], categories=list(categories)).codes
    if np.any(codes < 0):
        stray = sorted(set(frame[column]) - set(categories))
        raise SchemaError(f"Column {column!r} holds unknown categories {stray}")
    return codes.astype(int)


def encode_column(
    frame: pd.DataFrame,
    column: str,
    schema: DatasetSchema,
    predictors: Optional[Sequence[str]] = None,
    l2: float = DEFAULT_L2,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    epsilon: float = DEFAULT_EPSILON,
) -> Tuple[MultinomialModel, EncodedColumn]:
    """Fit a classifier for ``column`` and score every row with it.

    Args:
        frame: The dataset.
        column: The categorical column to encode.
        schema: The dataset schema.
        predictors: The predictor columns; every other column by default.
        l2: The ridge penalty.
        max_iter: The optimizer iteration limit.
        tol: The optimizer gradient tolerance.
        epsilon: The zero floor.

    Returns:
        The fitted model (carrying its design) and the encoded column.

    Raises:
        SchemaError: ``column`` is not categorical or a predictor is unknown.
        MissingCategory: A category has no row.
    """
    categories = schema.categories(column)
    if predictors is None:
        predictors = [name for name in schema.names if name != column]
    elif column in predictors:
        raise SchemaError(f"Column {column!r} cannot predict itself")
    design = DesignMatrix.fit(frame, predictors, schema)
    features = design.transform(frame)
    labels = label_indices(frame, column, categories)
    model = fit_mlr(features, labels, categories, l2, max_iter, tol, column=column)
    model = replace(model, design=design)
    logger.info(
        "Encoded %r (%d categories) on %d predictor columns",
        column,
        len(categories),
        design.p,
    )
    scores = predict_proba(model, features, epsilon)
    return model, EncodedColumn(column, categories, scores, model=model)


###################################################################################
#                                     LABELS                                      #
###################################################################################


def to_labels(
    scores: np.ndarray,
    categories: Sequence[str],
    mode: Union[LabelMode, str] = LabelMode.ARGMAX,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Turn every row of an ``n × d`` score array into a label.

    Args:
        scores: The compositions.
        categories: The labels, one per part.
        mode: ``argmax`` picks the largest part (lowest index on ties);
            ``sample`` draws a label with the composition as probabilities.
        rng: The generator used by ``sample``; seeded with 0 when omitted.

    Raises:
        DimensionError: The score width differs from the number of categories.
    """
    scores = np.atleast_2d(np.asarray(scores, dtype=float))
    if scores.shape[1] != len(categories):
        raise DimensionError(len(categories), scores.shape[1])
    if LabelMode(mode) is LabelMode.ARGMAX:
        index = np.argmax(scores, axis=1)
    else:
        rng = rng if rng is not None else np.random.default_rng(0)
        cumulative = np.cumsum(scores, axis=1)
        draws = rng.random(scores.shape[0]) * cumulative[:, -1]
        index = (draws[:, None] >= cumulative).sum(axis=1)
        index = np.minimum(index, len(categories) - 1)
    return np.asarray(categories, dtype=object)[index]


def to_label(
    x: CompositionLike,
    categories: Sequence[str],
    mode: Union[LabelMode, str] = LabelMode.ARGMAX,
    seed: Optional[int] = None,
) -> str:
    """The label of one composition; ``sample`` draws are reproducible per seed."""
    rng = np.random.default_rng(seed if seed is not None else 0)
    return str(to_labels(np.asarray(x)[None, :], categories, mode, rng)[0])
