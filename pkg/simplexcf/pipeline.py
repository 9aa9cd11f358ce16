"""Sequential counterfactuals along the topological order of a causal graph.

The sensitive attribute is flipped first. Every step then replaces one column
of the source-group rows by its counterfactual, in declared order, so later
steps see the counterfactual values of earlier ones:

* numeric columns go through the empirical quantile map ``F1⁻¹ ∘ F0``,
  optionally within the strata of one categorical parent;
* categorical columns are scored by a classifier fitted on the sensitive
  attribute and the step's parents. Source rows are scored at their
  counterfactual parents, the scores are moved to the target group on the
  simplex (Gaussian transport, matching, or a fresh prediction with the
  sensitive attribute flipped) and turned back into labels.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Set, Tuple, Union

import numpy as np
import pandas as pd

from . import gaussian, matching
from .encoder import (
    DEFAULT_L2,
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    DesignMatrix,
    MultinomialModel,
    fit_mlr,
    label_indices,
    load_external_scores,
    predict_proba,
    to_labels,
)
from .exceptions import DegenerateInput, SchemaError
from .io import DatasetSchema, split_by_sensitive
from .matching import CouplingPlan
from .models import (
    CounterfactualMode,
    Direction,
    LabelMode,
    Provenance,
    TransformKind,
    TransportMethod,
    VariableKind,
)
from .simplex import DEFAULT_EPSILON, CompositionSample

logger = logging.getLogger(__name__)


###################################################################################
#                                      SPECS                                      #
###################################################################################


@dataclass(frozen=True)
class VariableStep:
    """One transported variable.

    Args:
        name: The column.
        kind: Numeric or categorical.
        parents: The columns the variable depends on.
        encoder: How categorical scores are obtained.
        transport: How categorical scores are moved to the target group.
        label_mode: How transported scores become labels.
        stratify_by: A categorical parent whose strata condition the quantile
            map of a numeric step.
        scores_file: The score CSV of an ``external_file`` encoder.
    """

    name: str
    kind: VariableKind
    parents: Tuple[str, ...] = ()
    encoder: Provenance = Provenance.FITTED_MLR
    transport: TransportMethod = TransportMethod.GAUSSIAN
    label_mode: LabelMode = LabelMode.ARGMAX
    stratify_by: Optional[str] = None
    scores_file: Optional[str] = None

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "VariableStep":
        return cls(
            name=data["name"],
            kind=VariableKind(data.get("kind", VariableKind.CATEGORICAL.value)),
            parents=tuple(data.get("parents", ())),
            encoder=Provenance(data.get("encoder", Provenance.FITTED_MLR.value)),
            transport=TransportMethod(
                data.get("transport", TransportMethod.GAUSSIAN.value)
            ),
            label_mode=LabelMode(data.get("label_mode", LabelMode.ARGMAX.value)),
            stratify_by=data.get("stratify_by"),
            scores_file=data.get("scores_file"),
        )


@dataclass(frozen=True)
class ScmSpec:
    """A sensitive source, the transported variables in topological order and
    an optional outcome sink that is never transported."""

    sensitive: str
    steps: Tuple[VariableStep, ...] = ()
    outcome: Optional[str] = None

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ScmSpec":
        return cls(
            sensitive=data["sensitive"],
            steps=tuple(VariableStep.from_dict(step) for step in data.get("steps", ())),
            outcome=data.get("outcome"),
        )


def _sensitive_problems(spec: ScmSpec, schema: DatasetSchema) -> List[str]:
    if spec.sensitive not in schema:
        return [f"sensitive column {spec.sensitive!r} is not in the dataset"]
    column = schema.column(spec.sensitive)
    if not column.is_categorical:
        return [f"sensitive column {spec.sensitive!r} is not categorical"]
    if len(column.categories) != 2:
        return [
            f"sensitive column {spec.sensitive!r} has "
            f"{len(column.categories)} categories, not 2"
        ]
    return []


def _name_problems(
    step: VariableStep, spec: ScmSpec, schema: DatasetSchema, preceding: Set[str]
) -> List[str]:
    name = step.name
    if name not in schema:
        return [f"step {name!r} is not a dataset column"]
    if name == spec.sensitive:
        return [f"step {name!r} is the sensitive column"]
    if name == spec.outcome:
        return [f"step {name!r} is the outcome column"]
    if name in preceding:
        return [f"step {name!r} is declared twice"]
    if schema.column(name).kind is not step.kind:
        return [
            f"step {name!r} is declared {step.kind.value} but the column is "
            f"{schema.column(name).kind.value}"
        ]
    return []


def _parent_problem(
    parent: str,
    step: VariableStep,
    spec: ScmSpec,
    schema: DatasetSchema,
    preceding: Set[str],
) -> Optional[str]:
    name = step.name
    if parent not in schema:
        return f"parent {parent!r} of step {name!r} is undeclared"
    if parent == spec.outcome:
        return f"outcome {parent!r} is used as a parent of {name!r}"
    if parent == name:
        return f"step {name!r} lists itself as a parent"
    if parent not in preceding:
        return f"parent {parent!r} of step {name!r} does not precede it"
    return None


def _option_problems(step: VariableStep, schema: DatasetSchema) -> List[str]:
    name, problems = step.name, []
    if step.stratify_by is not None:
        if step.kind is not VariableKind.NUMERIC:
            problems.append(f"step {name!r} is categorical and cannot stratify")
        elif step.stratify_by not in step.parents:
            problems.append(
                f"step {name!r} stratifies by {step.stratify_by!r}, "
                "which is not one of its parents"
            )
        elif not schema.column(step.stratify_by).is_categorical:
            problems.append(
                f"step {name!r} stratifies by numeric column {step.stratify_by!r}"
            )
    if step.encoder is Provenance.EXTERNAL_FILE:
        if step.scores_file is None:
            problems.append(f"step {name!r} reads external scores but names no file")
        if step.transport is TransportMethod.PREDICT:
            problems.append(
                f"step {name!r} has external scores and cannot be re-predicted"
            )
    return problems


def validate_spec(spec: ScmSpec, schema: DatasetSchema) -> List[str]:
    """Every way ``spec`` fails to fit ``schema``; empty when it is valid."""
    violations = _sensitive_problems(spec, schema)
    if spec.outcome is not None:
        if spec.outcome not in schema:
            violations.append(f"outcome column {spec.outcome!r} is not in the dataset")
        elif spec.outcome == spec.sensitive:
            violations.append("the outcome cannot be the sensitive column")

    preceding = {spec.sensitive}
    for step in spec.steps:
        violations.extend(_name_problems(step, spec, schema, preceding))
        for parent in step.parents:
            problem = _parent_problem(parent, step, spec, schema, preceding)
            if problem is not None:
                violations.append(problem)
        violations.extend(_option_problems(step, schema))
        preceding.add(step.name)
    return violations


###################################################################################
#                                 QUANTILE MAPS                                   #
###################################################################################


@dataclass(frozen=True, eq=False)
class QuantileMap:
    """The empirical map ``F1⁻¹ ∘ F0`` between two samples of one numeric column.

    Args:
        source: The source values, sorted ascending.
        target: The target values, sorted ascending.
    """

    source: np.ndarray
    target: np.ndarray

    @classmethod
    def fit(cls, source: Sequence[float], target: Sequence[float]) -> "QuantileMap":
        """Raises :class:`~.DegenerateInput` when a sample is empty."""
        source = np.sort(np.asarray(source, dtype=float))
        target = np.sort(np.asarray(target, dtype=float))
        if source.size == 0 or target.size == 0:
            raise DegenerateInput("A quantile map needs two nonempty samples.")
        source.setflags(write=False)
        target.setflags(write=False)
        return cls(source, target)

    def __call__(self, values: Union[float, Sequence[float]]) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        n, m = self.source.size, self.target.size
        below = np.searchsorted(self.source, values, side="left")
        upto = np.searchsorted(self.source, values, side="right")
        ranks = (below + upto) / (2.0 * n)
        positions = (np.arange(1, m + 1) - 0.5) / m
        return np.interp(ranks, positions, self.target)


def quantile_transport(qmap: QuantileMap, v: float) -> float:
    """Send ``v`` to the target value at its mid-rank in the source.

    Values beyond the plotting positions clamp to the target extremes.
    """
    return float(qmap(v))


###################################################################################
#                                    PIPELINE                                     #
###################################################################################


@dataclass
class PipelineResult:
    """The counterfactual rows and what was fitted to produce them.

    Args:
        frame: The source-group rows with every step replaced by its
            counterfactual and the sensitive column flipped.
        scores: The counterfactual composition of every categorical step.
        plans: The coupling of every matching step.
        models: The classifier of every fitted categorical step.
    """

    frame: pd.DataFrame
    scores: Dict[str, Tuple[Tuple[str, ...], np.ndarray]] = field(default_factory=dict)
    plans: Dict[str, CouplingPlan] = field(default_factory=dict)
    models: Dict[str, MultinomialModel] = field(default_factory=dict)


@dataclass(frozen=True)
class _Context:
    spec: ScmSpec
    schema: DatasetSchema
    source_mask: np.ndarray
    target_mask: np.ndarray
    transform: TransformKind
    mode: CounterfactualMode
    epsilon: float
    l2: float
    max_iter: int
    tol: float


def _transport_numeric(
    step: VariableStep,
    factual: pd.DataFrame,
    counterfactual: pd.DataFrame,
    ctx: _Context,
) -> np.ndarray:
    values = factual[step.name].to_numpy(dtype=float)
    source, target = values[ctx.source_mask], values[ctx.target_mask]
    marginal = QuantileMap.fit(source, target)
    moved = marginal(source)
    if step.stratify_by is None:
        return moved

    factual_strata = factual[step.stratify_by].to_numpy()
    counterfactual_strata = counterfactual[step.stratify_by].to_numpy()
    source_strata = factual_strata[ctx.source_mask]
    target_strata = factual_strata[ctx.target_mask]
    wanted = counterfactual_strata[ctx.source_mask]
    for level in sorted(set(source_strata)):
        for goal in sorted(set(wanted[source_strata == level])):
            rows = (source_strata == level) & (wanted == goal)
            if not np.any(target_strata == goal):
                logger.warning(
                    "No target rows with %s=%r; %r falls back to the marginal map",
                    step.stratify_by,
                    goal,
                    step.name,
                )
                continue
            stratum = QuantileMap.fit(
                source[source_strata == level], target[target_strata == goal]
            )
            moved[rows] = stratum(source[rows])
    return moved


def _transport_categorical(
    step: VariableStep,
    factual: pd.DataFrame,
    counterfactual: pd.DataFrame,
    ctx: _Context,
    result: PipelineResult,
) -> np.ndarray:
    categories = ctx.schema.categories(step.name)
    if step.encoder is Provenance.EXTERNAL_FILE:
        encoded = load_external_scores(
            step.scores_file, step.name, categories, ctx.epsilon
        )
        if len(encoded) != len(factual):
            raise SchemaError(
                f"{step.scores_file} has {len(encoded)} rows, "
                f"the dataset {len(factual)}"
            )
        scores = encoded.scores
    else:
        predictors = [ctx.spec.sensitive] + [
            p for p in step.parents if p != ctx.spec.sensitive
        ]
        design = DesignMatrix.fit(factual, predictors, ctx.schema)
        model = fit_mlr(
            design.transform(factual),
            label_indices(factual, step.name, categories),
            categories,
            ctx.l2,
            ctx.max_iter,
            ctx.tol,
            column=step.name,
        )
        result.models[step.name] = model
        source_rows = counterfactual[ctx.source_mask]
        if step.transport is TransportMethod.PREDICT:
            return predict_proba(model, design.transform(source_rows), ctx.epsilon)
        # Source rows keep their factual group; the transport moves them across.
        source_rows = source_rows.assign(
            **{ctx.spec.sensitive: factual[ctx.spec.sensitive][ctx.source_mask]}
        )
        scores = predict_proba(model, design.transform(factual), ctx.epsilon)
        scores[ctx.source_mask] = predict_proba(
            model, design.transform(source_rows), ctx.epsilon
        )

    source = CompositionSample(0, scores[ctx.source_mask])
    target = CompositionSample(1, scores[ctx.target_mask])
    if step.transport is TransportMethod.MATCHING:
        plan = matching.match(source, target)
        result.plans[step.name] = plan
        return matching.counterfactuals(plan, target, ctx.mode, ctx.epsilon)
    fitted = gaussian.fit(source, target, ctx.transform, ctx.epsilon)
    return gaussian.apply(fitted, source.points)


def run_pipeline(
    frame: pd.DataFrame,
    schema: DatasetSchema,
    spec: ScmSpec,
    direction: Union[Direction, str] = Direction.ZERO_TO_ONE,
    seed: int = 0,
    transform: Union[TransformKind, str] = TransformKind.ILR,
    mode: Union[CounterfactualMode, str] = CounterfactualMode.EUCLIDEAN_MEAN,
    epsilon: float = DEFAULT_EPSILON,
    l2: float = DEFAULT_L2,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> PipelineResult:
    """Generate the counterfactual of every row of the source group.

    Classifiers are fitted on the factual data and evaluated at the
    counterfactual parents; label draws use one generator seeded with
    ``seed`` and consumed in step order.

    Args:
        frame: The dataset.
        schema: Its schema.
        spec: The causal ordering.
        direction: Which group is the source.
        seed: The root seed of label sampling.
        transform: The coordinates of Gaussian transport.
        mode: How matching rows become compositions.
        epsilon: The zero floor.
        l2: The classifier ridge penalty.
        max_iter: The classifier iteration limit.
        tol: The classifier gradient tolerance.

    Returns:
        The counterfactual rows, in their original order, and the fitted
        artifacts.

    Raises:
        SchemaError: The steps do not fit the dataset schema.
        DegenerateInput: A sensitive group is empty.
    """
    violations = validate_spec(spec, schema)
    if violations:
        raise SchemaError("; ".join(violations))
    direction = Direction(direction)
    categories = schema.categories(spec.sensitive)
    group0, group1 = split_by_sensitive(frame, schema, spec.sensitive)
    for label, group in enumerate((group0, group1)):
        if group.empty:
            raise DegenerateInput(
                f"Sensitive group {label} ({categories[label]}) is empty."
            )

    values = frame[spec.sensitive].to_numpy()
    ctx = _Context(
        spec,
        schema,
        source_mask=values == categories[direction.source],
        target_mask=values == categories[direction.target],
        transform=TransformKind(transform),
        mode=CounterfactualMode(mode),
        epsilon=epsilon,
        l2=l2,
        max_iter=max_iter,
        tol=tol,
    )
    rng = np.random.default_rng(seed)
    counterfactual = frame.copy()
    counterfactual.loc[ctx.source_mask, spec.sensitive] = categories[direction.target]
    result = PipelineResult(frame=counterfactual)

    for step in spec.steps:
        if step.kind is VariableKind.NUMERIC:
            moved = _transport_numeric(step, frame, counterfactual, ctx)
            counterfactual.loc[ctx.source_mask, step.name] = moved
        else:
            scores = _transport_categorical(step, frame, counterfactual, ctx, result)
            step_categories = schema.categories(step.name)
            result.scores[step.name] = (step_categories, scores)
            labels = to_labels(scores, step_categories, step.label_mode, rng)
            counterfactual.loc[ctx.source_mask, step.name] = labels
        logger.info("Transported step %r (%s)", step.name, step.kind.value)

    result.frame = counterfactual[ctx.source_mask].reset_index(drop=True)
    logger.info(
        "Built %d counterfactual rows in direction %s",
        len(result.frame),
        direction.value,
    )
    return result
