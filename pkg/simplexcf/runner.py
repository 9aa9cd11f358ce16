import asyncio
import logging
import platform
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from pathlib import Path
from types import TracebackType
from typing import Any, Callable, Dict, List, Optional, Tuple, Type

import contourpy
import numpy as np
import pandas as pd
import scipy

from . import __version__, gaussian, matching, plot
from .config import RunConfig
from .decorators import check_executor
from .dirichlet import DirichletParams, fit_mle
from .encoder import EncodedColumn, encode_column, load_external_scores
from .exceptions import SchemaError, SpecViolationError
from .io import (
    DatasetSchema,
    read_csv,
    read_plan,
    sha256_file,
    split_by_sensitive,
    with_scores,
    write_csv,
    write_json,
    write_manifest,
    write_outputs,
    write_plan,
    write_svg,
)
from .models import (
    CounterfactualMode,
    Direction,
    PlotKind,
    Provenance,
    TransformKind,
    TransportMethod,
)
from .pipeline import run_pipeline, validate_spec
from .simplex import CompositionSample

logger = logging.getLogger(__name__)

PLAN_TOLERANCE = 1e-8


class Runner:
    """A batch runner for the command-line interface.

    Per-column work is dispatched to a thread pool and awaited together;
    artifacts are written one at a time and every command finishes by writing
    ``manifest.json`` into the output directory.

    Args:
        config: The resolved run configuration.
    """

    def __init__(self, config: RunConfig) -> None:
        self._config = config
        self._executor: Optional[ThreadPoolExecutor] = None
        self._lock = asyncio.Lock()
        self._artifacts: List[Path] = []
        self._data: Optional[Tuple[DatasetSchema, pd.DataFrame]] = None

    async def __aenter__(self) -> "Runner":
        if self._executor is None:
            self._executor = ThreadPoolExecutor(
                max_workers=self._config.workers, thread_name_prefix="simplexcf"
            )
        return self

    @check_executor
    async def __aexit__(
        self,
        exc_type: Optional[Type[BaseException]],
        exc_val: Optional[BaseException],
        exc_tb: Optional[TracebackType],
    ) -> None:
        assert self._executor is not None

        self._executor.shutdown(wait=True)
        self._executor = None

    @property
    def output(self) -> Path:
        return Path(self._config.output)

    async def _run(self, func: Callable, *args, **kwargs) -> Any:
        loop = asyncio.get_running_loop()
        call = partial(func, *args, **kwargs)
        return await loop.run_in_executor(self._executor, call)

    async def _write(self, func: Callable, *args) -> Path:
        async with self._lock:
            path = await self._run(func, *args)
        self._artifacts.append(path)
        return path

    async def _dataset(self) -> Tuple[DatasetSchema, pd.DataFrame]:
        if self._data is None:
            self._data = await self._run(
                read_csv, self._config.dataset, self._config.schema
            )
        return self._data

    async def _manifest(self, command: str) -> Path:
        config = self._config
        artifacts = {
            path.name: sha256_file(path) for path in sorted(set(self._artifacts))
        }
        manifest = {
            "command": command,
            "config_hash": config.digest(),
            "seed": config.seed,
            "settings": config.as_dict(),
            "versions": {
                "simplexcf": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "pandas": pd.__version__,
                "contourpy": contourpy.__version__,
                "python": platform.python_version(),
            },
            "artifacts": artifacts,
        }
        path = self.output / "manifest.json"
        return await self._write(write_manifest, manifest, path)

    ###################################################################################
    #                                    ENCODING                                     #
    ###################################################################################

    def _encode_one(
        self, frame: pd.DataFrame, schema: DatasetSchema, column: str
    ) -> EncodedColumn:
        settings = self._config.encoder
        epsilon = self._config.transport.epsilon
        if column in settings.external:
            encoded = load_external_scores(
                settings.external[column], column, schema.categories(column), epsilon
            )
            if len(encoded) != len(frame):
                raise SchemaError(
                    f"External scores of {column!r} have {len(encoded)} rows, "
                    f"the dataset {len(frame)}"
                )
            return encoded
        _, encoded = encode_column(
            frame,
            column,
            schema,
            predictors=settings.predictors.get(column),
            l2=settings.l2,
            max_iter=settings.max_iter,
            tol=settings.tol,
            epsilon=epsilon,
        )
        return encoded

    async def _encoded(
        self, columns: Optional[List[str]] = None
    ) -> Dict[str, EncodedColumn]:
        schema, frame = await self._dataset()
        if columns is None:
            columns = [c for c in schema.categorical if c != self._config.sensitive]
        results = await asyncio.gather(
            *(self._run(self._encode_one, frame, schema, column) for column in columns)
        )
        return dict(zip(columns, results))

    @check_executor
    async def encode(self) -> Dict[str, EncodedColumn]:
        """Encode every categorical column other than the sensitive one.

        Writes ``encoded.csv`` (the dataset plus ``<column>__<category>`` score
        columns), ``scores_<column>.csv`` per column and ``model_<column>.json``
        for each fitted classifier.

        Raises:
            RunnerUninitializedError: The :class:`~.Runner` is not initialized.
        """
        schema, frame = await self._dataset()
        encoded = await self._encoded()
        if not encoded:
            logger.warning("The dataset has no categorical column to encode")

        output = frame
        for name, column in encoded.items():
            output = with_scores(output, name, column.categories, column.scores)
            scores = pd.DataFrame(column.scores, columns=column.score_columns())
            await self._write(write_csv, scores, self.output / f"scores_{name}.csv")
            if column.provenance is Provenance.FITTED_MLR and column.model is not None:
                model = column.model
                document = {
                    "column": name,
                    "categories": list(model.categories),
                    "reference": model.reference_category,
                    "features": ["intercept"] + (
                        model.design.feature_names if model.design else []
                    ),
                    "coefficients": model.coefficients.tolist(),
                    "converged": model.converged,
                    "iterations": model.iterations,
                }
                path = self.output / f"model_{name}.json"
                await self._write(write_json, document, path)
        await self._write(write_csv, output, self.output / "encoded.csv")
        await self._manifest("encode")
        return encoded

    ###################################################################################
    #                                    TRANSPORT                                    #
    ###################################################################################

    async def _samples(
        self, encoded: EncodedColumn
    ) -> Tuple[CompositionSample, CompositionSample]:
        schema, frame = await self._dataset()
        direction = Direction(self._config.transport.direction)
        groups = split_by_sensitive(frame, schema, self._config.sensitive)
        positions = [frame.index.get_indexer(group.index) for group in groups]
        return (
            CompositionSample(
                direction.source, encoded.scores[positions[direction.source]]
            ),
            CompositionSample(
                direction.target, encoded.scores[positions[direction.target]]
            ),
        )

    def _transport_one(
        self, source: CompositionSample, target: CompositionSample
    ) -> Tuple[np.ndarray, Optional[matching.CouplingPlan]]:
        settings = self._config.transport
        if TransportMethod(settings.method) is TransportMethod.MATCHING:
            plan = matching.match(source, target)
            moved = matching.counterfactuals(
                plan, target, CounterfactualMode(settings.mode), settings.epsilon
            )
            return moved, plan
        fitted = gaussian.fit(
            source, target, TransformKind(settings.transform), settings.epsilon
        )
        return gaussian.apply(fitted, source.points), None

    @check_executor
    async def transport(self) -> Dict[str, Dict[str, Any]]:
        """Move the encoded compositions of the source group to the target group.

        Writes ``transport_<column>.csv`` with the transported compositions of
        the source rows, ``plan_<column>.csv`` for matching, and a
        ``summary.json`` table of group and transported mean compositions.

        Returns:
            The summary table.

        Raises:
            DegenerateInput: A sensitive group is empty.
            RunnerUninitializedError: The :class:`~.Runner` is not initialized.
        """
        encoded = await self._encoded(self._config.transport.columns)
        names = list(encoded)
        samples = [await self._samples(encoded[name]) for name in names]
        moved = await asyncio.gather(
            *(
                self._run(self._transport_one, source, target)
                for source, target in samples
            )
        )

        summary = {}
        for name, (source, target), (points, plan) in zip(names, samples, moved):
            column = encoded[name]
            frame = pd.DataFrame(points, columns=column.score_columns())
            await self._write(write_csv, frame, self.output / f"transport_{name}.csv")
            if plan is not None:
                await self._write(write_plan, plan, self.output / f"plan_{name}.csv")
            transported = CompositionSample(target.group_label, points)
            summary[name] = {
                "categories": list(column.categories),
                "method": self._config.transport.method,
                "source_mean": source.mean().parts.tolist(),
                "target_mean": target.mean().parts.tolist(),
                "transported_mean": transported.mean().parts.tolist(),
            }
        await self._write(write_json, summary, self.output / "summary.json")
        await self._manifest("transport")
        return summary

    ###################################################################################
    #                                    PIPELINE                                     #
    ###################################################################################

    @check_executor
    async def pipeline(self) -> pd.DataFrame:
        """Run the sequential counterfactual pipeline.

        Writes ``counterfactual.csv`` with score columns for categorical
        steps and ``plan_<column>.csv`` for matching steps.

        Raises:
            SpecViolationError: The causal ordering does not fit the dataset;
                nothing is written.
            RunnerUninitializedError: The :class:`~.Runner` is not initialized.
        """
        config = self._config
        schema, frame = await self._dataset()
        spec = config.scm_spec()
        violations = validate_spec(spec, schema)
        if violations:
            raise SpecViolationError(violations)
        result = await self._run(
            run_pipeline,
            frame,
            schema,
            spec,
            direction=config.transport.direction,
            seed=config.seed,
            transform=config.transport.transform,
            mode=config.transport.mode,
            epsilon=config.transport.epsilon,
            l2=config.encoder.l2,
            max_iter=config.encoder.max_iter,
            tol=config.encoder.tol,
        )
        async with self._lock:
            paths = await self._run(
                write_outputs,
                self.output,
                result.frame,
                scores=result.scores,
                plans=result.plans,
            )
        self._artifacts.extend(paths)
        await self._manifest("pipeline")
        return result.frame

    ###################################################################################
    #                                 DIRICHLET & PLOTS                               #
    ###################################################################################

    async def _fit_groups(
        self, column: EncodedColumn
    ) -> Dict[int, DirichletParams]:
        samples = await self._samples(column)
        fitted = await asyncio.gather(*(self._run(fit_mle, s) for s in samples))
        return {sample.group_label: params for sample, params in zip(samples, fitted)}

    @check_executor
    async def fit_dirichlet(self) -> Dict[str, Dict[int, DirichletParams]]:
        """Fit a Dirichlet law per group to every encoded column.

        Writes ``dirichlet_<column>.json``.

        Raises:
            RunnerUninitializedError: The :class:`~.Runner` is not initialized.
        """
        encoded = await self._encoded(self._config.transport.columns)
        fits = {}
        for name, column in encoded.items():
            fits[name] = await self._fit_groups(column)
            document = {
                "column": name,
                "categories": list(column.categories),
                "groups": {
                    str(group): {
                        "alpha": params.alpha.tolist(),
                        "converged": params.converged,
                        "iterations": params.iterations,
                    }
                    for group, params in fits[name].items()
                },
            }
            path = self.output / f"dirichlet_{name}.json"
            await self._write(write_json, document, path)
        await self._manifest("fit-dirichlet")
        return fits

    def _plot_column(self, schema: DatasetSchema) -> str:
        column = self._config.plot.column
        if column is None:
            candidates = [
                c
                for c in schema.categorical
                if c != self._config.sensitive and len(schema.categories(c)) == 3
            ]
            if not candidates:
                raise SchemaError(
                    "No categorical column has exactly 3 categories; merge categories "
                    "into 3 classes to draw a ternary plot"
                )
            column = candidates[0]
        d = len(schema.categories(column))
        if d != 3:
            raise SchemaError(
                f"Column {column!r} has {d} categories; a ternary plot needs 3. "
                "Merge categories into 3 classes first"
            )
        return column

    @check_executor
    async def plot(self) -> Path:
        """Draw a ternary diagram of one three-category column.

        Writes ``plot_<what>_<column>.svg``.

        Raises:
            SchemaError: The column does not have 3 categories.
            RunnerUninitializedError: The :class:`~.Runner` is not initialized.
        """
        config = self._config
        schema, _ = await self._dataset()
        name = self._plot_column(schema)
        column = (await self._encoded([name]))[name]
        source, target = await self._samples(column)
        labels = tuple(column.categories)
        canvas = plot.Canvas(config.plot.width, config.plot.height)
        what = PlotKind(config.plot.what)

        if what is PlotKind.POINTS:
            scene = plot.points_scene([source, target], labels, canvas)
        elif what is PlotKind.TRANSPORT:
            paths = await self._run(self._trajectories, source, target)
            scene = plot.transport_scene(source, paths, labels, canvas, target=target)
        else:
            fits = await self._fit_groups(column)
            levels = (
                {group: config.plot.levels for group in fits}
                if config.plot.levels
                else None
            )
            scene = await self._run(
                plot.contour_scene, fits, levels, labels, canvas, config.plot.resolution
            )

        svg = await self._run(plot.render, scene)
        path = self.output / f"plot_{what.value}_{name}.svg"
        await self._write(write_svg, svg, path)
        await self._manifest("plot")
        return path

    def _trajectories(self, source: CompositionSample, target: CompositionSample):
        settings = self._config.transport
        steps = self._config.plot.steps
        if TransportMethod(settings.method) is TransportMethod.MATCHING:
            plan = matching.match(source, target)
            ends = matching.counterfactuals(
                plan, target, settings.mode, settings.epsilon
            )
            times = np.linspace(0.0, 1.0, steps)
            return [
                [matching.diamond_interpolate(x, y, float(t)) for t in times]
                for x, y in zip(source.points, ends)
            ]
        fitted = gaussian.fit(source, target, settings.transform, settings.epsilon)
        return [gaussian.trajectory(fitted, x, steps) for x in source.points]

    ###################################################################################
    #                                     VERIFY                                      #
    ###################################################################################

    @check_executor
    async def verify(self) -> Dict[str, bool]:
        """Check every ``plan_<column>.csv`` of the output directory against the
        transportation polytope: rows sum to 1 and columns to ``n0 / n1``.

        Raises:
            RunnerUninitializedError: The :class:`~.Runner` is not initialized.
        """
        results = {}
        for path in sorted(self.output.glob("plan_*.csv")):
            plan = await self._run(read_plan, path)
            n0, n1 = plan.shape
            rows_ok = np.allclose(plan.sum(axis=1), 1.0, rtol=0.0, atol=PLAN_TOLERANCE)
            cols_ok = np.allclose(
                plan.sum(axis=0), n0 / n1, rtol=0.0, atol=PLAN_TOLERANCE
            )
            passed = bool(rows_ok and cols_ok and np.all(plan >= 0))
            results[path.stem[len("plan_"):]] = passed
            log = logger.info if passed else logger.error
            log("Plan %s: %s", path.name, "ok" if passed else "violates the marginals")
        if not results:
            logger.warning("No plan files found in %s", self.output)
        return results
