"""CSV ingestion and emission, schema inference and group splitting.

Files are comma separated, RFC 4180 quoted, UTF-8, with a header row. Numeric
columns are written with the shortest decimal that round-trips, so reading back
an emitted file reproduces every value exactly.
"""
import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import (
    TYPE_CHECKING,
    Any,
    Dict,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np
import pandas as pd

from .exceptions import (
    ColumnTypeError,
    IoError,
    NotBinary,
    ParseError,
    SchemaError,
)
from .models import VariableKind

if TYPE_CHECKING:
    from .matching import CouplingPlan

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
SCORE_SEPARATOR = "__"
PLAN_HEADER = ("i", "j", "weight")


@dataclass(frozen=True)
class ColumnSchema:
    """One dataset column.

    Args:
        name: The header name.
        kind: Numeric or categorical.
        categories: The sorted categories of a categorical column.
    """

    name: str
    kind: VariableKind
    categories: Tuple[str, ...] = ()

    @property
    def is_categorical(self) -> bool:
        return self.kind is VariableKind.CATEGORICAL


@dataclass(frozen=True)
class DatasetSchema:
    """The ordered columns of a dataset and its row count."""

    columns: Tuple[ColumnSchema, ...]
    row_count: int = 0
    _index: Dict[str, ColumnSchema] = field(
        init=False, repr=False, compare=False, default_factory=dict
    )

    def __post_init__(self) -> None:
        names = [c.name for c in self.columns]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise SchemaError(f"Duplicate column names: {duplicates}")
        for column in self.columns:
            if column.is_categorical and len(column.categories) < 2:
                raise SchemaError(
                    f"Categorical column {column.name!r} needs at least 2 "
                    f"categories, found {list(column.categories)}; declare them"
                )
        self._index.update((c.name, c) for c in self.columns)

    @property
    def names(self) -> List[str]:
        return [c.name for c in self.columns]

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def column(self, name: str) -> ColumnSchema:
        try:
            return self._index[name]
        except KeyError:
            raise SchemaError(f"Unknown column {name!r}") from None

    def categories(self, name: str) -> Tuple[str, ...]:
        column = self.column(name)
        if not column.is_categorical:
            raise SchemaError(f"Column {name!r} is not categorical")
        return column.categories

    @property
    def categorical(self) -> List[str]:
        return [c.name for c in self.columns if c.is_categorical]

    @property
    def numeric(self) -> List[str]:
        return [c.name for c in self.columns if not c.is_categorical]


Declaration = Union[str, VariableKind, Mapping[str, Any]]


def _parse_declaration(name: str, declaration: Declaration):
    if isinstance(declaration, Mapping):
        kind = VariableKind(declaration.get("kind", VariableKind.CATEGORICAL.value))
        categories = declaration.get("categories")
        return kind, (tuple(sorted(categories)) if categories is not None else None)
    return VariableKind(declaration), None


def _raw_frame(path: PathLike) -> pd.DataFrame:
    try:
        frame = pd.read_csv(
            path,
            sep=",",
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            encoding="utf-8",
        )
    except FileNotFoundError as e:
        raise IoError(path) from e
    except pd.errors.EmptyDataError as e:
        raise ParseError(1, "The file has no header row.") from e
    except pd.errors.ParserError as e:
        found = re.search(r"line (\d+)", str(e))
        line = int(found.group(1)) if found else None
        raise ParseError(line, "Ragged row: wrong number of fields.") from e
    except UnicodeDecodeError as e:
        raise ParseError(None, "The file is not valid UTF-8.") from e
    except OSError as e:
        raise IoError(path) from e

    missing = frame.isna() | (frame == "")
    if missing.to_numpy().any():
        row, col = np.argwhere(missing.to_numpy())[0]
        # Header is line 1; data rows start at line 2.
        raise ParseError(
            int(row) + 2, f"Missing value in column {frame.columns[col]!r}."
        )
    return frame


def read_csv(
    path: PathLike,
    declared: Optional[Mapping[str, Declaration]] = None,
) -> Tuple[DatasetSchema, pd.DataFrame]:
    """Read a dataset and its schema.

    Columns whose values all parse as numbers are numeric unless declared
    otherwise; every other column is categorical with its categories sorted by
    code point.

    Args:
        path: The CSV file.
        declared: Per-column declarations, either a kind (``"numeric"`` or
            ``"categorical"``) or a mapping with ``kind`` and ``categories``.

    Returns:
        The schema and a frame holding floats for numeric columns and strings
        for categorical ones.

    Raises:
        IoError: The file cannot be opened.
        ParseError: A ragged row, a missing value or an undecodable file.
        ColumnTypeError: A declared numeric column holds a non-numeric token.
        SchemaError: A declared column is absent, or a value falls outside
            the declared categories.
    """
    declared = dict(declared or {})
    frame = _raw_frame(path)
    unknown = sorted(set(declared) - set(frame.columns))
    if unknown:
        raise SchemaError(f"Declared columns absent from {path}: {unknown}")

    columns = []
    for name in frame.columns:
        raw = frame[name]
        kind, categories = _parse_declaration(name, declared.get(name, "numeric"))
        parsed = pd.to_numeric(raw, errors="coerce")
        if name in declared and kind is VariableKind.NUMERIC and parsed.isna().any():
            row = int(np.flatnonzero(parsed.isna().to_numpy())[0])
            raise ColumnTypeError(name, row + 2, raw.iloc[row])
        if name not in declared:
            kind = (
                VariableKind.NUMERIC
                if not parsed.isna().any()
                else VariableKind.CATEGORICAL
            )

        if kind is VariableKind.NUMERIC:
            frame[name] = parsed.astype(float)
            columns.append(ColumnSchema(name, kind))
            continue

        seen = tuple(sorted(raw.unique()))
        if categories is None:
            categories = seen
        else:
            stray = sorted(set(seen) - set(categories))
            if stray:
                raise SchemaError(
                    f"Column {name!r} holds undeclared categories {stray}"
                )
        columns.append(ColumnSchema(name, kind, categories))

    schema = DatasetSchema(tuple(columns), row_count=len(frame))
    logger.info(
        "Read %d rows and %d columns from %s", schema.row_count, len(columns), path
    )
    return schema, frame


def split_by_sensitive(
    frame: pd.DataFrame, schema: DatasetSchema, column: str
) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Partition rows on a binary categorical column.

    Group 0 holds the first category in sorted order, group 1 the second;
    either group may be empty.

    Raises:
        NotBinary: The column has more than two categories.
        SchemaError: The column is unknown or numeric.
    """
    categories = schema.categories(column)
    if len(categories) > 2:
        raise NotBinary(column, categories)
    values = frame[column]
    group0 = frame[values == categories[0]]
    group1 = frame[values == categories[1]] if len(categories) > 1 else frame.iloc[:0]
    return group0, group1


def score_columns(column: str, categories: Sequence[str]) -> List[str]:
    return [f"{column}{SCORE_SEPARATOR}{category}" for category in categories]


def with_scores(
    frame: pd.DataFrame,
    column: str,
    categories: Sequence[str],
    scores: np.ndarray,
) -> pd.DataFrame:
    """A copy of ``frame`` with one ``<column>__<category>`` column per category."""
    if scores.shape != (len(frame), len(categories)):
        raise SchemaError(
            f"Scores for {column!r} have shape {scores.shape}, expected "
            f"{(len(frame), len(categories))}"
        )
    extra = pd.DataFrame(
        scores, columns=score_columns(column, categories), index=frame.index
    )
    return pd.concat([frame, extra], axis=1)


def read_scores(
    path: PathLike, column: str, categories: Sequence[str]
) -> np.ndarray:
    """Read the ``<column>__<category>`` columns of a CSV as an ``n × d`` array.

    Raises:
        SchemaError: A score column is missing.
        ColumnTypeError: A score is not a number.
    """
    frame = _raw_frame(path)
    names = score_columns(column, categories)
    missing = [name for name in names if name not in frame.columns]
    if missing:
        raise SchemaError(f"{path} lacks score columns {missing}")
    values = frame[names].apply(pd.to_numeric, errors="coerce")
    if values.isna().to_numpy().any():
        row, col = np.argwhere(values.isna().to_numpy())[0]
        raise ColumnTypeError(names[col], int(row) + 2, frame[names[col]].iloc[row])
    return values.to_numpy(dtype=float)


def _write_text(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise IoError(path) from e
    logger.info("Wrote %s", path)
    return path


def write_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    """Write ``frame`` without its index; floats use shortest round-trip decimals.

    Raises:
        IoError: The path is not writable.
    """
    return _write_text(Path(path), frame.to_csv(index=False, lineterminator="\n"))


def write_plan(plan: "CouplingPlan", path: PathLike) -> Path:
    """Write the nonzero entries of a coupling as ``i,j,weight`` rows."""
    triplets = pd.DataFrame(plan.triplets(), columns=list(PLAN_HEADER))
    return write_csv(triplets, path)


def read_plan(path: PathLike, n0: Optional[int] = None, n1: Optional[int] = None):
    """Read a triplet file back into a dense matrix.

    The shape defaults to the largest indices found.

    Raises:
        SchemaError: The header is not ``i,j,weight``.
    """
    frame = _raw_frame(path)
    if tuple(frame.columns) != PLAN_HEADER:
        raise SchemaError(f"{path} is not a plan file: header {list(frame.columns)}")
    rows = frame["i"].astype(int).to_numpy()
    cols = frame["j"].astype(int).to_numpy()
    weights = frame["weight"].astype(float).to_numpy()
    shape = (
        n0 if n0 is not None else int(rows.max()) + 1,
        n1 if n1 is not None else int(cols.max()) + 1,
    )
    dense = np.zeros(shape)
    dense[rows, cols] = weights
    return dense


def write_json(document: Mapping[str, Any], path: PathLike) -> Path:
    """Write a JSON document with sorted keys, so equal runs give equal bytes."""
    text = json.dumps(document, sort_keys=True, indent=2, default=str) + "\n"
    return _write_text(Path(path), text)


def write_manifest(manifest: Mapping[str, Any], path: PathLike) -> Path:
    """Write a run manifest; see :func:`write_json`."""
    return write_json(manifest, path)


def sha256_file(path: PathLike) -> str:
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError as e:
        raise IoError(path) from e


def write_outputs(
    directory: PathLike,
    frame: pd.DataFrame,
    name: str = "counterfactual.csv",
    scores: Optional[Mapping[str, Tuple[Sequence[str], np.ndarray]]] = None,
    plans: Optional[Mapping[str, "CouplingPlan"]] = None,
) -> List[Path]:
    """Write a dataset, its optional score columns and coupling plans.

    Args:
        directory: The output directory, created if needed.
        frame: The dataset to write.
        name: The dataset file name.
        scores: Per column, its categories and an ``n × d`` score array to
            append as ``<column>__<category>`` columns.
        plans: Per column, a coupling written to ``plan_<column>.csv``.

    Returns:
        The written paths, dataset first.

    Raises:
        IoError: A path is not writable.
    """
    directory = Path(directory)
    for column, (categories, values) in sorted((scores or {}).items()):
        frame = with_scores(frame, column, categories, values)
    written = [write_csv(frame, directory / name)]
    for column, plan in sorted((plans or {}).items()):
        written.append(write_plan(plan, directory / f"plan_{column}.csv"))
    return written


def frame_schema(
    frame: pd.DataFrame, declared: Optional[Mapping[str, Declaration]] = None
) -> DatasetSchema:
    """The schema of an in-memory frame: numeric dtypes are numeric columns,
    everything else is categorical with its sorted distinct values."""
    declared = dict(declared or {})
    columns = []
    for name in frame.columns:
        default = (
            VariableKind.NUMERIC
            if pd.api.types.is_numeric_dtype(frame[name])
            else VariableKind.CATEGORICAL
        )
        kind, categories = _parse_declaration(name, declared.get(name, default))
        if kind is VariableKind.NUMERIC:
            columns.append(ColumnSchema(name, kind))
        else:
            seen = tuple(sorted(str(v) for v in frame[name].unique()))
            columns.append(ColumnSchema(name, kind, categories or seen))
    return DatasetSchema(tuple(columns), row_count=len(frame))


def write_svg(svg: str, path: PathLike) -> Path:
    return _write_text(Path(path), svg)
