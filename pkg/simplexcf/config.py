"""Run configuration.

A run is configured by one JSON document. Values resolve as built-in defaults,
then the file, then command-line flags. Unknown keys are rejected, and every
problem found is reported at once before any computation starts.
"""
import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from .exceptions import ConfigError
from .models import (
    CounterfactualMode,
    Direction,
    LabelMode,
    PlotKind,
    TransformKind,
    TransportMethod,
)
from .pipeline import ScmSpec, VariableStep

_STEP_KEYS = {f.name for f in fields(VariableStep)}


@dataclass
class EncoderConfig:
    """Settings of the multinomial encoder.

    Args:
        l2: The ridge penalty.
        max_iter: The optimizer iteration limit.
        tol: The optimizer gradient tolerance.
        predictors: Per column, the predictor columns; all other columns when
            a column is not listed.
        external: Per column, a CSV of externally computed scores.
    """

    l2: float = 1e-4
    max_iter: int = 500
    tol: float = 1e-8
    predictors: Dict[str, List[str]] = field(default_factory=dict)
    external: Dict[str, str] = field(default_factory=dict)


@dataclass
class TransportConfig:
    method: str = TransportMethod.GAUSSIAN.value
    transform: str = TransformKind.ILR.value
    mode: str = CounterfactualMode.EUCLIDEAN_MEAN.value
    epsilon: float = 1e-9
    direction: str = Direction.ZERO_TO_ONE.value
    columns: Optional[List[str]] = None


@dataclass
class PipelineConfig:
    steps: List[Dict[str, Any]] = field(default_factory=list)


@dataclass
class PlotConfig:
    what: str = PlotKind.POINTS.value
    column: Optional[str] = None
    resolution: int = 200
    width: int = 600
    height: int = 560
    levels: Optional[List[float]] = None
    steps: int = 21


_SECTIONS = {
    "encoder": EncoderConfig,
    "transport": TransportConfig,
    "pipeline": PipelineConfig,
    "plot": PlotConfig,
}


@dataclass
class RunConfig:
    """Everything a command needs.

    Args:
        dataset: The input CSV.
        schema: Column declarations passed to :func:`~.read_csv`.
        sensitive: The binary sensitive column.
        outcome: The outcome column, never transported.
        encoder: Encoder settings.
        transport: Transport settings.
        pipeline: The causal ordering of the ``pipeline`` command.
        plot: Plot settings.
        seed: The root seed of all randomness.
        workers: The number of worker threads.
        output: The output directory.
    """

    dataset: Optional[str] = None
    schema: Dict[str, Any] = field(default_factory=dict)
    sensitive: Optional[str] = None
    outcome: Optional[str] = None
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    transport: TransportConfig = field(default_factory=TransportConfig)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    plot: PlotConfig = field(default_factory=PlotConfig)
    seed: int = 0
    workers: int = 4
    output: str = "out"
    seed_given: bool = field(default=False, compare=False, repr=False)

    ###################################################################################
    #                                    LOADING                                      #
    ###################################################################################

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        """Build a config from a parsed document.

        Raises:
            ConfigError: Unknown keys, or sections that are not objects.
        """
        problems: List[str] = []
        top = {f.name for f in fields(cls)} - {"seed_given"}
        _reject_unknown(data, top, "", problems)
        kwargs: Dict[str, Any] = {}
        for key, value in data.items():
            if key not in top:
                continue
            section = _SECTIONS.get(key)
            if section is None:
                kwargs[key] = value
            elif not isinstance(value, Mapping):
                problems.append(f"{key}: expected an object")
            else:
                allowed = {f.name for f in fields(section)}
                _reject_unknown(value, allowed, f"{key}.", problems)
                chosen = {k: v for k, v in value.items() if k in allowed}
                kwargs[key] = section(**chosen)
        pipeline = data.get("pipeline")
        steps = pipeline.get("steps") if isinstance(pipeline, Mapping) else None
        for index, step in enumerate(steps or []):
            if not isinstance(step, Mapping):
                problems.append(f"pipeline.steps[{index}]: expected an object")
                continue
            _reject_unknown(step, _STEP_KEYS, f"pipeline.steps[{index}].", problems)
        if problems:
            raise ConfigError(problems)
        return cls(seed_given="seed" in data, **kwargs)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "RunConfig":
        """Raises :class:`~.ConfigError` when the file is unreadable or not JSON."""
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError([f"cannot read {path}: {e.strerror}"]) from e
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError([f"{path}: invalid JSON at line {e.lineno}"]) from e
        if not isinstance(data, Mapping):
            raise ConfigError([f"{path}: the document must be an object"])
        return cls.from_dict(data)

    def override(self, **flags: Any) -> "RunConfig":
        """Apply command-line flags; ``None`` leaves a value as it is."""
        targets = {
            "dataset": (self, "dataset"),
            "output": (self, "output"),
            "seed": (self, "seed"),
            "workers": (self, "workers"),
            "method": (self.transport, "method"),
            "transform": (self.transport, "transform"),
            "mode": (self.transport, "mode"),
            "epsilon": (self.transport, "epsilon"),
            "direction": (self.transport, "direction"),
            "what": (self.plot, "what"),
            "column": (self.plot, "column"),
        }
        for name, value in flags.items():
            if value is None:
                continue
            owner, attribute = targets[name]
            setattr(owner, attribute, value)
            if name == "seed":
                self.seed_given = True
        return self

    ###################################################################################
    #                                   VALIDATION                                    #
    ###################################################################################

    def validate(self, command: Optional[str] = None) -> None:
        """Check every value, collecting all problems.

        Raises:
            ConfigError: At least one problem was found.
        """
        problems: List[str] = []
        if command != "verify" and not self.dataset:
            problems.append("dataset: a CSV path is required")
        if command in ("transport", "pipeline", "plot", "fit-dirichlet") and not (
            self.sensitive
        ):
            problems.append("sensitive: a sensitive column is required")

        transport = self.transport
        _check_enum(TransportMethod, transport.method, "transport.method", problems)
        _check_enum(TransformKind, transport.transform, "transport.transform", problems)
        _check_enum(CounterfactualMode, transport.mode, "transport.mode", problems)
        _check_enum(Direction, transport.direction, "transport.direction", problems)
        _check_enum(PlotKind, self.plot.what, "plot.what", problems)
        if command == "transport" and transport.method == TransportMethod.PREDICT.value:
            problems.append(
                "transport.method: 'predict' is only valid for pipeline steps"
            )

        self._check_numbers(problems)
        self._check_steps(problems)
        if problems:
            raise ConfigError(problems)

    def _check_numbers(self, problems: List[str]) -> None:
        _check_range(self.transport.epsilon, 0.0, 0.5, "transport.epsilon", problems)
        _check_range(self.encoder.l2, 0.0, None, "encoder.l2", problems, closed=True)
        _check_range(self.encoder.tol, 0.0, None, "encoder.tol", problems)
        _check_positive_int(self.encoder.max_iter, "encoder.max_iter", problems)
        _check_positive_int(self.workers, "workers", problems)
        _check_positive_int(self.plot.resolution, "plot.resolution", problems)
        _check_positive_int(self.plot.width, "plot.width", problems)
        _check_positive_int(self.plot.height, "plot.height", problems)
        _check_positive_int(self.plot.steps, "plot.steps", problems)
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not (
            0 <= self.seed < 2 ** 64
        ):
            problems.append(f"seed: {self.seed!r} is not an unsigned 64-bit integer")
        for level in self.plot.levels or []:
            if not isinstance(level, (int, float)) or level <= 0:
                problems.append(f"plot.levels: {level!r} is not a positive density")

    def _check_steps(self, problems: List[str]) -> None:
        for index, step in enumerate(self.pipeline.steps):
            where = f"pipeline.steps[{index}]"
            if "name" not in step:
                problems.append(f"{where}: a name is required")
            try:
                parsed = VariableStep.from_dict({"name": "", **step})
            except (KeyError, TypeError, ValueError) as e:
                problems.append(f"{where}: {e}")
                continue
            if parsed.label_mode is LabelMode.SAMPLE and not self.seed_given:
                problems.append(f"{where}: label_mode 'sample' needs an explicit seed")

    def scm_spec(self) -> ScmSpec:
        assert self.sensitive is not None
        return ScmSpec.from_dict(
            {
                "sensitive": self.sensitive,
                "steps": self.pipeline.steps,
                "outcome": self.outcome,
            }
        )

    def as_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop("seed_given")
        return data

    def digest(self) -> str:
        """The SHA-256 of the canonical JSON form of the resolved config."""
        canonical = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _reject_unknown(
    data: Mapping[str, Any], allowed, prefix: str, problems: List[str]
) -> None:
    for key in sorted(set(data) - set(allowed)):
        problems.append(f"{prefix}{key}: unknown key")


def _check_enum(enum, value: Any, where: str, problems: List[str]) -> None:
    try:
        enum(value)
    except ValueError:
        choices = ", ".join(member.value for member in enum)
        problems.append(f"{where}: {value!r} is not one of {choices}")


def _check_range(
    value: Any,
    low: float,
    high: Optional[float],
    where: str,
    problems: List[str],
    closed: bool = False,
) -> None:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        problems.append(f"{where}: {value!r} is not a number")
        return
    above = value >= low if closed else value > low
    if not above or (high is not None and value >= high):
        bound = f"[{low}" if closed else f"({low}"
        problems.append(f"{where}: {value!r} is outside {bound}, {high or 'inf'})")


def _check_positive_int(value: Any, where: str, problems: List[str]) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        problems.append(f"{where}: {value!r} is not a positive integer")
