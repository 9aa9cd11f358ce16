__version__ = "1.0.0"
__all__ = [
    "Runner",
    "RunConfig",
    # simplex
    "Composition",
    "CompositionSample",
    "aitchison_distance",
    "aitchison_inner",
    "aitchison_norm",
    "closure",
    "inverse",
    "perturb",
    "power",
    "uniform",
    # log-ratio transforms
    "LogRatioTransform",
    "alr",
    "alr_inv",
    "clr",
    "clr_inv",
    "ilr",
    "ilr_basis",
    "ilr_inv",
    # transport
    "CouplingPlan",
    "GaussianTransportMap",
    "dirichlet_cost",
    "match",
    # encoders and models
    "DirichletParams",
    "EncodedColumn",
    "MultinomialModel",
    "fit_mle",
    "fit_mlr",
    "log_density",
    # pipeline
    "QuantileMap",
    "ScmSpec",
    "VariableStep",
    "run_pipeline",
    "validate_spec",
    # io
    "DatasetSchema",
    "read_csv",
    # exceptions
    "CompositionError",
    "ConfigError",
    "DataError",
    "DegenerateInput",
    "DimensionError",
    "EncoderError",
    "InvalidDimension",
    "InvalidParameter",
    "InvalidValue",
    "MalformedScores",
    "MissingCategory",
    "NotBinary",
    "ParseError",
    "RunnerError",
    "RunnerUninitializedError",
    "SchemaError",
    "SimplexCFError",
    "SingularCovariance",
    "SolverFailure",
    "SpecViolationError",
    "TransportError",
    # models
    "CounterfactualMode",
    "Direction",
    "LabelMode",
    "PlotKind",
    "Provenance",
    "TransformKind",
    "TransportMethod",
    "VariableKind",
]

from .config import RunConfig
from .dirichlet import DirichletParams, fit_mle, log_density
from .encoder import EncodedColumn, MultinomialModel, fit_mlr
from .exceptions import (
    CompositionError,
    ConfigError,
    DataError,
    DegenerateInput,
    DimensionError,
    EncoderError,
    InvalidDimension,
    InvalidParameter,
    InvalidValue,
    MalformedScores,
    MissingCategory,
    NotBinary,
    ParseError,
    RunnerError,
    RunnerUninitializedError,
    SchemaError,
    SimplexCFError,
    SingularCovariance,
    SolverFailure,
    SpecViolationError,
    TransportError,
)
from .gaussian import GaussianTransportMap
from .io import DatasetSchema, read_csv
from .logratio import (
    LogRatioTransform,
    alr,
    alr_inv,
    clr,
    clr_inv,
    ilr,
    ilr_basis,
    ilr_inv,
)
from .matching import CouplingPlan, dirichlet_cost, match
from .models import (
    CounterfactualMode,
    Direction,
    LabelMode,
    PlotKind,
    Provenance,
    TransformKind,
    TransportMethod,
    VariableKind,
)
from .pipeline import QuantileMap, ScmSpec, VariableStep, run_pipeline, validate_spec
from .runner import Runner
from .simplex import (
    Composition,
    CompositionSample,
    aitchison_distance,
    aitchison_inner,
    aitchison_norm,
    closure,
    inverse,
    perturb,
    power,
    uniform,
)
