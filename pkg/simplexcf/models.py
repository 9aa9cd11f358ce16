import enum


class TransformKind(enum.Enum):
    """An :class:`~.enum.Enum` for the log-ratio isomorphism used as coordinates.

    Attributes:
        ALR: additive log-ratio, last part as reference
        CLR: centered log-ratio
        ILR: isometric log-ratio on the Helmert basis
    """

    ALR = "alr"
    CLR = "clr"
    ILR = "ilr"


class CounterfactualMode(enum.Enum):
    """An :class:`~.enum.Enum` for reading a counterfactual off a coupling row.

    Attributes:
        EUCLIDEAN_MEAN: weighted arithmetic mean of the matched points
        AITCHISON_MEAN: weighted mean in clr coordinates, mapped back
        ARGMAX_ROW: the matched point with the largest weight
    """

    EUCLIDEAN_MEAN = "euclidean_mean"
    AITCHISON_MEAN = "aitchison_mean"
    ARGMAX_ROW = "argmax_row"


class TransportMethod(enum.Enum):
    """An :class:`~.enum.Enum` for the way compositions are moved between groups.

    Attributes:
        GAUSSIAN: Gaussian optimal transport in log-ratio coordinates
        MATCHING: discrete Kantorovich matching under the Dirichlet cost
        PREDICT: re-evaluate the pooled classifier at counterfactual parents
    """

    GAUSSIAN = "gaussian"
    MATCHING = "matching"
    PREDICT = "predict"


class LabelMode(enum.Enum):
    """An :class:`~.enum.Enum` for turning a composition back into a label.

    Attributes:
        ARGMAX: the category with the largest part
        SAMPLE: a draw from the composition, seeded
    """

    ARGMAX = "argmax"
    SAMPLE = "sample"


class VariableKind(enum.Enum):
    """An :class:`~.enum.Enum` for the kind of a dataset column.

    Attributes:
        NUMERIC
        CATEGORICAL
    """

    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


class Provenance(enum.Enum):
    """An :class:`~.enum.Enum` for where the compositions of a column come from.

    Attributes:
        FITTED_MLR: a multinomial logistic regression fitted here
        EXTERNAL_FILE: scores computed elsewhere and ingested from CSV
    """

    FITTED_MLR = "fitted_mlr"
    EXTERNAL_FILE = "external_file"


class Direction(enum.Enum):
    """An :class:`~.enum.Enum` for the direction of the counterfactual flip.

    Attributes:
        ZERO_TO_ONE: rows of group 0 are sent to group 1
        ONE_TO_ZERO: rows of group 1 are sent to group 0
    """

    ZERO_TO_ONE = "0->1"
    ONE_TO_ZERO = "1->0"

    @property
    def source(self) -> int:
        return 0 if self is Direction.ZERO_TO_ONE else 1

    @property
    def target(self) -> int:
        return 1 - self.source


class PlotKind(enum.Enum):
    """An :class:`~.enum.Enum` for the ternary scenes the plotter can draw.

    Attributes:
        POINTS: both groups as dots
        TRANSPORT: source points with their displacement paths
        CONTOURS: fitted Dirichlet density level curves per group
    """

    POINTS = "points"
    TRANSPORT = "transport"
    CONTOURS = "contours"
