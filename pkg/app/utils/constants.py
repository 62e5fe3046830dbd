from enum import Enum


class LossType(str, Enum):
    """Enum for the triplet-loss variants."""

    # Relative margin between positive and negative squared distances
    TRIPLET1 = "triplet1"
    # TRIPLET1 plus a hinge bounding the positive squared distance
    TRIPLET2 = "triplet2"
    # Absolute bounds on both the negative and the positive squared distance
    TRIPLET3 = "triplet3"


class CalibrationMode(str, Enum):
    """Enum for the ways distances become cut probabilities."""

    REGRESSION = "regression"
    ANALYTIC = "analytic"


class ClusterMethod(str, Enum):
    """Enum for the clustering methods compared by the study."""

    MULTICUT = "multicut"
    KMEANS = "kmeans"


class DatasetKind(str, Enum):
    """Enum for the supported data sources."""

    BLOBS = "blobs"
    CIFAR10 = "cifar10"


class Split(str, Enum):
    """Enum for dataset splits."""

    TRAIN = "train"
    TEST = "test"


class GridPairing(str, Enum):
    """Enum for how positive and negative noise rates are combined."""

    # Every positive rate against every negative rate
    GRID = "grid"
    # Rates paired one-to-one (equal amounts of noise on both sides)
    DIAGONAL = "diagonal"


class CurveAxis(str, Enum):
    """Enum for the axes of the noise-vs-accuracy curves."""

    POSITIVE = "positive"
    NEGATIVE = "negative"
    DIAGONAL = "diagonal"
    RANDOM = "random"


# Token written to the neg_noise column for random-negative cells
RANDOM_NEGATIVE_TOKEN = "random"

# Losses for which the analytic threshold is defined
ANALYTIC_LOSSES = frozenset({LossType.TRIPLET2, LossType.TRIPLET3})

RAW_RESULT_COLUMNS = [
    "pos_noise",
    "neg_noise",
    "loss",
    "method",
    "seed",
    "acc",
    "n_clusters",
    "runtime_s",
    "error",
]

SUMMARY_COLUMNS = [
    "pos_noise",
    "neg_noise",
    "loss",
    "method",
    "acc_mean",
    "acc_std_pop",
    "n_runs",
    "n_failed",
]

CURVE_COLUMNS = ["axis", "noise", "loss", "method", "acc_mean", "acc_std_pop", "n_runs"]

DISTANCE_STATS_COLUMNS = [
    "class",
    "intra_mean",
    "intra_std",
    "inter_mean",
    "inter_std",
    "nearest_class",
]

PROJECTION_COLUMNS = ["loss", "method", "index", "pc1", "pc2", "label", "cluster"]
