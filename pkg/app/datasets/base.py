"""
Dataset container shared by the synthetic and CIFAR-10 sources.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from app.utils.constants import Split
from app.utils.exceptions import FormatError, InputShapeError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass(frozen=True)
class Dataset:
    """Feature rows with aligned class labels in [0, class_count)."""

    features: np.ndarray
    labels: np.ndarray
    class_count: int
    split: Split = Split.TRAIN

    def __post_init__(self) -> None:
        features = np.array(self.features, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.int64).reshape(-1)
        if features.ndim != 2:
            raise InputShapeError(f"features must be an (n, D) matrix, got shape {features.shape}")
        if features.shape[0] != labels.shape[0]:
            raise InputShapeError(f"{features.shape[0]} feature rows but {labels.shape[0]} labels")
        if labels.size and (labels.min() < 0 or labels.max() >= self.class_count):
            raise InputShapeError(f"labels must lie in [0, {self.class_count})")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "split", Split(self.split))

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    def with_features(self, features: np.ndarray) -> "Dataset":
        return Dataset(features, self.labels, self.class_count, self.split)


def standardize(train: Dataset, *others: Dataset) -> Tuple[Dataset, ...]:
    """
    Per-feature standardization with statistics of the training split.

    Constant features keep a unit divisor.

    Args:
        train: Split the mean and standard deviation come from
        others: Further splits transformed with the same statistics

    Returns:
        The transformed train split followed by the transformed others
    """
    mean = train.features.mean(axis=0)
    std = train.features.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return tuple(ds.with_features((ds.features - mean) / std) for ds in (train,) + others)


def to_frame(dataset: Dataset) -> pd.DataFrame:
    frame = pd.DataFrame(dataset.features, columns=[f"f{i}" for i in range(dataset.dim)])
    frame.insert(0, "label", dataset.labels)
    return frame


def export_csv(dataset: Dataset, path: PathLike) -> Path:
    """Write the dataset as 'label, f0, f1, ...' rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # %.17g keeps float64 values exact through the text round trip
    to_frame(dataset).to_csv(path, index=False, float_format="%.17g")
    logger.info(f"Wrote {dataset.n} {dataset.split.value} samples to {path}")
    return path


def import_csv(path: PathLike, split: Split = Split.TRAIN, class_count: Optional[int] = None) -> Dataset:
    """
    Read a dataset written by export_csv.

    Args:
        path: CSV file
        split: Split tag of the loaded data
        class_count: Number of classes (max label + 1 when omitted)

    Returns:
        Dataset
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise FormatError(f"Could not read dataset {path}: {str(e)}") from e
    if "label" not in frame.columns:
        raise FormatError(f"{path} has no label column")
    feature_columns = [c for c in frame.columns if c != "label"]
    labels = frame["label"].to_numpy(dtype=np.int64)
    features = frame[feature_columns].to_numpy(dtype=np.float64)
    count = class_count if class_count is not None else (int(labels.max()) + 1 if labels.size else 0)
    return Dataset(features, labels, count, split)
