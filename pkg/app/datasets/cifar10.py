"""
Reader and writer for the CIFAR-10 binary batch format.

Each record is one label byte (0-9) followed by 3072 pixel bytes: the
1024 red, 1024 green and 1024 blue values of a 32x32 image, row-major.
"""
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from app.config.workspace import workspace_initializer
from app.datasets.base import Dataset
from app.schemas.base import DatasetConfig
from app.utils.constants import Split
from app.utils.exceptions import CorruptRecordError, FormatError, InputShapeError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

CLASS_COUNT = 10
PIXELS = 32 * 32 * 3
RECORD_BYTES = 1 + PIXELS
RECORDS_PER_FILE = 10_000


def _read_records(path: Path, expected_records: int) -> Tuple[np.ndarray, np.ndarray]:
    expected = expected_records * RECORD_BYTES
    try:
        raw = np.fromfile(path, dtype=np.uint8)
    except OSError as e:
        raise FormatError(f"Could not read CIFAR-10 batch {path}: {str(e)}") from e
    if raw.size != expected:
        raise FormatError(
            f"{path} holds {raw.size} bytes, expected {expected}",
            {"path": str(path), "size": int(raw.size), "expected": expected},
        )

    records = raw.reshape(expected_records, RECORD_BYTES)
    labels = records[:, 0]
    bad = np.flatnonzero(labels >= CLASS_COUNT)
    if bad.size:
        raise CorruptRecordError(
            f"{path} record {int(bad[0])} has label byte {int(labels[bad[0]])}",
            {"path": str(path), "record": int(bad[0]), "label": int(labels[bad[0]])},
        )
    return records[:, 1:], labels


def load_cifar10(
    paths: Sequence[PathLike],
    split: Split = Split.TRAIN,
    expected_records: int = RECORDS_PER_FILE,
) -> Dataset:
    """
    Parse CIFAR-10 binary batches into a dataset with pixels scaled to [0, 1].

    Args:
        paths: Batch files, concatenated in order
        split: Split tag of the result
        expected_records: Records per file (every official batch holds 10,000)

    Returns:
        Dataset with D = 3072

    Raises:
        FormatError: If a file is missing or its size is not expected_records * 3073
        CorruptRecordError: If a label byte exceeds 9
    """
    pixels: List[np.ndarray] = []
    labels: List[np.ndarray] = []
    for path in paths:
        batch_pixels, batch_labels = _read_records(Path(path), expected_records)
        pixels.append(batch_pixels)
        labels.append(batch_labels)
        logger.debug(f"Parsed {batch_labels.size} records from {path}")

    if not pixels:
        raise FormatError("no CIFAR-10 batch files given")
    features = np.concatenate(pixels).astype(np.float64) / 255.0
    dataset = Dataset(features, np.concatenate(labels).astype(np.int64), CLASS_COUNT, split)
    logger.info(f"Loaded {dataset.n} CIFAR-10 {Split(split).value} images from {len(pixels)} file(s)")
    return dataset


def dump_cifar10(dataset: Dataset, path: PathLike) -> Path:
    """
    Serialize a dataset back into the binary batch layout.

    Features are mapped back to bytes by round(255 * x), which restores the
    original bytes of any dataset produced by load_cifar10.
    """
    if dataset.dim != PIXELS:
        raise InputShapeError(f"CIFAR-10 records hold {PIXELS} features, dataset has {dataset.dim}")
    pixels = np.rint(dataset.features * 255.0)
    if pixels.min(initial=0) < 0 or pixels.max(initial=0) > 255:
        raise InputShapeError("features must lie in [0, 1]")
    records = np.empty((dataset.n, RECORD_BYTES), dtype=np.uint8)
    records[:, 0] = dataset.labels
    records[:, 1:] = pixels.astype(np.uint8)
    path = Path(path)
    records.tofile(path)
    return path


def load_cifar10_split(config: DatasetConfig, split: Split, directory: Optional[PathLike] = None) -> Dataset:
    """Load the official train or test split named in the dataset config."""
    root = Path(directory) if directory is not None else workspace_initializer.resolve_cifar10_dir(config.cifar10_dir)
    names = config.cifar10_train_files if Split(split) == Split.TRAIN else config.cifar10_test_files
    return load_cifar10([root / name for name in names], split)
