import logging
from typing import Optional, Tuple

import numpy as np
from scipy.spatial.distance import pdist

from app.datasets.base import Dataset
from app.schemas.base import BlobSpec
from app.utils.constants import Split
from app.utils.exceptions import GenerationError

logger = logging.getLogger(__name__)

MAX_REJECTION_ROUNDS = 1000

# Child streams of the blob seed
_CENTER_STREAM, _TRAIN_STREAM, _TEST_STREAM = 0, 1, 2


def hypercube_side(spec: BlobSpec) -> float:
    """Side of the cube centers are drawn from; grows with k^(1/D) so packing stays feasible."""
    return spec.center_separation * max(1.0, 2.0 * spec.k ** (1.0 / spec.dim))


def draw_centers(
    k: int,
    dim: int,
    separation: float,
    rng: np.random.Generator,
    side: float,
    max_rounds: int = MAX_REJECTION_ROUNDS,
) -> np.ndarray:
    """
    Draw k centers uniformly in [0, side]^dim with all pairwise distances >= separation.

    Raises:
        GenerationError: If no draw satisfies the separation within max_rounds
    """
    for round_ in range(1, max_rounds + 1):
        centers = rng.uniform(0.0, side, size=(k, dim))
        if k < 2 or pdist(centers).min() >= separation:
            logger.debug(f"Blob centers accepted after {round_} rounds")
            return centers
    raise GenerationError(
        f"could not place {k} centers {separation} apart in a cube of side {side} after {max_rounds} rounds",
        {"k": k, "dim": dim, "separation": separation, "side": side},
    )


def _streams(seed: int):
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(3)]


def _sample(centers: np.ndarray, per_class: int, std: float, rng: np.random.Generator, split: Split) -> Dataset:
    k, dim = centers.shape
    labels = np.repeat(np.arange(k), per_class)
    features = centers[labels] + rng.normal(0.0, std, size=(labels.size, dim))
    return Dataset(features, labels, k, split)


def generate_blobs(spec: BlobSpec, split: Split = Split.TRAIN, centers: Optional[np.ndarray] = None) -> Dataset:
    """
    Isotropic Gaussian blobs around well-separated centers.

    Both splits share the centers of the spec's seed and draw their points
    from separate child streams, so they are disjoint samples of one mixture.

    Args:
        spec: Blob parameters
        split: TRAIN draws per_class points per class, TEST draws test_per_class
        centers: Reuse already drawn centers

    Returns:
        Dataset (deterministic per spec)
    """
    split = Split(split)
    streams = _streams(spec.seed)
    if centers is None:
        centers = draw_centers(spec.k, spec.dim, spec.center_separation, streams[_CENTER_STREAM], hypercube_side(spec))
    if split == Split.TRAIN:
        return _sample(centers, spec.per_class, spec.cluster_std, streams[_TRAIN_STREAM], split)
    return _sample(centers, spec.test_per_class, spec.cluster_std, streams[_TEST_STREAM], split)


def generate_blob_splits(spec: BlobSpec) -> Tuple[Dataset, Dataset]:
    """Train and test splits sharing one set of centers."""
    centers = draw_centers(
        spec.k, spec.dim, spec.center_separation, _streams(spec.seed)[_CENTER_STREAM], hypercube_side(spec)
    )
    train = generate_blobs(spec, Split.TRAIN, centers)
    test = generate_blobs(spec, Split.TEST, centers)
    logger.info(f"Generated blobs: k={spec.k}, D={spec.dim}, {train.n} train / {test.n} test samples")
    return train, test
