"""
Triplet sampling with controlled label noise.

Noise is injected by redirecting a draw (a positive from a wrong class, a
negative from the anchor's class); stored labels are never changed.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.schemas.base import NoiseSpec
from app.utils.exceptions import InputShapeError, SamplingError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Triplet:
    anchor: int
    positive: int
    negative: int
    pos_corrupted: bool
    neg_corrupted: bool


class LabelIndex:
    """Per-class sample pools of a label array."""

    def __init__(self, labels: Sequence[int]):
        self.labels = np.asarray(labels)
        if self.labels.ndim != 1:
            raise InputShapeError("labels must be one-dimensional")
        self.n = self.labels.shape[0]
        self.by_class: Dict[int, np.ndarray] = {
            int(c): np.flatnonzero(self.labels == c) for c in np.unique(self.labels)
        }
        self._others: Dict[int, np.ndarray] = {}

    def same(self, label: int) -> np.ndarray:
        return self.by_class[int(label)]

    def others(self, label: int) -> np.ndarray:
        label = int(label)
        if label not in self._others:
            self._others[label] = np.flatnonzero(self.labels != label)
        return self._others[label]


def _draw_excluding(rng: np.random.Generator, pool: Optional[np.ndarray], exclude: Tuple[int, ...], n: int = 0) -> Optional[int]:
    """Uniform draw from pool minus exclude (pool=None means range(n)); None if nothing is left."""
    size = n if pool is None else pool.size
    blocked = set(e for e in exclude if e is not None)
    if size <= len(blocked):
        remaining = set(range(n)) if pool is None else set(pool.tolist())
        if not remaining - blocked:
            return None
    while True:
        position = int(rng.integers(size))
        candidate = position if pool is None else int(pool[position])
        if candidate not in blocked:
            return candidate


def _as_index(labels) -> LabelIndex:
    return labels if isinstance(labels, LabelIndex) else LabelIndex(labels)


def sample_triplet(labels, anchor: int, spec: NoiseSpec, rng: np.random.Generator) -> Triplet:
    """
    Draw one triplet around an anchor.

    Args:
        labels: Label array or a prebuilt LabelIndex
        anchor: Anchor sample index
        spec: Noise specification
        rng: Random source

    Returns:
        Triplet with truthful corruption flags

    Raises:
        SamplingError: If the anchor's class has a single member or no other class exists
    """
    index = _as_index(labels)
    anchor = int(anchor)
    label = int(index.labels[anchor])
    same = index.same(label)
    others = index.others(label)
    if same.size < 2:
        raise SamplingError(f"class {label} of anchor {anchor} has no other member", {"anchor": anchor, "label": label})
    if others.size == 0:
        raise SamplingError("a triplet needs at least two non-empty classes")

    if rng.random() < spec.pos_noise:
        positive = _draw_excluding(rng, others, (anchor,))
    else:
        positive = _draw_excluding(rng, same, (anchor,))

    taken = (anchor, positive)
    if spec.neg_random:
        negative = _draw_excluding(rng, None, taken, n=index.n)
    elif rng.random() < spec.neg_noise:
        negative = _draw_excluding(rng, same, taken)
        if negative is None:
            logger.debug(f"No same-class negative left for anchor {anchor}; drawing a clean negative")
            negative = _draw_excluding(rng, others, taken)
    else:
        negative = _draw_excluding(rng, others, taken)
        if negative is None:
            logger.debug(f"No other-class negative left for anchor {anchor}; drawing from the anchor's class")
            negative = _draw_excluding(rng, same, taken)

    if negative is None:
        raise SamplingError(f"no negative available for anchor {anchor}", {"anchor": anchor})

    return Triplet(
        anchor=anchor,
        positive=positive,
        negative=negative,
        pos_corrupted=bool(index.labels[positive] != label),
        neg_corrupted=bool(index.labels[negative] == label),
    )


def sample_batch(labels, batch_size: int, spec: NoiseSpec, rng: np.random.Generator) -> List[Triplet]:
    """Draw batch_size triplets with anchors uniform over all samples, with replacement."""
    index = _as_index(labels)
    if batch_size <= 0:
        return []
    anchors = rng.integers(index.n, size=batch_size)
    return [sample_triplet(index, int(a), spec, rng) for a in anchors]


def triplet_arrays(triplets: Sequence[Triplet]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Anchor, positive and negative index arrays of a batch."""
    return (
        np.fromiter((t.anchor for t in triplets), dtype=np.int64, count=len(triplets)),
        np.fromiter((t.positive for t in triplets), dtype=np.int64, count=len(triplets)),
        np.fromiter((t.negative for t in triplets), dtype=np.int64, count=len(triplets)),
    )


def balanced_pairs(labels, n_pairs: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    Draw n_pairs same-class and n_pairs different-class pairs.

    Args:
        labels: Label array or LabelIndex
        n_pairs: Pairs of each kind
        rng: Random source

    Returns:
        Pair index array of shape (2 * n_pairs, 2) and 0/1 targets
        (0 for same-class pairs, 1 for different-class pairs)
    """
    index = _as_index(labels)
    eligible = np.flatnonzero([index.same(lbl).size >= 2 for lbl in index.labels])
    if eligible.size == 0 or len(index.by_class) < 2:
        raise SamplingError("balanced pairs need a class with two members and at least two classes")

    pairs = np.empty((2 * n_pairs, 2), dtype=np.int64)
    for i in range(n_pairs):
        a = int(eligible[rng.integers(eligible.size)])
        pairs[i] = (a, _draw_excluding(rng, index.same(index.labels[a]), (a,)))
    for i in range(n_pairs):
        a = int(rng.integers(index.n))
        pairs[n_pairs + i] = (a, _draw_excluding(rng, index.others(index.labels[a]), (a,)))
    targets = np.concatenate([np.zeros(n_pairs, dtype=np.int64), np.ones(n_pairs, dtype=np.int64)])
    return pairs, targets
