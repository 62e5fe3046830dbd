import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from app.config.settings import get_settings
from app.utils.exceptions import InputShapeError, ParameterError, SizeLimitError

logger = logging.getLogger(__name__)


@dataclass
class KMeansResult:
    centroids: np.ndarray
    assignment: np.ndarray
    inertia: float
    iterations: int
    inertia_trace: Optional[List[float]] = None


def _squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    return ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)


def _assign(points: np.ndarray, centroids: np.ndarray):
    dist = _squared_distances(points, centroids)
    # argmin returns the lowest index among ties
    assignment = np.argmin(dist, axis=1)
    return assignment, dist[np.arange(points.shape[0]), assignment]


def kmeans_plus_plus(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Seed k centroids with squared-distance-proportional sampling."""
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    closest = ((points - points[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            index = int(rng.choice(n, p=closest / total))
        else:
            # Every point coincides with a centroid; fall back to an unused point
            unused = np.setdiff1d(np.arange(n), chosen)
            index = int(rng.choice(unused))
        chosen.append(index)
        closest = np.minimum(closest, ((points - points[index]) ** 2).sum(axis=1))
    return points[chosen].copy()


def lloyd(points: np.ndarray, centroids: np.ndarray, max_iter: int) -> KMeansResult:
    """Alternate assignment and mean updates until the assignment stops changing."""
    k = centroids.shape[0]
    assignment, closest = _assign(points, centroids)
    trace = [float(closest.sum())]
    iterations = 0
    for iterations in range(1, max_iter + 1):
        for cluster in range(k):
            members = assignment == cluster
            if members.any():
                centroids[cluster] = points[members].mean(axis=0)
            else:
                far = int(np.argmax(closest))
                logger.warning(f"k-means cluster {cluster} emptied; reseeding it at point {far}")
                centroids[cluster] = points[far]
                closest[far] = 0.0
        new_assignment, closest = _assign(points, centroids)
        trace.append(float(closest.sum()))
        if np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment

    inertia = float(((points - centroids[assignment]) ** 2).sum())
    return KMeansResult(centroids, assignment, inertia, iterations, trace)


def kmeans(
    points: np.ndarray,
    k: int,
    restarts: int = 10,
    rng: Optional[np.random.Generator] = None,
    max_iter: Optional[int] = None,
) -> KMeansResult:
    """
    Best of `restarts` k-means++ initialized Lloyd runs.

    Each restart draws from its own child stream of rng, so results do not
    depend on how restarts are scheduled.

    Args:
        points: (n, d) data
        k: Cluster count
        restarts: Independent initializations
        rng: Random source
        max_iter: Lloyd iterations per run (KMEANS_MAX_ITER by default)

    Returns:
        KMeansResult with the lowest inertia (earliest restart on ties)

    Raises:
        ParameterError: If k or restarts is not positive
        SizeLimitError: If k exceeds the number of points
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise InputShapeError(f"points must be an (n, d) array, got shape {points.shape}")
    if k is None or k <= 0:
        raise ParameterError("k must be a positive integer")
    if restarts <= 0:
        raise ParameterError("restarts must be positive")
    n = points.shape[0]
    if k > n:
        raise SizeLimitError(f"k={k} exceeds the {n} available points", {"k": k, "n": n})

    max_iter = max_iter or get_settings().KMEANS_MAX_ITER
    rng = rng if rng is not None else np.random.default_rng()
    streams = rng.spawn(restarts)

    best: Optional[KMeansResult] = None
    for restart, stream in enumerate(streams):
        result = lloyd(points, kmeans_plus_plus(points, k, stream), max_iter)
        logger.debug(f"k-means restart {restart}: inertia={result.inertia:.6f} after {result.iterations} iterations")
        if best is None or result.inertia < best.inertia:
            best = result
    return best
