import logging
from typing import Optional

import numpy as np

from app.utils.exceptions import DegenerateProjectionError, InputShapeError

logger = logging.getLogger(__name__)


def _orthogonal_fallback(basis: np.ndarray, dim: int) -> np.ndarray:
    """First unit axis direction orthogonal to the found components (null-space filler)."""
    for axis in range(dim):
        v = np.zeros(dim)
        v[axis] = 1.0
        if basis.size:
            v -= basis.T @ (basis @ v)
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            return v / norm
    raise DegenerateProjectionError("no orthogonal direction left")


def _orient(v: np.ndarray) -> np.ndarray:
    # Largest-magnitude coordinate positive, so the projection is sign-stable
    return v if v[np.argmax(np.abs(v))] >= 0 else -v


def principal_directions(
    covariance: np.ndarray,
    out_dim: int,
    tolerance: float = 1e-9,
    max_iter: int = 1000,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """
    Leading eigenvectors of a covariance matrix by power iteration with deflation.

    Returns:
        (out_dim, D) matrix of orthonormal rows
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    dim = covariance.shape[0]
    deflated = covariance.copy()
    components = np.zeros((0, dim))
    for c in range(out_dim):
        v = rng.standard_normal(dim)
        v /= np.linalg.norm(v)
        for iteration in range(1, max_iter + 1):
            w = deflated @ v
            norm = np.linalg.norm(w)
            if norm <= 1e-300:
                # Remaining spectrum is zero
                v = _orthogonal_fallback(components, dim)
                break
            w /= norm
            step = min(np.linalg.norm(w - v), np.linalg.norm(w + v))
            v = w
            if step < tolerance:
                break
        else:
            logger.debug(f"Power iteration for component {c} stopped at {max_iter} iterations")
        v = _orient(v)
        eigenvalue = float(v @ covariance @ v)
        deflated -= eigenvalue * np.outer(v, v)
        components = np.vstack([components, v])
    return components


def pca_project(features: np.ndarray, out_dim: int = 2) -> np.ndarray:
    """
    Project centered data onto its top principal directions.

    Args:
        features: (n, D) data with n >= 2
        out_dim: Number of output coordinates

    Returns:
        (n, out_dim) projections

    Raises:
        InputShapeError: If n < 2 or out_dim exceeds D
        DegenerateProjectionError: If the data has zero variance
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise InputShapeError(f"projection needs an (n, D) array with n >= 2, got shape {x.shape}")
    if not 1 <= out_dim <= x.shape[1]:
        raise InputShapeError(f"cannot project {x.shape[1]}-dimensional data to {out_dim} dimensions")

    centered = x - x.mean(axis=0)
    covariance = centered.T @ centered / x.shape[0]
    if np.trace(covariance) <= 0:
        raise DegenerateProjectionError("all points are identical")

    components = principal_directions(covariance, out_dim)
    return centered @ components.T
