"""
From embedding distances to cut probabilities and signed edge costs.

Costs follow c_e = logit(p_join) = logit(1 - p_cut): likely-cut edges get
negative costs, so minimizing the summed cost of cut edges cuts them.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import expit, logit
from scipy.spatial.distance import pdist, squareform

from app.config.settings import get_settings
from app.schemas.base import TripletMargins
from app.utils.exceptions import DegenerateFitError, InputShapeError, ParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LogisticModel:
    """p_cut = sigmoid(weight * d + bias)."""

    weight: float
    bias: float
    iterations: int = 0
    converged: bool = True

    @property
    def threshold(self) -> float:
        """Distance at which p_cut = 0.5."""
        if self.weight == 0:
            return math.inf
        return -self.bias / self.weight


@dataclass(frozen=True)
class ThresholdModel:
    """p_cut = sigmoid((d - tau) / scale)."""

    tau: float
    scale: float

    def __post_init__(self) -> None:
        if self.tau <= 0 or self.scale <= 0:
            raise ParameterError(f"tau and scale must be positive, got tau={self.tau}, scale={self.scale}")

    @classmethod
    def from_margins(cls, margins: TripletMargins, scale: Optional[float] = None) -> "ThresholdModel":
        tau = analytic_threshold(margins)
        return cls(tau=tau, scale=scale if scale is not None else tau / 8.0)

    @property
    def threshold(self) -> float:
        return self.tau


CalibrationModel = Union[LogisticModel, ThresholdModel]


def pairwise_distance(fi, fj) -> float:
    """Euclidean (not squared) distance between two embeddings."""
    a = np.asarray(fi, dtype=np.float64)
    b = np.asarray(fj, dtype=np.float64)
    if a.shape != b.shape:
        raise InputShapeError(f"embedding shapes differ: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def distance_matrix(embeddings: np.ndarray) -> np.ndarray:
    """Symmetric (n, n) matrix of Euclidean distances between rows."""
    embeddings = np.asarray(embeddings, dtype=np.float64)
    if embeddings.shape[0] < 2:
        return np.zeros((embeddings.shape[0], embeddings.shape[0]))
    return squareform(pdist(embeddings, metric="euclidean"))


def analytic_threshold(margins: TripletMargins, allow_zero_beta: bool = False) -> float:
    """
    Distance threshold tau = sqrt((alpha + beta) / 2).

    Args:
        margins: Loss margins
        allow_zero_beta: Accept beta = 0 (outside the margins' own invariant)

    Returns:
        tau

    Raises:
        ParameterError: If alpha <= 0, or beta <= 0 without the override
    """
    alpha, beta = float(margins.alpha), float(margins.beta)
    if alpha <= 0 or beta < 0 or (beta == 0 and not allow_zero_beta):
        raise ParameterError(f"margins must be positive, got alpha={alpha}, beta={beta}")
    if not math.isclose(beta, alpha / 2):
        logger.warning(f"beta={beta} differs from alpha/2={alpha / 2}; tau assumes beta bounds positive distances")
    return math.sqrt((alpha + beta) / 2.0)


def fit_logistic(
    distances: Sequence[float],
    labels: Sequence[int],
    step: float = 0.1,
    l2: float = 1e-4,
    tolerance: float = 1e-8,
    max_iter: int = 10_000,
) -> LogisticModel:
    """
    One-dimensional logistic regression of cut labels on distances.

    Gradient ascent on the mean log-likelihood minus l2 / 2 times the squared
    weight, both in distance units. The ascent runs on standardized
    distances with the penalty rescaled accordingly, and the fitted
    coefficients are mapped back, so the fixed step size stays stable
    whatever the distance scale.

    Args:
        distances: Pair distances
        labels: 0 for same-class pairs, 1 for different-class pairs
        step: Ascent step size
        l2: Penalty on the weight in distance units
        tolerance: Stop when the gradient norm falls below this value
        max_iter: Iteration cap

    Returns:
        LogisticModel in the original distance units

    Raises:
        DegenerateFitError: If only one class is present
    """
    d = np.asarray(distances, dtype=np.float64).reshape(-1)
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    if d.shape != y.shape:
        raise InputShapeError(f"{d.size} distances but {y.size} labels")
    if d.size == 0 or np.all(y == y[0]):
        raise DegenerateFitError("logistic calibration needs both same-class and different-class pairs")
    if not np.all(np.isin(y, (0.0, 1.0))):
        raise InputShapeError("labels must be 0 or 1")

    center = d.mean()
    spread = d.std() or 1.0
    z = (d - center) / spread

    w, b = 0.0, 0.0
    converged = False
    iteration = 0
    for iteration in range(1, max_iter + 1):
        residual = y - expit(w * z + b)
        # w / spread is the weight in distance units
        grad_w = float(np.mean(residual * z)) - l2 * w / spread**2
        grad_b = float(np.mean(residual))
        w += step * grad_w
        b += step * grad_b
        if math.hypot(grad_w, grad_b) < tolerance:
            converged = True
            break

    if not converged:
        logger.debug(f"Logistic fit stopped after {max_iter} iterations without reaching tolerance {tolerance}")

    weight = w / spread
    bias = b - w * center / spread
    model = LogisticModel(weight=weight, bias=bias, iterations=iteration, converged=converged)
    logger.info(f"Fitted logistic calibration: w={weight:.4f}, b={bias:.4f}, threshold={model.threshold:.4f}")
    return model


def cut_probability(model: CalibrationModel, distance):
    """
    Probability that two samples at the given distance belong to different components.

    Args:
        model: LogisticModel or ThresholdModel
        distance: Scalar or array of non-negative distances

    Returns:
        Probability (same shape as distance)
    """
    d = np.asarray(distance, dtype=np.float64)
    if isinstance(model, ThresholdModel):
        p = expit((d - model.tau) / model.scale)
    else:
        p = expit(model.weight * d + model.bias)
    return float(p) if p.ndim == 0 else p


def edge_cost(p_cut, epsilon: Optional[float] = None):
    """
    Signed edge cost logit(1 - p_cut), after clamping p_cut into [eps, 1 - eps].

    Args:
        p_cut: Scalar or array of cut probabilities
        epsilon: Clamp (PROBABILITY_EPSILON by default)

    Returns:
        Cost (same shape as p_cut); negative exactly when p_cut > 0.5
    """
    eps = epsilon if epsilon is not None else get_settings().PROBABILITY_EPSILON
    p = np.clip(np.asarray(p_cut, dtype=np.float64), eps, 1.0 - eps)
    cost = logit(1.0 - p)
    return float(cost) if cost.ndim == 0 else cost


def cost_matrix(embeddings: np.ndarray, model: CalibrationModel, epsilon: Optional[float] = None) -> np.ndarray:
    """Symmetric matrix of edge costs between all embedded samples (zero diagonal)."""
    costs = edge_cost(cut_probability(model, distance_matrix(embeddings)), epsilon)
    costs = np.atleast_2d(costs)
    np.fill_diagonal(costs, 0.0)
    return costs
