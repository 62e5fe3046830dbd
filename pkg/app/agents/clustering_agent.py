import logging
import time
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from app.agents.base_agent import BaseAgent
from app.clustering.calibration import (
    CalibrationModel,
    ThresholdModel,
    cost_matrix,
    distance_matrix,
    fit_logistic,
)
from app.clustering.graph import CostGraph, Partition
from app.clustering.kmeans import KMeansResult, kmeans
from app.clustering.metrics import ClusterEval, accuracy
from app.clustering.multicut import gaec, kl_refine
from app.datasets.base import Dataset
from app.learning.embedding_net import EmbeddingNet, forward
from app.learning.sampling import balanced_pairs
from app.schemas.base import ExperimentConfig
from app.utils.constants import ANALYTIC_LOSSES, CalibrationMode, ClusterMethod, LossType
from app.utils.exceptions import ConfigError, ParameterError
from app.utils.seeding import make_rng

logger = logging.getLogger(__name__)

Clustering = Union[Partition, KMeansResult]


def calibrate(
    net: EmbeddingNet,
    train: Dataset,
    loss: LossType,
    config: ExperimentConfig,
    rng: np.random.Generator,
) -> CalibrationModel:
    """
    Build the distance-to-cut-probability model configured for a loss.

    Regression fits a logistic model on balanced same-class/different-class
    pairs of training embeddings; analytic derives the threshold from the
    margins.

    Raises:
        ConfigError: If analytic calibration is requested for triplet1
    """
    loss = LossType(loss)
    mode = config.calibration_for(loss)
    if mode == CalibrationMode.ANALYTIC:
        if loss not in ANALYTIC_LOSSES:
            raise ConfigError(f"analytic calibration is undefined for {loss.value}", {"loss": loss.value})
        return ThresholdModel.from_margins(config.margins, config.threshold_scale)

    embeddings = forward(net, train.features)
    pairs, targets = balanced_pairs(train.labels, config.calibration_pairs, rng)
    distances = np.linalg.norm(embeddings[pairs[:, 0]] - embeddings[pairs[:, 1]], axis=1)
    return fit_logistic(distances, targets)


def knn_mask(embeddings: np.ndarray, k: int) -> np.ndarray:
    """Symmetric adjacency keeping each node's k nearest neighbours."""
    distances = distance_matrix(embeddings)
    n = distances.shape[0]
    np.fill_diagonal(distances, np.inf)
    k = min(k, n - 1)
    mask = np.zeros((n, n), dtype=bool)
    if k > 0:
        nearest = np.argsort(distances, axis=1, kind="stable")[:, :k]
        mask[np.repeat(np.arange(n), k), nearest.ravel()] = True
    return mask | mask.T


def multicut_partition(embeddings: np.ndarray, model: CalibrationModel, knn: Optional[int] = None) -> Partition:
    """GAEC followed by KL refinement on the calibrated cost graph of the embeddings."""
    costs = cost_matrix(embeddings, model)
    mask = knn_mask(embeddings, knn) if knn else None
    graph = CostGraph.from_matrix(costs, mask)
    initial = gaec(graph)
    refined = kl_refine(graph, initial)
    logger.debug(f"Multicut on {graph.n} nodes / {graph.m} edges: GAEC {initial.n_components} -> KL {refined.n_components} components")
    return refined


def cluster_and_score(
    net: EmbeddingNet,
    dataset: Dataset,
    method: ClusterMethod,
    calibration: Optional[CalibrationModel],
    config: ExperimentConfig,
    rng: Optional[np.random.Generator] = None,
    embeddings: Optional[np.ndarray] = None,
) -> Tuple[Clustering, ClusterEval]:
    """
    Embed the evaluation samples, cluster them and score the clustering.

    Args:
        net: Trained network
        dataset: Evaluation split
        method: multicut or kmeans
        calibration: Calibration model (required for multicut)
        config: Experiment configuration (k, restarts, knn, small_cluster_size)
        rng: Random source for the k-means restarts
        embeddings: Precomputed embeddings of dataset, if available

    Returns:
        The partition or k-means result, and its ClusterEval
    """
    method = ClusterMethod(method)
    if embeddings is None:
        embeddings = forward(net, dataset.features)

    if method == ClusterMethod.MULTICUT:
        if calibration is None:
            raise ParameterError("multicut needs a calibration model")
        clustering: Clustering = multicut_partition(embeddings, calibration, config.knn)
        predicted = clustering.labels
    else:
        if config.k is None:
            raise ConfigError("kmeans requires k")
        clustering = kmeans(embeddings, config.k, config.kmeans_restarts, rng)
        predicted = clustering.assignment

    evaluation = accuracy(predicted, dataset.labels, config.small_cluster_size, top_k=dataset.class_count)
    logger.info(
        f"{method.value}: {evaluation.n_pred_clusters} clusters "
        f"({evaluation.n_small_clusters} small), ACC={evaluation.acc:.4f}"
    )
    return clustering, evaluation


class ClusteringAgent(BaseAgent):
    """
    Clustering Agent that calibrates, clusters and scores one trained network.
    """

    def execute(
        self,
        net: EmbeddingNet,
        train: Dataset,
        test: Dataset,
        loss: LossType,
        config: ExperimentConfig,
        cell_seed: int,
    ) -> Dict[str, Any]:
        """
        Execute the clustering agent's main functionality for every configured method.

        Calibration and k-means draw from their own streams of cell_seed, so
        each method's result does not depend on which other methods run.

        Returns:
            Dictionary with per-method clusterings and evaluations
        """
        self.logger.info(f"Starting ClusteringAgent for run {self.run_id}")
        try:
            calibration = None
            if ClusterMethod.MULTICUT in config.methods:
                calibration = calibrate(net, train, loss, config, make_rng(cell_seed, "calibration"))
            embeddings = forward(net, test.features)

            methods: Dict[str, Dict[str, Any]] = {}
            for method in config.methods:
                start = time.perf_counter()
                try:
                    clustering, evaluation = cluster_and_score(
                        net, test, method, calibration, config, make_rng(cell_seed, method.value), embeddings
                    )
                except Exception as e:
                    error_message = f"{method.value} failed: {str(e)}"
                    self.log_error(error_message)
                    methods[method.value] = {"error": error_message, "runtime_s": time.perf_counter() - start}
                    continue
                methods[method.value] = {
                    "clustering": clustering,
                    "evaluation": evaluation,
                    "runtime_s": time.perf_counter() - start,
                }
            return {"success": True, "calibration": calibration, "embeddings": embeddings, "methods": methods}
        except Exception as e:
            return self.failure(e)
