from app.clustering.graph import CostGraph, Partition, read_graph, write_graph
from app.clustering.multicut import objective, brute_force, gaec, kl_refine, validate_cycles
from app.clustering.calibration import (
    LogisticModel,
    ThresholdModel,
    analytic_threshold,
    fit_logistic,
    cut_probability,
    edge_cost,
)
from app.clustering.kmeans import KMeansResult, kmeans
from app.clustering.metrics import ClusterEval, DistanceStats, accuracy, distance_stats

__all__ = [
    "CostGraph",
    "Partition",
    "read_graph",
    "write_graph",
    "objective",
    "brute_force",
    "gaec",
    "kl_refine",
    "validate_cycles",
    "LogisticModel",
    "ThresholdModel",
    "analytic_threshold",
    "fit_logistic",
    "cut_probability",
    "edge_cost",
    "KMeansResult",
    "kmeans",
    "ClusterEval",
    "DistanceStats",
    "accuracy",
    "distance_stats",
]
