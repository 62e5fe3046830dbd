from app.agents.base_agent import BaseAgent
from app.agents.training_agent import TrainingAgent, TrainingResult, train
from app.agents.clustering_agent import ClusteringAgent, calibrate, cluster_and_score
from app.agents.grid_agent import GridAgent, load_datasets, run_grid
from app.agents.report_agent import ReportAgent, emit_reports, load_grid_result

__all__ = [
    "BaseAgent",
    "TrainingAgent",
    "TrainingResult",
    "train",
    "ClusteringAgent",
    "calibrate",
    "cluster_and_score",
    "GridAgent",
    "load_datasets",
    "run_grid",
    "ReportAgent",
    "emit_reports",
    "load_grid_result",
]
