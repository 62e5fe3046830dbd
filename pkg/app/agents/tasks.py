"""
Worker-pool entry points for grid cells.

A cell is one (noise spec, loss, repetition seed) triple: it trains one
network and scores every configured clustering method on it. Cells share
no mutable state; the datasets are installed once per worker process.
"""
import logging
import time
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

from app.agents.clustering_agent import ClusteringAgent
from app.agents.training_agent import TrainingAgent
from app.clustering.metrics import distance_stats
from app.datasets.base import Dataset
from app.datasets.projection import pca_project
from app.schemas.base import CellResult, DistanceStatsRow, ExperimentConfig, NoiseSpec, ProjectionRow
from app.utils.constants import ClusterMethod, LossType
from app.utils.exceptions import ToolkitError

logger = logging.getLogger(__name__)

_datasets: Dict[str, Dataset] = {}


@dataclass(frozen=True)
class CellTask:
    config: ExperimentConfig
    spec: NoiseSpec
    loss: LossType
    seed: int
    run_id: str = ""
    # Also report distance statistics and projections for this cell
    collect_extras: bool = False


def install_datasets(train: Dataset, test: Dataset) -> None:
    """Pool initializer: make the splits available to run_cell in this process."""
    _datasets["train"] = train
    _datasets["test"] = test


def _rows(task: CellTask, runtime_s: float, methods: Dict[str, Dict[str, Any]], error: Optional[str] = None) -> List[CellResult]:
    rows = []
    for method in task.config.methods:
        outcome = methods.get(method.value, {})
        evaluation = outcome.get("evaluation")
        rows.append(
            CellResult(
                pos_noise=task.spec.pos_noise,
                neg_noise=task.spec.neg_noise,
                neg_random=task.spec.neg_random,
                loss=task.loss,
                method=method,
                seed=task.seed,
                acc=evaluation.acc if evaluation else None,
                n_clusters=evaluation.n_pred_clusters if evaluation else None,
                n_small_clusters=evaluation.n_small_clusters if evaluation else None,
                runtime_s=runtime_s + outcome.get("runtime_s", 0.0),
                error=error or outcome.get("error"),
            )
        )
    return rows


def _extras(task: CellTask, test: Dataset, embeddings, methods: Dict[str, Dict[str, Any]]) -> Dict[str, list]:
    stats = [
        DistanceStatsRow(loss=task.loss, **row)
        for row in distance_stats(embeddings, test.labels).rows()
    ]
    projections: List[ProjectionRow] = []
    try:
        coords = pca_project(embeddings, 2)
    except ToolkitError as e:
        logger.warning(f"Skipping projection for {task.loss.value}: {e.message}")
        return {"distance_stats": stats, "projections": projections}

    for method_name, outcome in methods.items():
        if "clustering" not in outcome:
            continue
        clustering = outcome["clustering"]
        clusters = clustering.labels if ClusterMethod(method_name) == ClusterMethod.MULTICUT else clustering.assignment
        projections.extend(
            ProjectionRow(
                loss=task.loss,
                method=ClusterMethod(method_name),
                index=i,
                pc1=float(coords[i, 0]),
                pc2=float(coords[i, 1]),
                label=int(test.labels[i]),
                cluster=int(clusters[i]),
            )
            for i in range(test.n)
        )
    return {"distance_stats": stats, "projections": projections}


def run_cell(task: CellTask, train: Optional[Dataset] = None, test: Optional[Dataset] = None) -> Dict[str, Any]:
    """
    Train, calibrate, cluster and score one grid cell.

    Args:
        task: Cell coordinates and configuration
        train: Training split (the installed one by default)
        test: Evaluation split (the installed one by default)

    Returns:
        Dictionary with the cell's CellResult rows (as dicts); failures are
        recorded in the rows, never raised
    """
    train = train if train is not None else _datasets.get("train")
    test = test if test is not None else _datasets.get("test")
    label = f"pos={task.spec.pos_noise} neg={task.spec.neg_label} loss={task.loss.value} seed={task.seed}"
    start = time.perf_counter()

    if train is None or test is None:
        error_message = "datasets not installed in worker"
        logger.error(f"Cell {label} failed: {error_message}")
        return {"success": False, "error": error_message, "rows": [r.model_dump() for r in _rows(task, 0.0, {}, error_message)]}

    training = TrainingAgent(task.run_id).execute(task.config, train, task.spec, task.seed, task.loss)
    if not training["success"]:
        runtime_s = time.perf_counter() - start
        logger.error(f"Cell {label} failed during training: {training['error']}")
        rows = _rows(task, runtime_s, {}, training["error"])
        return {"success": False, "error": training["error"], "rows": [r.model_dump() for r in rows]}

    result = training["result"]
    runtime_s = time.perf_counter() - start
    clustering = ClusteringAgent(task.run_id).execute(result.net, train, test, task.loss, task.config, result.cell_seed)
    if not clustering["success"]:
        logger.error(f"Cell {label} failed during clustering: {clustering['error']}")
        rows = _rows(task, time.perf_counter() - start, {}, clustering["error"])
        return {"success": False, "error": clustering["error"], "rows": [r.model_dump() for r in rows]}

    rows = _rows(task, runtime_s, clustering["methods"])
    outcome: Dict[str, Any] = {"success": True, "rows": [r.model_dump() for r in rows]}
    if task.collect_extras:
        try:
            extras = _extras(task, test, clustering["embeddings"], clustering["methods"])
            outcome["distance_stats"] = [s.model_dump(by_alias=True) for s in extras["distance_stats"]]
            outcome["projections"] = [p.model_dump() for p in extras["projections"]]
        except ToolkitError as e:
            logger.warning(f"Cell {label}: no distance statistics ({e.message})")

    logger.info(f"Cell {label} done in {time.perf_counter() - start:.2f}s")
    return outcome
