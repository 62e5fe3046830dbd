import logging
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Optional, Tuple

from app.agents.base_agent import BaseAgent
from app.agents.tasks import CellTask, install_datasets, run_cell
from app.config.settings import get_settings
from app.datasets.base import Dataset, standardize
from app.datasets.cifar10 import load_cifar10_split
from app.datasets.synthetic import generate_blob_splits
from app.schemas.base import ExperimentConfig, GridResult, NoiseSpec
from app.utils.constants import DatasetKind, Split
from app.utils.seeding import derive_seed

logger = logging.getLogger(__name__)


def load_datasets(config: ExperimentConfig) -> Tuple[Dataset, Dataset]:
    """
    Train and test splits of the configured data source.

    Blob generation is seeded from the global seed and the blob spec's own
    seed. Standardization, when enabled, uses training statistics for both splits.
    """
    if config.dataset.kind == DatasetKind.BLOBS:
        blobs = config.dataset.blobs.model_copy(update={"seed": derive_seed(config.seed, config.dataset.blobs.seed, "blobs")})
        train, test = generate_blob_splits(blobs)
    else:
        train = load_cifar10_split(config.dataset, Split.TRAIN)
        test = load_cifar10_split(config.dataset, Split.TEST)

    if config.dataset.should_standardize:
        train, test = standardize(train, test)
    return train, test


def _extras_spec(specs: List[NoiseSpec]) -> Optional[NoiseSpec]:
    for spec in specs:
        if spec.pos_noise == 0 and spec.neg_noise == 0 and not spec.neg_random:
            return spec
    return specs[0] if specs else None


def build_tasks(config: ExperimentConfig, run_id: str = "") -> List[CellTask]:
    """One task per (noise spec, loss, seed); the noiseless cell of the first seed collects extras."""
    specs = config.noise.specs()
    extras_spec = _extras_spec(specs)
    tasks = []
    for spec in specs:
        for loss in config.losses:
            for seed in config.seeds:
                tasks.append(
                    CellTask(
                        config=config,
                        spec=spec,
                        loss=loss,
                        seed=seed,
                        run_id=run_id,
                        collect_extras=spec == extras_spec and seed == config.seeds[0],
                    )
                )
    return tasks


def run_grid(
    config: ExperimentConfig,
    datasets: Optional[Tuple[Dataset, Dataset]] = None,
    max_workers: Optional[int] = None,
    run_id: str = "",
) -> GridResult:
    """
    Run every grid cell and collect the raw rows.

    Cells execute on a process pool when more than one worker is configured,
    inline otherwise; results are gathered in task order either way.

    Args:
        config: Experiment configuration
        datasets: Train and test splits (loaded from the config when omitted)
        max_workers: Worker processes (MAX_WORKERS by default)
        run_id: Identifier propagated to the cell agents

    Returns:
        GridResult with one row per (cell, method); failed cells carry their error
    """
    train, test = datasets if datasets is not None else load_datasets(config)
    tasks = build_tasks(config, run_id)
    workers = max_workers or get_settings().MAX_WORKERS
    logger.info(f"Running {len(tasks)} grid cells x {len(config.methods)} methods on {workers} worker(s)")

    start = time.perf_counter()
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(workers, initializer=install_datasets, initargs=(train, test)) as pool:
            outcomes = list(pool.map(run_cell, tasks))
    else:
        outcomes = [run_cell(task, train, test) for task in tasks]

    rows: List[Dict[str, Any]] = []
    stats: List[Dict[str, Any]] = []
    projections: List[Dict[str, Any]] = []
    failed = 0
    for outcome in outcomes:
        rows.extend(outcome["rows"])
        stats.extend(outcome.get("distance_stats", []))
        projections.extend(outcome.get("projections", []))
        failed += not outcome["success"]
    result = GridResult(config=config, rows=rows, distance_stats=stats, projections=projections)

    logger.info(f"Grid finished in {time.perf_counter() - start:.1f}s: {len(result.rows)} rows, {failed} failed cells")
    return result


class GridAgent(BaseAgent):
    """
    Grid Agent that runs the full noise study.
    """

    def execute(
        self,
        config: ExperimentConfig,
        datasets: Optional[Tuple[Dataset, Dataset]] = None,
        max_workers: Optional[int] = None,
    ) -> Dict[str, Any]:
        """
        Execute the grid agent's main functionality.

        Args:
            config: Experiment configuration
            datasets: Optional preloaded train and test splits
            max_workers: Worker processes (MAX_WORKERS by default)

        Returns:
            Dictionary containing execution results
        """
        self.logger.info(f"Starting GridAgent for run {self.run_id}")
        try:
            result = run_grid(config, datasets, max_workers, self.run_id)
            failures = [row for row in result.rows if row.error]
            report = self.create_report(
                report_type="grid",
                message="Grid completed",
                details={"rows": len(result.rows), "failed_rows": len(failures)},
            )
            return {"success": True, "result": result, "report": report}
        except Exception as e:
            return self.failure(e)
