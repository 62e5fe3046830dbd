"""
Command-line surface: gen-data, train, cluster, eval, grid, report.

Every command prints a JSON envelope (success or error) and exits with
status 1 on failure.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import yaml
from dotenv import load_dotenv
from pydantic import ValidationError

from app.agents.clustering_agent import ClusteringAgent
from app.agents.grid_agent import GridAgent, load_datasets
from app.agents.report_agent import ReportAgent, load_grid_result
from app.agents.training_agent import TrainingAgent, cell_seed
from app.clustering.graph import Partition, read_partition, write_partition
from app.clustering.metrics import accuracy, distance_stats
from app.config.settings import get_settings
from app.config.workspace import workspace_initializer
from app.datasets.base import Dataset, export_csv, import_csv, standardize
from app.datasets.synthetic import generate_blob_splits
from app.learning.embedding_net import forward, load_checkpoint
from app.schemas.base import ErrorResponse, ExperimentConfig, NoiseSpec, SuccessResponse
from app.utils.constants import ClusterMethod, DatasetKind, LossType, Split
from app.utils.exceptions import ConfigError, ToolkitError
from app.utils.seeding import derive_seed

logger = logging.getLogger(__name__)

TRAIN_CSV = "train.csv"
TEST_CSV = "test.csv"


def load_config(
    path: Optional[str],
    seed: Optional[int] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """
    Load an ExperimentConfig from a YAML or JSON file.

    Overrides are applied before validation, so a flag can supply a value
    the file lacks (such as k for kmeans).

    Args:
        path: Config file (defaults only when omitted)
        seed: Global seed override
        overrides: Further top-level fields taken from command-line flags

    Raises:
        ConfigError: If the file cannot be read or fails validation
    """
    data: Dict[str, Any] = {}
    if path:
        try:
            text = Path(path).read_text(encoding="utf-8")
            data = json.loads(text) if path.endswith(".json") else (yaml.safe_load(text) or {})
        except (OSError, ValueError, yaml.YAMLError) as e:
            raise ConfigError(f"Could not read config {path}: {str(e)}") from e
    if seed is not None:
        data["seed"] = seed
    data.update({key: value for key, value in (overrides or {}).items() if value is not None})
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid config {path}: {str(e)}", {"errors": json.loads(e.json())}) from e


def _datasets(args: argparse.Namespace, config: ExperimentConfig) -> Tuple[Dataset, Dataset]:
    if not getattr(args, "data", None):
        return load_datasets(config)
    root = Path(args.data)
    train = import_csv(root / TRAIN_CSV, Split.TRAIN)
    test = import_csv(root / TEST_CSV, Split.TEST)
    count = max(train.class_count, test.class_count)
    train = Dataset(train.features, train.labels, count, Split.TRAIN)
    test = Dataset(test.features, test.labels, count, Split.TEST)
    if config.dataset.should_standardize:
        train, test = standardize(train, test)
    return train, test


def _noise_spec(args: argparse.Namespace) -> NoiseSpec:
    return NoiseSpec(pos_noise=args.pos_noise, neg_noise=args.neg_noise, neg_random=args.neg_random)


def cmd_gen_data(args: argparse.Namespace) -> Dict[str, Any]:
    config = load_config(args.config, args.seed)
    if config.dataset.kind != DatasetKind.BLOBS:
        raise ConfigError("gen-data only generates synthetic blobs")
    blobs = config.dataset.blobs.model_copy(update={"seed": derive_seed(config.seed, config.dataset.blobs.seed, "blobs")})
    train, test = generate_blob_splits(blobs)
    target = workspace_initializer.initialize_output(args.out)
    files = [str(export_csv(train, target / TRAIN_CSV)), str(export_csv(test, target / TEST_CSV))]
    return SuccessResponse(message="Dataset generated", data={"files": files, "train": train.n, "test": test.n}).model_dump()


def cmd_train(args: argparse.Namespace) -> Dict[str, Any]:
    config = load_config(args.config, args.seed)
    train, _ = _datasets(args, config)
    outcome = TrainingAgent().execute(config, train, _noise_spec(args), args.rep_seed, args.loss, args.out)
    if not outcome["success"]:
        return outcome
    result = outcome["result"]
    return SuccessResponse(
        message="Training completed",
        data={"checkpoint": outcome["checkpoint"], "loss": result.loss.value, "epoch_losses": result.epoch_losses},
    ).model_dump()


def cmd_cluster(args: argparse.Namespace) -> Dict[str, Any]:
    methods = [ClusterMethod(args.method)] if args.method else None
    config = load_config(args.config, args.seed, {"methods": methods, "k": args.k})
    train, test = _datasets(args, config)
    net = load_checkpoint(args.checkpoint)
    loss = LossType(args.loss)
    outcome = ClusteringAgent().execute(net, train, test, loss, config, cell_seed(config, _noise_spec(args), loss, args.rep_seed))
    if not outcome["success"]:
        return outcome

    target = workspace_initializer.initialize_output(args.out)
    summary: Dict[str, Any] = {}
    for method, result in outcome["methods"].items():
        if "error" in result:
            summary[method] = {"error": result["error"]}
            continue
        clustering = result["clustering"]
        labels = clustering.labels if method == ClusterMethod.MULTICUT.value else clustering.assignment
        path = write_partition(Partition(labels), target / f"partition_{method}.txt")
        summary[method] = {"acc": result["evaluation"].acc, "n_clusters": result["evaluation"].n_pred_clusters, "partition": str(path)}
    return SuccessResponse(message="Clustering completed", data=summary).model_dump()


def cmd_eval(args: argparse.Namespace) -> Dict[str, Any]:
    config = load_config(args.config, args.seed, {"k": args.k})
    _, test = _datasets(args, config)
    partition = read_partition(args.partition)
    top_k = config.k or test.class_count
    evaluation = accuracy(partition.labels, test.labels, config.small_cluster_size, top_k=top_k)
    data: Dict[str, Any] = {
        "acc": evaluation.acc,
        "n_clusters": evaluation.n_pred_clusters,
        "n_small_clusters": evaluation.n_small_clusters,
        "top_k_share": evaluation.top_k_share,
        "mapping": evaluation.mapping,
    }
    if args.checkpoint:
        stats = distance_stats(forward(load_checkpoint(args.checkpoint), test.features), test.labels)
        data["distance_stats"] = stats.rows()
    return SuccessResponse(message="Evaluation completed", data=data).model_dump()


def cmd_grid(args: argparse.Namespace) -> Dict[str, Any]:
    config = load_config(args.config, args.seed, {"k": args.k, "output_dir": args.out})
    outcome = GridAgent().execute(config, max_workers=args.workers)
    if not outcome["success"]:
        return outcome
    result = outcome["result"]
    reports = ReportAgent(outcome["report"]["run_id"]).execute(result, config.output_dir)
    if not reports["success"]:
        return reports
    failed = sum(1 for row in result.rows if row.error)
    return SuccessResponse(
        message="Grid completed",
        data={"rows": len(result.rows), "failed_rows": failed, "files": {k: str(v) for k, v in reports["files"].items()}},
    ).model_dump()


def cmd_report(args: argparse.Namespace) -> Dict[str, Any]:
    result = load_grid_result(args.results)
    outcome = ReportAgent().execute(result, args.out or result.config.output_dir)
    if not outcome["success"]:
        return outcome
    return SuccessResponse(message="Reports written", data={k: str(v) for k, v in outcome["files"].items()}).model_dump()


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Experiment config file (YAML or JSON)")
    parser.add_argument("--seed", type=int, help="Global seed; every random stream derives from it")


def _add_k(parser: argparse.ArgumentParser, help_text: str) -> None:
    parser.add_argument("--k", type=int, help=help_text)


def _add_data(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", help="Directory with train.csv/test.csv from gen-data (regenerated from the config when omitted)")


def _add_cell(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--loss", choices=[loss.value for loss in LossType], default=LossType.TRIPLET3.value)
    parser.add_argument("--pos-noise", type=float, default=0.0)
    parser.add_argument("--neg-noise", type=float, default=0.0)
    parser.add_argument("--neg-random", action="store_true")
    parser.add_argument("--rep-seed", type=int, default=1, help="Repetition seed of the cell")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="triplet-clustering", description=get_settings().APP_NAME)
    subparsers = parser.add_subparsers(dest="command", required=True)

    gen = subparsers.add_parser("gen-data", help="Generate synthetic blobs as CSV")
    _add_common(gen)
    gen.add_argument("--out", required=True, help="Output directory")
    gen.set_defaults(handler=cmd_gen_data)

    train = subparsers.add_parser("train", help="Train one embedding network")
    _add_common(train)
    _add_data(train)
    _add_cell(train)
    train.add_argument("--out", required=True, help="Checkpoint path (.npz)")
    train.set_defaults(handler=cmd_train)

    cluster = subparsers.add_parser("cluster", help="Cluster the test split with a trained network")
    _add_common(cluster)
    _add_data(cluster)
    _add_cell(cluster)
    cluster.add_argument("--checkpoint", required=True)
    cluster.add_argument("--method", choices=[m.value for m in ClusterMethod])
    _add_k(cluster, "Cluster count for kmeans (overrides k; kmeans refuses to run without one)")
    cluster.add_argument("--out", required=True, help="Directory for partition files")
    cluster.set_defaults(handler=cmd_cluster)

    evaluate = subparsers.add_parser("eval", help="Score a partition file against the test labels")
    _add_common(evaluate)
    _add_data(evaluate)
    evaluate.add_argument("--partition", required=True)
    evaluate.add_argument("--checkpoint", help="Also report distance statistics of this network")
    _add_k(evaluate, "Number of largest clusters in the reported size share (class count by default)")
    evaluate.set_defaults(handler=cmd_eval)

    grid = subparsers.add_parser("grid", help="Run the noise grid and write reports")
    _add_common(grid)
    grid.add_argument("--out", help="Output directory (overrides output_dir)")
    grid.add_argument("--workers", type=int, help="Worker processes (overrides MAX_WORKERS)")
    _add_k(grid, "Cluster count for kmeans (overrides k)")
    grid.set_defaults(handler=cmd_grid)

    report = subparsers.add_parser("report", help="Write reports from a saved grid result")
    report.add_argument("--results", required=True, help="grid_result.json written by grid")
    report.add_argument("--out", help="Output directory")
    report.set_defaults(handler=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    settings = get_settings()
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    args = build_parser().parse_args(argv)
    handler: Callable[[argparse.Namespace], Dict[str, Any]] = args.handler
    try:
        outcome = handler(args)
    except ToolkitError as e:
        logger.error(f"{args.command} failed: {e.message}")
        outcome = ErrorResponse(message=e.message, error_code=e.error_code, details=e.details).model_dump()

    if outcome.get("success") is False:
        outcome = ErrorResponse(message=outcome.get("error", "Unknown error"), error_code=outcome.get("error_code")).model_dump()
    print(json.dumps(outcome, indent=2, default=str))
    return 1 if outcome.get("status") == "error" else 0


if __name__ == "__main__":
    sys.exit(main())
