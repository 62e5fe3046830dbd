import logging
from pathlib import Path
from typing import Any, Dict, List, Union

import pandas as pd

from app.agents.base_agent import BaseAgent
from app.config.workspace import workspace_initializer
from app.schemas.base import CellSummary, GridResult
from app.utils.constants import (
    CURVE_COLUMNS,
    DISTANCE_STATS_COLUMNS,
    PROJECTION_COLUMNS,
    RAW_RESULT_COLUMNS,
    SUMMARY_COLUMNS,
    CurveAxis,
    GridPairing,
)
from app.utils.exceptions import FormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

RAW_RESULTS_FILE = "raw_results.csv"
TABLE_FILE = "table.csv"
SUMMARY_FILE = "summary.csv"
CURVES_FILE = "noise_curves.csv"
DISTANCE_STATS_FILE = "distance_stats.csv"
PROJECTION_FILE = "projection.csv"
GRID_RESULT_FILE = "grid_result.json"

TABLE_INDEX = ["method", "loss", "pos_noise"]


def _frame(records: List[Dict[str, Any]], columns: List[str]) -> pd.DataFrame:
    return pd.DataFrame(records, columns=columns)


def results_table(summaries: List[CellSummary]) -> pd.DataFrame:
    """Mean ACC laid out with positive noise down and negative noise across, per method and loss."""
    if not summaries:
        return pd.DataFrame(columns=TABLE_INDEX)
    frame = pd.DataFrame(
        {
            "method": s.method.value,
            "loss": s.loss.value,
            "pos_noise": s.pos_noise,
            "neg_noise": str(s.neg_label),
            "acc_mean": s.acc_mean,
        }
        for s in summaries
    )
    # Column order follows the grid, random-negative column last
    order = list(dict.fromkeys(frame["neg_noise"]))
    table = frame.pivot_table(index=TABLE_INDEX, columns="neg_noise", values="acc_mean", aggfunc="first", dropna=False)
    return table.reindex(columns=order).reset_index()


def noise_curves(result: GridResult) -> pd.DataFrame:
    """
    Accuracy-vs-noise curve points per loss and method.

    positive: negative noise held at 0; negative: positive noise held at 0;
    random: random-negative cells against positive noise; diagonal: paired
    rates of a diagonal grid, against the positive rate.
    """
    records = []
    diagonal = result.config.noise.pairing == GridPairing.DIAGONAL
    for s in result.summaries():
        point = {"loss": s.loss.value, "method": s.method.value, "acc_mean": s.acc_mean, "acc_std_pop": s.acc_std, "n_runs": s.n_runs}
        if s.neg_random:
            records.append({"axis": CurveAxis.RANDOM.value, "noise": s.pos_noise, **point})
            continue
        if diagonal:
            records.append({"axis": CurveAxis.DIAGONAL.value, "noise": s.pos_noise, **point})
            continue
        if s.neg_noise == 0:
            records.append({"axis": CurveAxis.POSITIVE.value, "noise": s.pos_noise, **point})
        if s.pos_noise == 0:
            records.append({"axis": CurveAxis.NEGATIVE.value, "noise": s.neg_noise, **point})
    return _frame(records, CURVE_COLUMNS)


def save_grid_result(result: GridResult, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(result.model_dump_json(by_alias=True, indent=2), encoding="utf-8")
    return path


def load_grid_result(path: PathLike) -> GridResult:
    """Read a GridResult written by save_grid_result."""
    path = Path(path)
    try:
        return GridResult.model_validate_json(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise FormatError(f"Invalid grid result {path}: {str(e)}") from e


def emit_reports(result: GridResult, output_dir: PathLike) -> Dict[str, Path]:
    """
    Write the CSV reports of a finished grid.

    Args:
        result: Grid result (may be empty; every CSV then holds its header only)
        output_dir: Target directory, created when missing

    Returns:
        Mapping of report name to written path

    Raises:
        ConfigError: If the output directory cannot be created or written
    """
    target = workspace_initializer.initialize_output(str(output_dir))
    summaries = result.summaries()
    frames = {
        RAW_RESULTS_FILE: _frame([row.to_row() for row in result.rows], RAW_RESULT_COLUMNS),
        TABLE_FILE: results_table(summaries),
        SUMMARY_FILE: _frame([s.to_row() for s in summaries], SUMMARY_COLUMNS),
        CURVES_FILE: noise_curves(result),
        DISTANCE_STATS_FILE: _frame(
            [
                {"loss": row.loss.value if row.loss else "", **row.model_dump(by_alias=True, exclude={"loss"})}
                for row in result.distance_stats
            ],
            ["loss"] + DISTANCE_STATS_COLUMNS,
        ),
        PROJECTION_FILE: _frame(
            [{**p.model_dump(), "loss": p.loss.value, "method": p.method.value} for p in result.projections],
            PROJECTION_COLUMNS,
        ),
    }

    written: Dict[str, Path] = {}
    for name, frame in frames.items():
        path = target / name
        frame.to_csv(path, index=False)
        written[name] = path
    written[GRID_RESULT_FILE] = save_grid_result(result, target / GRID_RESULT_FILE)
    logger.info(f"Wrote {len(written)} report files to {target}")
    return written


class ReportAgent(BaseAgent):
    """
    Report Agent that turns a grid result into CSV files.
    """

    def execute(self, result: GridResult, output_dir: PathLike) -> Dict[str, Any]:
        """
        Execute the report agent's main functionality.

        Returns:
            Dictionary containing the written files
        """
        self.logger.info(f"Starting ReportAgent for run {self.run_id}")
        try:
            files = emit_reports(result, output_dir)
            report = self.create_report(
                report_type="report",
                message="Reports written",
                details={"files": {name: str(path) for name, path in files.items()}},
            )
            return {"success": True, "files": files, "report": report}
        except Exception as e:
            return self.failure(e)
