import logging
import math
from itertools import product
from typing import Any, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.utils.constants import (
    ANALYTIC_LOSSES,
    RANDOM_NEGATIVE_TOKEN,
    CalibrationMode,
    ClusterMethod,
    DatasetKind,
    GridPairing,
    LossType,
)

logger = logging.getLogger(__name__)


class BaseResponse(BaseModel):
    """Base envelope for command results."""

    status: str = Field(..., description="Response status (success, error)")
    message: str = Field(..., description="Response message")


class SuccessResponse(BaseResponse):
    """Success envelope."""

    status: str = Field("success", description="Response status")
    data: Optional[Any] = Field(None, description="Response data")


class ErrorResponse(BaseResponse):
    """Error envelope."""

    status: str = Field("error", description="Response status")
    error_code: Optional[str] = Field(None, description="Error code")
    details: Optional[Dict[str, Any]] = Field(None, description="Error details")


class TripletMargins(BaseModel):
    """Margins of the triplet losses."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(0.8, gt=0, description="Inter-class margin")
    beta: float = Field(0.4, gt=0, description="Intra-class margin (triplet2, triplet3)")

    @model_validator(mode="after")
    def check_order(self) -> "TripletMargins":
        if self.beta >= self.alpha:
            raise ValueError(f"beta ({self.beta}) must be smaller than alpha ({self.alpha})")
        if not math.isclose(self.beta, self.alpha / 2):
            logger.warning(f"beta={self.beta} differs from alpha/2={self.alpha / 2}; the analytic threshold assumes beta bounds positive pairs")
        return self


class NoiseSpec(BaseModel):
    """Label-noise injected while sampling triplets."""

    model_config = ConfigDict(frozen=True)

    pos_noise: float = Field(0.0, ge=0, le=1, description="Probability the positive comes from a wrong class")
    neg_noise: float = Field(0.0, ge=0, le=1, description="Probability the negative comes from the anchor's class")
    neg_random: bool = Field(False, description="Draw negatives uniformly, ignoring labels (neg_noise is ignored)")

    @property
    def neg_label(self) -> Union[float, str]:
        """Value written to the neg_noise column."""
        return RANDOM_NEGATIVE_TOKEN if self.neg_random else self.neg_noise


class NoiseGrid(BaseModel):
    """Axes of the noise study."""

    pos_rates: List[float] = Field(default_factory=lambda: [0.0, 0.05, 0.10, 0.20], description="Positive-noise rates")
    neg_rates: List[float] = Field(default_factory=lambda: [0.0, 0.02, 0.05, 0.07], description="Negative-noise rates")
    neg_random: bool = Field(True, description="Add a random-negative column")
    pairing: GridPairing = Field(GridPairing.GRID, description="Full grid or one-to-one pairing of rates")

    @field_validator("pos_rates", "neg_rates")
    @classmethod
    def check_rates(cls, rates: List[float]) -> List[float]:
        for rate in rates:
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"noise rate {rate} outside [0, 1]")
        return rates

    @model_validator(mode="after")
    def check_pairing(self) -> "NoiseGrid":
        if self.pairing == GridPairing.DIAGONAL and len(self.pos_rates) != len(self.neg_rates):
            raise ValueError("diagonal pairing needs as many positive as negative rates")
        return self

    def specs(self) -> List[NoiseSpec]:
        """
        Expand the grid into noise specifications.

        Returns:
            One NoiseSpec per cell, random-negative cells last
        """
        if self.pairing == GridPairing.DIAGONAL:
            pairs = list(zip(self.pos_rates, self.neg_rates))
        else:
            pairs = list(product(self.pos_rates, self.neg_rates))
        specs = [NoiseSpec(pos_noise=pos, neg_noise=neg) for pos, neg in pairs]
        if self.neg_random:
            specs.extend(NoiseSpec(pos_noise=pos, neg_random=True) for pos in self.pos_rates)
        return specs


class BlobSpec(BaseModel):
    """Synthetic Gaussian-mixture dataset."""

    k: int = Field(10, gt=0, description="Class count")
    per_class: int = Field(100, gt=0, description="Training samples per class")
    test_per_class: int = Field(50, gt=0, description="Test samples per class")
    dim: int = Field(16, gt=0, description="Feature dimension D")
    center_separation: float = Field(10.0, gt=0, description="Minimum distance between class centers")
    cluster_std: float = Field(1.0, gt=0, description="Isotropic standard deviation around each center")
    seed: int = Field(0, description="Generation seed")


class DatasetConfig(BaseModel):
    """Data source of an experiment."""

    kind: DatasetKind = Field(DatasetKind.BLOBS, description="Data source")
    blobs: BlobSpec = Field(default_factory=BlobSpec, description="Synthetic dataset parameters")
    cifar10_dir: Optional[str] = Field(None, description="CIFAR-10 directory (falls back to CIFAR10_DIR)")
    cifar10_train_files: List[str] = Field(
        default_factory=lambda: [f"data_batch_{i}.bin" for i in range(1, 6)],
        description="Training batch file names",
    )
    cifar10_test_files: List[str] = Field(default_factory=lambda: ["test_batch.bin"], description="Test batch file names")
    standardize: Optional[bool] = Field(None, description="Per-feature standardization (default: on for blobs, off for CIFAR-10)")

    @property
    def should_standardize(self) -> bool:
        if self.standardize is not None:
            return self.standardize
        return self.kind == DatasetKind.BLOBS


def _default_calibration() -> Dict[LossType, CalibrationMode]:
    return {
        LossType.TRIPLET1: CalibrationMode.REGRESSION,
        LossType.TRIPLET2: CalibrationMode.ANALYTIC,
        LossType.TRIPLET3: CalibrationMode.ANALYTIC,
    }


class ExperimentConfig(BaseModel):
    """Full description of a training/clustering experiment."""

    dataset: DatasetConfig = Field(default_factory=DatasetConfig, description="Data source")
    losses: List[LossType] = Field(
        default_factory=lambda: [LossType.TRIPLET1, LossType.TRIPLET2, LossType.TRIPLET3],
        description="Loss variants",
    )
    margins: TripletMargins = Field(default_factory=TripletMargins, description="Loss margins")
    noise: NoiseGrid = Field(default_factory=NoiseGrid, description="Noise grid")
    epochs: int = Field(20, ge=0, description="Training epochs")
    batch_size: int = Field(100, gt=0, description="Triplets per batch")
    learning_rate: float = Field(0.001, gt=0, description="Adam learning rate")
    embedding_dims: List[int] = Field(default_factory=lambda: [64, 32], description="Hidden sizes followed by the output dimension")
    normalize_embeddings: bool = Field(False, description="L2-normalize the network output")
    methods: List[ClusterMethod] = Field(
        default_factory=lambda: [ClusterMethod.MULTICUT],
        description="Clustering methods (kmeans also needs k)",
    )
    k: Optional[int] = Field(None, gt=0, description="Cluster count for k-means; required when kmeans is listed")
    kmeans_restarts: int = Field(10, gt=0, description="k-means++ restarts")
    calibration: Dict[LossType, CalibrationMode] = Field(
        default_factory=_default_calibration,
        description="Calibration mode per loss (a single token applies to all losses)",
    )
    calibration_pairs: int = Field(2000, gt=0, description="Same-class and different-class pairs each for the logistic fit")
    threshold_scale: Optional[float] = Field(None, gt=0, description="Ramp scale s of the analytic model (default tau/8)")
    knn: Optional[int] = Field(None, gt=0, description="Keep only k-nearest-neighbour edges in the multicut graph")
    small_cluster_size: int = Field(10, gt=0, description="Clusters below this size are reported as small")
    seed: int = Field(0, description="Global seed; every random stream derives from it")
    seeds: List[int] = Field(default_factory=lambda: [1, 2, 3, 4, 5], description="Repetition seeds")
    output_dir: str = Field("./outputs", description="Output directory")

    @field_validator("calibration", mode="before")
    @classmethod
    def expand_calibration(cls, value: Any) -> Any:
        if isinstance(value, (str, CalibrationMode)):
            return {loss: value for loss in LossType}
        return value

    @field_validator("embedding_dims")
    @classmethod
    def check_dims(cls, dims: List[int]) -> List[int]:
        if not dims or any(d <= 0 for d in dims):
            raise ValueError("embedding_dims must be a non-empty list of positive sizes")
        return dims

    @model_validator(mode="after")
    def check_consistency(self) -> "ExperimentConfig":
        if not self.seeds:
            raise ValueError("seeds must not be empty")
        if not self.losses:
            raise ValueError("losses must not be empty")
        if ClusterMethod.KMEANS in self.methods and self.k is None:
            raise ValueError("kmeans requires k")
        for loss in self.losses:
            mode = self.calibration_for(loss)
            if mode == CalibrationMode.ANALYTIC and loss not in ANALYTIC_LOSSES:
                raise ValueError(f"analytic calibration is undefined for {loss.value}")
        return self

    def calibration_for(self, loss: LossType) -> CalibrationMode:
        """Calibration mode used for a loss (regression when unmapped)."""
        return self.calibration.get(loss, CalibrationMode.REGRESSION)


class CellResult(BaseModel):
    """One raw row of the grid: a trained embedding clustered by one method."""

    pos_noise: float = Field(..., description="Positive-noise rate")
    neg_noise: float = Field(..., description="Negative-noise rate")
    neg_random: bool = Field(False, description="Random-negative cell")
    loss: LossType = Field(..., description="Loss variant")
    method: ClusterMethod = Field(..., description="Clustering method")
    seed: int = Field(..., description="Repetition seed")
    acc: Optional[float] = Field(None, description="Clustering accuracy")
    n_clusters: Optional[int] = Field(None, description="Predicted cluster count")
    n_small_clusters: Optional[int] = Field(None, description="Predicted clusters below small_cluster_size")
    runtime_s: float = Field(0.0, description="Wall time of the cell")
    error: Optional[str] = Field(None, description="Error message when the cell failed")

    @property
    def neg_label(self) -> Union[float, str]:
        return RANDOM_NEGATIVE_TOKEN if self.neg_random else self.neg_noise

    def to_row(self) -> Dict[str, Any]:
        """Row in the raw CSV schema."""
        return {
            "pos_noise": self.pos_noise,
            "neg_noise": self.neg_label,
            "loss": self.loss.value,
            "method": self.method.value,
            "seed": self.seed,
            "acc": self.acc,
            "n_clusters": self.n_clusters,
            "runtime_s": self.runtime_s,
            "error": self.error or "",
        }


class CellSummary(BaseModel):
    """Aggregate of one (pos_noise, neg_noise, loss, method) cell over seeds."""

    pos_noise: float
    neg_noise: float
    neg_random: bool = False
    loss: LossType
    method: ClusterMethod
    acc_mean: Optional[float] = Field(None, description="Arithmetic mean over successful seeds")
    acc_std: Optional[float] = Field(None, description="Population standard deviation over successful seeds")
    n_runs: int = 0
    n_failed: int = 0

    @property
    def neg_label(self) -> Union[float, str]:
        return RANDOM_NEGATIVE_TOKEN if self.neg_random else self.neg_noise

    def to_row(self) -> Dict[str, Any]:
        """Row in the summary CSV schema (acc_std_pop is the population std)."""
        return {
            "pos_noise": self.pos_noise,
            "neg_noise": self.neg_label,
            "loss": self.loss.value,
            "method": self.method.value,
            "acc_mean": self.acc_mean,
            "acc_std_pop": self.acc_std,
            "n_runs": self.n_runs,
            "n_failed": self.n_failed,
        }


class DistanceStatsRow(BaseModel):
    """One class of the inter/intra distance statistics."""

    loss: Optional[LossType] = None
    class_id: int = Field(..., alias="class")
    intra_mean: float
    intra_std: float
    inter_mean: Optional[float] = Field(None, description="Undefined when only one class exists")
    inter_std: Optional[float] = None
    nearest_class: int = -1

    model_config = ConfigDict(populate_by_name=True)


class ProjectionRow(BaseModel):
    """One embedded test sample projected to two dimensions."""

    loss: LossType
    method: ClusterMethod
    index: int
    pc1: float
    pc2: float
    label: int
    cluster: int


class GridResult(BaseModel):
    """Everything a finished grid produced."""

    config: ExperimentConfig = Field(..., description="Configuration the grid ran with")
    rows: List[CellResult] = Field(default_factory=list, description="Raw per-run rows")
    distance_stats: List[DistanceStatsRow] = Field(default_factory=list, description="Distance statistics per loss")
    projections: List[ProjectionRow] = Field(default_factory=list, description="2-D projections per loss and method")

    def summaries(self) -> List[CellSummary]:
        """
        Aggregate rows over seeds.

        Returns:
            One summary per (pos_noise, neg_noise, loss, method), in first-seen order
        """
        groups: Dict[tuple, List[CellResult]] = {}
        for row in self.rows:
            key = (row.pos_noise, row.neg_noise, row.neg_random, row.loss, row.method)
            groups.setdefault(key, []).append(row)

        summaries = []
        for (pos, neg, neg_random, loss, method), rows in groups.items():
            accs = [row.acc for row in rows if row.error is None and row.acc is not None]
            summaries.append(
                CellSummary(
                    pos_noise=pos,
                    neg_noise=neg,
                    neg_random=neg_random,
                    loss=loss,
                    method=method,
                    acc_mean=float(np.mean(accs)) if accs else None,
                    acc_std=float(np.std(accs)) if accs else None,
                    n_runs=len(rows),
                    n_failed=len(rows) - len(accs),
                )
            )
        return summaries
