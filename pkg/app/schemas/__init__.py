from app.schemas.base import (
    BaseResponse,
    SuccessResponse,
    ErrorResponse,
    TripletMargins,
    NoiseSpec,
    NoiseGrid,
    BlobSpec,
    DatasetConfig,
    ExperimentConfig,
    CellResult,
    CellSummary,
    DistanceStatsRow,
    ProjectionRow,
    GridResult,
)

__all__ = [
    "BaseResponse",
    "SuccessResponse",
    "ErrorResponse",
    "TripletMargins",
    "NoiseSpec",
    "NoiseGrid",
    "BlobSpec",
    "DatasetConfig",
    "ExperimentConfig",
    "CellResult",
    "CellSummary",
    "DistanceStatsRow",
    "ProjectionRow",
    "GridResult",
]
