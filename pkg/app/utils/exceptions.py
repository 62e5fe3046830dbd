from typing import Any, Dict, Optional


class ToolkitError(Exception):
    """
    Base error for the toolkit.
    Carries the same error_code/details pair as the ErrorResponse envelope.
    """

    error_code = "toolkit_error"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """Return the error as an ErrorResponse-shaped dictionary."""
        return {
            "status": "error",
            "message": self.message,
            "error_code": self.error_code,
            "details": self.details,
        }


class InputShapeError(ToolkitError):
    error_code = "input_shape"


class NumericError(ToolkitError):
    error_code = "non_finite"


class SizeLimitError(ToolkitError):
    error_code = "size_limit"


class ParameterError(ToolkitError):
    error_code = "invalid_parameter"


class SamplingError(ToolkitError):
    error_code = "unsatisfiable_positive"


class DegenerateFitError(ToolkitError):
    error_code = "degenerate_fit"


class DegenerateProjectionError(ToolkitError):
    error_code = "degenerate_projection"


class GenerationError(ToolkitError):
    error_code = "generation_failed"


class FormatError(ToolkitError):
    error_code = "format_error"


class CorruptRecordError(FormatError):
    error_code = "corrupt_record"


class ConfigError(ToolkitError):
    error_code = "invalid_config"
