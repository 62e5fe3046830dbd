import abc
import logging
import uuid
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from app.utils.exceptions import ToolkitError

logger = logging.getLogger(__name__)


class BaseAgent(abc.ABC):
    """
    Base agent class that all pipeline stages inherit from.
    Provides run identification and report bookkeeping.
    """

    def __init__(self, run_id: Optional[str] = None):
        """
        Initialize the base agent.

        Args:
            run_id: Identifier shared by every agent of one run (generated when omitted)
        """
        self.run_id = run_id or uuid.uuid4().hex[:12]
        self.reports: List[Dict[str, Any]] = []
        self.logger = logger

    @abc.abstractmethod
    def execute(self, *args: Any, **kwargs: Any) -> Dict[str, Any]:
        """
        Execute the agent's main functionality.
        Must be implemented by all subclasses.

        Returns:
            Dictionary with a "success" flag and either results or an "error"
        """

    def log_error(self, error_message: str, error_details: Optional[Dict[str, Any]] = None) -> None:
        """
        Log an error for the run and keep it as an error report.

        Args:
            error_message: The error message
            error_details: Additional error details
        """
        self.logger.error(f"Run {self.run_id} error: {error_message}")
        self.create_report("error", error_message, error_details)

    def create_report(self, report_type: str, message: str, details: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """
        Record a report for the run.

        Args:
            report_type: Type of report
            message: Report message
            details: Additional report details

        Returns:
            The stored report
        """
        report = {
            "report_id": str(uuid.uuid4()),
            "run_id": self.run_id,
            "agent": self.__class__.__name__,
            "type": report_type,
            "message": message,
            "details": details or {},
            "created_at": datetime.now(timezone.utc).isoformat(),
        }
        self.reports.append(report)
        return report

    def failure(self, error: Exception) -> Dict[str, Any]:
        """Build the failure envelope for an exception raised during execute."""
        if isinstance(error, ToolkitError):
            error_message = f"Error in {self.__class__.__name__}: {error.message}"
            self.log_error(error_message, {"error_code": error.error_code, **error.details})
            return {"success": False, "error": error_message, "error_code": error.error_code}
        error_message = f"Error in {self.__class__.__name__}: {str(error)}"
        self.log_error(error_message)
        return {"success": False, "error": error_message}
