import logging
import os
from pathlib import Path
from typing import Dict, Optional

from app.config.settings import get_settings
from app.utils.exceptions import ConfigError

# Set up logger
logger = logging.getLogger(__name__)


class WorkspaceInitializer:
    """
    Workspace initializer class using the Singleton pattern.
    Prepares output directories and resolves external data locations.
    """

    _instance = None
    _directories: Dict[str, Path] = {}

    def __new__(cls) -> "WorkspaceInitializer":
        """
        Create a new WorkspaceInitializer instance using the Singleton pattern.

        Returns:
            WorkspaceInitializer: The singleton instance
        """
        if cls._instance is None:
            cls._instance = super(WorkspaceInitializer, cls).__new__(cls)
        return cls._instance

    def initialize_output(self, output_dir: Optional[str] = None) -> Path:
        """
        Create (if needed) and register an output directory.

        Args:
            output_dir: Directory to prepare; defaults to OUTPUT_DIR

        Returns:
            Path: The prepared directory

        Raises:
            ConfigError: If the directory cannot be created or written
        """
        target = Path(output_dir or get_settings().OUTPUT_DIR)
        try:
            target.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            error_message = f"Failed to initialize output directory {target}: {str(e)}"
            logger.error(error_message)
            raise ConfigError(error_message, {"output_dir": str(target)}) from e

        if not os.access(target, os.W_OK):
            error_message = f"Output directory {target} is not writable"
            logger.error(error_message)
            raise ConfigError(error_message, {"output_dir": str(target)})

        self._directories[str(target.resolve())] = target
        logger.info(f"Output directory initialized: {target}")
        return target

    def resolve_cifar10_dir(self, configured: Optional[str] = None) -> Path:
        """
        Resolve the CIFAR-10 directory from the config value or CIFAR10_DIR.

        Args:
            configured: Directory named in the experiment config, if any

        Returns:
            Path: Existing directory

        Raises:
            ConfigError: If neither source names an existing directory
        """
        candidate = configured or get_settings().CIFAR10_DIR
        if not candidate:
            raise ConfigError("CIFAR-10 directory not configured (set CIFAR10_DIR or dataset.cifar10_dir)")

        path = Path(candidate)
        if not path.is_dir():
            raise ConfigError(f"CIFAR-10 directory {path} does not exist", {"cifar10_dir": str(path)})
        return path

    def directories(self) -> Dict[str, Path]:
        """Return the output directories prepared so far."""
        return dict(self._directories)


# Create a singleton instance
workspace_initializer = WorkspaceInitializer()
