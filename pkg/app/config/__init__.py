from app.config.settings import get_settings, Settings
from app.config.workspace import workspace_initializer, WorkspaceInitializer

__all__ = [
    "get_settings",
    "Settings",
    "workspace_initializer",
    "WorkspaceInitializer",
]
