"""Composition root -- owns config and service layer."""

from mb_hybrid4x.config import Config
from mb_hybrid4x.core.service import Service


class Core:
    """Application composition root. Creates and owns all shared resources."""

    def __init__(self, config: Config) -> None:
        """Initialize with config, creating the service."""
        self.config = config
        self.service = Service(config)

    def close(self) -> None:
        """Release resources. Games hold none between commands."""
