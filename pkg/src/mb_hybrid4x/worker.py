"""Background batch worker daemon."""

import logging
import os
from pathlib import Path

from mm_clikit import write_pid_file

from mb_hybrid4x.core.core import Core

logger = logging.getLogger(__name__)


def run_worker(core: Core, config_path: Path) -> None:
    """Run an experiment file to completion in the background. Only one worker runs at a time."""
    logger.info("Worker started config=%s pid=%d", config_path, os.getpid())
    try:
        write_pid_file(core.config.batch_worker_pid_path)
        try:
            result = core.service.run_batch(config_path)
            logger.info("Worker finished config=%s ran=%d crashed=%d", config_path, result.ran, result.crashed)
        finally:
            core.config.batch_worker_pid_path.unlink(missing_ok=True)
            logger.debug("Worker cleanup: removed PID file")
    except Exception:
        logger.exception("Worker crashed config=%s", config_path)
        raise
