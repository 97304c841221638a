# xrayreg/common/config.py
"""
Process-wide configuration read from the environment (and an optional .env).
"""
import os
import sys

import psutil
from dotenv import load_dotenv
from loguru import logger

load_dotenv()

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
THREADS = int(os.getenv("XRAYREG_THREADS", str(psutil.cpu_count(logical=False) or 1)))
MICRO_BATCH = int(os.getenv("XRAYREG_MICRO_BATCH", "8"))
DATA_DIR = os.getenv("XRAYREG_DATA_DIR", "./runs")
RENDER_CHUNK_ROWS = int(os.getenv("XRAYREG_RENDER_CHUNK_ROWS", "32"))


def configure_logging(level: str = LOG_LEVEL, logfile: str = None) -> None:
    """Install the stderr sink (and optionally a file sink) at the given level."""
    logger.remove()
    logger.add(sys.stderr, level=level.upper())
    if logfile:
        logger.add(logfile, level="DEBUG", enqueue=False)
