# xrayreg/common/__init__.py
"""
Common utilities shared by every component: configuration, errors, file formats, worker pool.
"""

from .config import configure_logging
from .errors import (
    XrayRegError,
    InvalidParameterError,
    BehindSourceError,
    EmptyObjectError,
    PoseError,
    FormatError,
    ShapeError,
    DivergenceError,
    CoverageError,
    OptimizerDivergedError,
    UsageError,
)
from .parallel import gather_ordered

__all__ = [
    "configure_logging",
    "XrayRegError",
    "InvalidParameterError",
    "BehindSourceError",
    "EmptyObjectError",
    "PoseError",
    "FormatError",
    "ShapeError",
    "DivergenceError",
    "CoverageError",
    "OptimizerDivergedError",
    "UsageError",
    "gather_ordered",
]
