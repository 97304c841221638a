# xrayreg/common/errors.py
from typing import Optional, Sequence


class XrayRegError(Exception):
    """Root of every error raised by the registration engine."""


class InvalidParameterError(XrayRegError, ValueError):
    pass


class BehindSourceError(XrayRegError, ValueError):
    pass


class EmptyObjectError(XrayRegError, ValueError):
    pass


class PoseError(XrayRegError, ValueError):
    pass


class FormatError(XrayRegError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class ShapeError(XrayRegError, ValueError):
    def __init__(self, layer: str, message: str):
        super().__init__(f"layer '{layer}': {message}")
        self.layer = layer


class DivergenceError(XrayRegError):
    def __init__(self, epoch: int, iteration: int, context: str = ""):
        where = f" [{context}]" if context else ""
        super().__init__(f"non-finite loss at epoch {epoch}, iteration {iteration}{where}")
        self.epoch = epoch
        self.iteration = iteration
        self.context = context


class CoverageError(XrayRegError, KeyError):
    def __init__(self, zone, group: Optional[int] = None):
        msg = f"no regressor for zone {zone}" + (f", group {group}" if group else "")
        super().__init__(msg)
        self.zone = zone
        self.group = group

    def __str__(self):
        return self.args[0]


class OptimizerDivergedError(XrayRegError):
    def __init__(self, point: Sequence[float]):
        super().__init__(f"objective is not finite at {list(point)}")
        self.point = list(point)


class UsageError(XrayRegError):
    pass
