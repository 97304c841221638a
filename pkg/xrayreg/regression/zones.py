# xrayreg/regression/zones.py
"""
Partition of the (t_alpha, t_beta) plane into zones with dedicated regressors.
"""
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterator, Tuple

import numpy as np

from xrayreg.common.errors import InvalidParameterError

Zone = Tuple[int, int]


@dataclass(frozen=True)
class ZoneGrid:
    n_alpha: int = 18
    n_beta: int = 18
    size_alpha: float = 20.0
    size_beta: float = 20.0
    origin_alpha: float = -180.0
    origin_beta: float = -180.0

    def __post_init__(self):
        if self.n_alpha < 1 or self.n_beta < 1:
            raise InvalidParameterError("zone grid needs at least one zone per axis")
        if not (self.size_alpha > 0 and self.size_beta > 0):
            raise InvalidParameterError("zone sizes must be > 0")

    @classmethod
    def from_span(cls, n_alpha: int, n_beta: int, span_alpha: float, span_beta: float) -> "ZoneGrid":
        """Grid of n_alpha x n_beta zones covering [−span, +span] on each axis."""
        return cls(
            n_alpha=n_alpha,
            n_beta=n_beta,
            size_alpha=2.0 * span_alpha / n_alpha,
            size_beta=2.0 * span_beta / n_beta,
            origin_alpha=-span_alpha,
            origin_beta=-span_beta,
        )

    @classmethod
    def desk(cls) -> "ZoneGrid":
        return cls.from_span(1, 1, 10.0, 10.0)

    def bounds(self, zone: Zone) -> Tuple[Tuple[float, float], Tuple[float, float]]:
        i, j = zone
        a0 = self.origin_alpha + i * self.size_alpha
        b0 = self.origin_beta + j * self.size_beta
        return (a0, a0 + self.size_alpha), (b0, b0 + self.size_beta)

    def zones(self) -> Iterator[Zone]:
        for i in range(self.n_alpha):
            for j in range(self.n_beta):
                yield (i, j)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "ZoneGrid":
        return cls(**doc)


def zone_of(t_alpha: float, t_beta: float, grid: ZoneGrid) -> Zone:
    """floor((angle − origin)/size), clamped to the grid."""
    i = int(np.floor((t_alpha - grid.origin_alpha) / grid.size_alpha))
    j = int(np.floor((t_beta - grid.origin_beta) / grid.size_beta))
    return (min(max(i, 0), grid.n_alpha - 1), min(max(j, 0), grid.n_beta - 1))
