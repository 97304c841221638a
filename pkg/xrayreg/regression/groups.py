# xrayreg/regression/groups.py
"""
The three hierarchically regressed parameter groups and their sampling ranges.

Half-ranges are listed for all six parameters (x, y, z, θ, α, β): the members
of a group are its regression targets, the rest describe how much the other
parameters may still be off when this group is applied.
"""
from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np

from xrayreg.common.errors import InvalidParameterError
from xrayreg.nn.labels import LabelScaler

GROUP_MEMBERS: Dict[int, Tuple[int, ...]] = {1: (0, 1, 3), 2: (4, 5), 3: (2,)}
GROUP_ORDER = (1, 2, 3)

FULL_HALF_RANGES = (3.0, 3.0, 30.0, 6.0, 30.0, 30.0)
REDUCED_IN_PLANE = (0.4, 0.4, 1.0)
REDUCED_OUT_OF_PLANE = (1.5, 1.5)


@dataclass(frozen=True)
class GroupSpec:
    group: int
    half_ranges: Tuple[float, float, float, float, float, float]

    def __post_init__(self):
        if self.group not in GROUP_MEMBERS:
            raise InvalidParameterError(f"group must be 1, 2 or 3, got {self.group}")
        hr = tuple(float(h) for h in self.half_ranges)
        if len(hr) != 6 or any(h < 0 for h in hr):
            raise InvalidParameterError(f"need six non-negative half-ranges, got {self.half_ranges}")
        if any(hr[k] <= 0 for k in self.members):
            raise InvalidParameterError("regressed parameters need a positive half-range")
        object.__setattr__(self, "half_ranges", hr)

    @property
    def members(self) -> Tuple[int, ...]:
        return GROUP_MEMBERS[self.group]

    @property
    def n_out(self) -> int:
        return len(self.members)

    def scaler(self) -> LabelScaler:
        return LabelScaler(np.array([self.half_ranges[k] for k in self.members]))

    def to_dict(self) -> Dict[str, Any]:
        return {"group": self.group, "members": list(self.members), "half_ranges": list(self.half_ranges)}

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "GroupSpec":
        return cls(int(doc["group"]), tuple(doc["half_ranges"]))


def default_group_specs(full: Tuple[float, ...] = FULL_HALF_RANGES) -> Dict[int, GroupSpec]:
    """
    Group 1 draws every delta from the full ranges. Group 2 narrows (x, y, θ);
    the still-uncorrected (z, α, β) keep the full ranges. Group 3 narrows
    (x, y, θ) and (α, β) and keeps z at full range.
    """
    x, y, z, th, a, b = full
    rx, ry, rth = REDUCED_IN_PLANE
    ra, rb = REDUCED_OUT_OF_PLANE
    return {
        1: GroupSpec(1, (x, y, z, th, a, b)),
        2: GroupSpec(2, (rx, ry, z, rth, a, b)),
        3: GroupSpec(3, (rx, ry, z, rth, ra, rb)),
    }
