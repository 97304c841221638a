# xrayreg/nn/labels.py
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from xrayreg.common.errors import InvalidParameterError


@dataclass(frozen=True, eq=False)
class LabelScaler:
    """Maps parameter deltas (mm, degrees) to [−1, 1] by their training half-ranges."""

    half_ranges: np.ndarray

    def __post_init__(self):
        hr = np.asarray(self.half_ranges, dtype=np.float64)
        if hr.ndim != 1 or np.any(hr <= 0):
            raise InvalidParameterError(f"half-ranges must be positive, got {self.half_ranges}")
        object.__setattr__(self, "half_ranges", hr)

    def normalize(self, delta) -> np.ndarray:
        return np.asarray(delta, dtype=np.float64) / self.half_ranges

    def denormalize(self, y) -> np.ndarray:
        return np.asarray(y, dtype=np.float64) * self.half_ranges

    def to_list(self) -> Sequence[float]:
        return self.half_ranges.tolist()
