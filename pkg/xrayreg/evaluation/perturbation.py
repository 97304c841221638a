# xrayreg/evaluation/perturbation.py
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Tuple

import numpy as np

from xrayreg.common.errors import InvalidParameterError
from xrayreg.geometry import TransformParams

EVAL_STDS = (1.0, 1.0, 10.0, 2.0, 10.0, 10.0)


@dataclass(frozen=True)
class PerturbSpec:
    """Zero-mean Gaussian start-pose perturbations around the ground truth."""

    stds: Tuple[float, ...] = EVAL_STDS
    count: int = 140
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "stds", tuple(float(s) for s in self.stds))
        if len(self.stds) != 6 or any(s < 0 for s in self.stds):
            raise InvalidParameterError(f"need six non-negative standard deviations, got {self.stds}")
        if self.count < 1:
            raise InvalidParameterError(f"perturbation count must be >= 1, got {self.count}")

    def scaled(self, factor: float) -> "PerturbSpec":
        return PerturbSpec(stds=tuple(factor * s for s in self.stds), count=self.count, seed=self.seed)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "PerturbSpec":
        return cls(stds=tuple(doc["stds"]), count=int(doc["count"]), seed=int(doc["seed"]))


def perturb(t_gt: TransformParams, spec: PerturbSpec, rng: np.random.Generator) -> TransformParams:
    return t_gt + rng.normal(0.0, 1.0, size=6) * np.asarray(spec.stds)


def trial_seed(seed: int, case_index: int, trial_index: int) -> int:
    return int(np.random.SeedSequence([seed, case_index, trial_index]).generate_state(1)[0])


def perturbation_stream(t_gt: TransformParams, spec: PerturbSpec, case_index: int = 0) -> List[Tuple[int, TransformParams]]:
    """(seed, t_init) per trial; every method of an experiment is started from this same list."""
    out = []
    for k in range(spec.count):
        s = trial_seed(spec.seed, case_index, k)
        out.append((s, perturb(t_gt, spec, np.random.default_rng(s))))
    return out
