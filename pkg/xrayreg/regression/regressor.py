# xrayreg/regression/regressor.py
"""
Hierarchical application of the regressor bank: groups (x, y, θ), then
(α, β), then z, each from a feature recomputed at the already-updated pose.
"""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from loguru import logger

from xrayreg.common.errors import CoverageError, InvalidParameterError
from xrayreg.drr import Image
from xrayreg.feature import Roi, feature_residual
from xrayreg.geometry import TransformParams
from xrayreg.volume import Volume
from .bank import RegressorBank
from .groups import GROUP_MEMBERS, GROUP_ORDER
from .zones import Zone, zone_of


@dataclass
class GroupStep:
    pass_index: int
    group: int
    zone: Zone
    t_before: TransformParams
    roi: Roi
    feature_norm: float
    delta: np.ndarray
    out_of_field: bool = False

    def to_dict(self):
        return {
            "pass": self.pass_index,
            "group": self.group,
            "zone": list(self.zone),
            "t_before": self.t_before.to_list(),
            "roi": self.roi.to_dict(),
            "feature_norm": self.feature_norm,
            "delta": self.delta.tolist(),
            "out_of_field": self.out_of_field,
        }


@dataclass
class MultipassResult:
    t_est: TransformParams
    trajectory: List[TransformParams] = field(default_factory=list)
    steps: List[GroupStep] = field(default_factory=list)
    n_drr_evals: int = 0


def _check_coverage(bank: RegressorBank, zone: Zone) -> None:
    for g in GROUP_ORDER:
        if (zone, g) not in bank.models:
            raise CoverageError(zone, g)


def regress_once(
    bank: RegressorBank,
    vol: Volume,
    xray: Image,
    t_init: TransformParams,
    steps: Optional[List[GroupStep]] = None,
    pass_index: int = 0,
    threads: int = 1,
) -> TransformParams:
    """
    One pass through the three groups. The zone is chosen from t_init and kept
    for the whole pass. Applied group steps are appended to steps when given.
    """
    zone = zone_of(t_init.t_alpha, t_init.t_beta, bank.grid)
    _check_coverage(bank, zone)
    t = t_init
    for g in GROUP_ORDER:
        feature = feature_residual(t, xray, vol, bank.geometry, bank.roi_spec, step=bank.step, threads=threads)
        delta = bank.get(zone, g).predict(feature)
        full = np.zeros(6)
        full[list(GROUP_MEMBERS[g])] = delta
        if steps is not None:
            steps.append(GroupStep(
                pass_index=pass_index,
                group=g,
                zone=zone,
                t_before=t,
                roi=feature.roi,
                feature_norm=float(np.linalg.norm(feature.values)),
                delta=delta,
                out_of_field=feature.out_of_field,
            ))
        if feature.out_of_field:
            logger.warning("ROI leaves the detector at group {} (pass {})", g, pass_index)
        t = t + full
        logger.debug("pass {} group {} zone {} delta {}", pass_index, g, zone, np.round(delta, 4).tolist())
    return t


def regress_multipass(
    bank: RegressorBank,
    vol: Volume,
    xray: Image,
    t_init: TransformParams,
    passes: int = 3,
    threads: int = 1,
) -> MultipassResult:
    """Repeat regress_once, re-dispatching the zone from each pass's start pose."""
    if passes < 1:
        raise InvalidParameterError(f"passes must be >= 1, got {passes}")
    result = MultipassResult(t_est=t_init)
    t = t_init
    for p in range(passes):
        t = regress_once(bank, vol, xray, t, steps=result.steps, pass_index=p, threads=threads)
        result.trajectory.append(t)
        result.n_drr_evals += len(GROUP_ORDER)
    result.t_est = t
    return result
