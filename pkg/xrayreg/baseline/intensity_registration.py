# xrayreg/baseline/intensity_registration.py
"""
Intensity-based 2-D/3-D registration: Powell over the six pose parameters,
scoring the ROI patch of the DRR against the same ROI of the X-ray.
"""
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Union

import numpy as np
from loguru import logger

from xrayreg.common.errors import InvalidParameterError
from xrayreg.drr import Image, render_drr
from xrayreg.feature import RoiSpec, compute_roi, extract_patch, roi_footprint
from xrayreg.geometry import ProjectionGeometry, TransformParams
from xrayreg.volume import Volume
from .powell import PowellConfig, powell_optimize
from .similarity import DEFAULT_BINS, SimilarityKind, similarity, worst_objective

INTENSITY_METHODS = ("mi", "gc", "mi+gc")


@dataclass
class IntensityResult:
    t_est: TransformParams
    n_evals: int
    wall_time_s: float
    stage_evals: Dict[str, int] = field(default_factory=dict)
    stage_results: List[TransformParams] = field(default_factory=list)


def make_objective(
    kind: SimilarityKind,
    vol: Volume,
    xray: Image,
    geom: ProjectionGeometry,
    roi_spec: RoiSpec,
    bins: int = DEFAULT_BINS,
    step: Optional[float] = None,
    threads: int = 1,
):
    """objective(t_vec) = −similarity(H^t(DRR_t), H^t(xray)); one DRR render per call."""
    worst = worst_objective(kind)

    def objective(vec: np.ndarray) -> float:
        t = TransformParams.from_array(vec)
        if not (0.0 < t.t_z < geom.D):
            return worst
        roi = compute_roi(t, geom, roi_spec)
        drr = render_drr(vol, t, geom, region=roi_footprint(roi, geom), step=step, threads=threads)
        moving = extract_patch(drr, roi, roi_spec, geom)
        fixed = extract_patch(xray, roi, roi_spec, geom)
        return -similarity(kind, moving, fixed, bins)

    return objective


def register_intensity(
    method: Union[str, SimilarityKind],
    vol: Volume,
    xray: Image,
    t_init: TransformParams,
    geom: ProjectionGeometry,
    roi_spec: RoiSpec,
    powell: PowellConfig = PowellConfig(),
    bins: int = DEFAULT_BINS,
    step: Optional[float] = None,
    threads: int = 1,
) -> IntensityResult:
    """
    Run Powell with MI, with GC, or MI then GC restarted from the MI result.
    Every objective evaluation renders one DRR, so n_evals is the render count.
    """
    method = method.value if isinstance(method, SimilarityKind) else str(method).lower()
    if method not in INTENSITY_METHODS:
        raise InvalidParameterError(f"unknown intensity method {method!r}; expected one of {INTENSITY_METHODS}")
    geom.check_pose(t_init)
    stages = [SimilarityKind.MI, SimilarityKind.GC] if method == "mi+gc" else [SimilarityKind(method)]

    start = time.perf_counter()
    result = IntensityResult(t_est=t_init, n_evals=0, wall_time_s=0.0)
    t = t_init
    for kind in stages:
        objective = make_objective(kind, vol, xray, geom, roi_spec, bins=bins, step=step, threads=threads)
        res = powell_optimize(objective, t.as_array(), powell)
        t = TransformParams.from_array(res.x)
        result.stage_evals[kind.value] = res.n_evals
        result.stage_results.append(t)
        result.n_evals += res.n_evals
        logger.debug("{} stage: {} evals, {} iterations ({}), f={:.6g}", kind.value, res.n_evals, res.n_iter, res.message, res.fun)
    result.t_est = t
    result.wall_time_s = time.perf_counter() - start
    return result
