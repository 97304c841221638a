# xrayreg/feature/residual.py
from typing import Optional

from xrayreg.drr import Image, render_drr
from xrayreg.geometry import ProjectionGeometry, TransformParams
from xrayreg.volume import Volume
from .patch import Feature, extract_patch, patch_residual, standardize_patch
from .roi import RoiSpec, compute_roi, roi_footprint


def feature_residual(
    t: TransformParams,
    xray: Image,
    vol: Volume,
    geom: ProjectionGeometry,
    spec: RoiSpec,
    step: Optional[float] = None,
    threads: int = 1,
) -> Feature:
    """X(t, I) = H^t(DRR_t) − H^t(I), both patches standardized before the difference."""
    roi = compute_roi(t, geom, spec)
    drr = render_drr(vol, t, geom, region=roi_footprint(roi, geom), step=step, threads=threads)
    moving = standardize_patch(extract_patch(drr, roi, spec, geom))
    fixed = standardize_patch(extract_patch(xray, roi, spec, geom))
    return Feature(
        values=patch_residual(moving, fixed),
        t=t,
        roi=roi,
        out_of_field=moving.out_of_field or fixed.out_of_field,
    )
