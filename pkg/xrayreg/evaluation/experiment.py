# xrayreg/evaluation/experiment.py
"""
Experiment harness: perturbed starts around each ground-truth case, every
method run from the same starts, one row per (method, case, trial) and a
per-method summary of success rate, accuracy and running time.
"""
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from xrayreg.baseline import PowellConfig, register_intensity
from xrayreg.common.errors import InvalidParameterError, XrayRegError
from xrayreg.common.fileio import write_json
from xrayreg.drr import Image, render_drr
from xrayreg.feature import RoiSpec
from xrayreg.geometry import PARAM_NAMES, ProjectionGeometry, TransformParams, bbox_corners, bbox_diagonal
from xrayreg.regression import RegressorBank, regress_multipass
from xrayreg.volume import Volume
from .metrics import mtre_proj, threshold_for_diagonal
from .perturbation import PerturbSpec, perturbation_stream

T_INIT_COLUMNS = [f"t_init_{p}" for p in PARAM_NAMES]
T_EST_COLUMNS = [f"t_est_{p}" for p in PARAM_NAMES]
REPORT_COLUMNS = (
    ["method", "case_id", "trial_id", "seed"]
    + T_INIT_COLUMNS
    + T_EST_COLUMNS
    + ["mtreproj_mm", "success", "wall_time_s", "n_drr_evals", "error"]
)


@dataclass
class XrayCase:
    case_id: str
    t_gt: TransformParams
    xray: Image


@dataclass
class MethodOutcome:
    t_est: TransformParams
    n_drr_evals: int


@dataclass
class Method:
    """A registration method: run(case, t_init) -> MethodOutcome."""

    name: str
    run: Callable[[XrayCase, TransformParams], MethodOutcome]


@dataclass
class ExperimentReport:
    rows: pd.DataFrame
    summary: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    threshold_mm: float = 0.0


def make_xray_case(
    vol: Volume,
    t_gt: TransformParams,
    geom: ProjectionGeometry,
    noise_pct: float = 0.0,
    rng: Optional[np.random.Generator] = None,
    case_id: str = "case0",
    step: Optional[float] = None,
    threads: int = 1,
) -> XrayCase:
    """Full-frame synthetic X-ray at t_gt; optional Gaussian noise with σ given as % of the dynamic range."""
    if noise_pct < 0:
        raise InvalidParameterError(f"noise_pct must be >= 0, got {noise_pct}")
    img = render_drr(vol, t_gt, geom, step=step, threads=threads, provenance="synthetic-xray")
    if noise_pct > 0:
        rng = rng if rng is not None else np.random.default_rng(0)
        sigma = noise_pct / 100.0 * float(img.values.max() - img.values.min())
        img = Image(
            values=img.values + rng.normal(0.0, sigma, size=img.values.shape),
            pixel_spacing=img.pixel_spacing,
            provenance=img.provenance,
            offset_px=img.offset_px,
            detector_px=img.detector_px,
        )
    return XrayCase(case_id=case_id, t_gt=t_gt, xray=img)


def cnn_method(bank: RegressorBank, vol: Volume, passes: int = 3, threads: int = 1) -> Method:
    def run(case: XrayCase, t_init: TransformParams) -> MethodOutcome:
        res = regress_multipass(bank, vol, case.xray, t_init, passes=passes, threads=threads)
        return MethodOutcome(t_est=res.t_est, n_drr_evals=res.n_drr_evals)

    return Method(name=f"cnn-{passes}pass", run=run)


def intensity_method(
    kind: str,
    vol: Volume,
    geom: ProjectionGeometry,
    roi_spec: RoiSpec,
    powell: PowellConfig = PowellConfig(),
    bins: int = 32,
    step: Optional[float] = None,
    threads: int = 1,
) -> Method:
    def run(case: XrayCase, t_init: TransformParams) -> MethodOutcome:
        res = register_intensity(kind, vol, case.xray, t_init, geom, roi_spec, powell=powell, bins=bins, step=step, threads=threads)
        return MethodOutcome(t_est=res.t_est, n_drr_evals=res.n_evals)

    return Method(name=str(kind).lower(), run=run)


def oracle_method() -> Method:
    return Method(name="oracle", run=lambda case, t_init: MethodOutcome(t_est=case.t_gt, n_drr_evals=0))


def noop_method() -> Method:
    return Method(name="noop", run=lambda case, t_init: MethodOutcome(t_est=t_init, n_drr_evals=0))


def _row(method: str, case: XrayCase, trial: int, seed: int, t_init: TransformParams) -> Dict[str, Any]:
    row = {"method": method, "case_id": case.case_id, "trial_id": trial, "seed": seed}
    row.update(dict(zip(T_INIT_COLUMNS, t_init.to_list())))
    row.update({c: np.nan for c in T_EST_COLUMNS})
    row.update({"mtreproj_mm": np.nan, "success": False, "wall_time_s": np.nan, "n_drr_evals": 0, "error": ""})
    return row


def run_experiment(
    methods: Sequence[Method],
    vol: Volume,
    cases: Sequence[XrayCase],
    spec: PerturbSpec,
    geom: ProjectionGeometry,
    out_dir=None,
) -> ExperimentReport:
    """
    Trials run one after another so wall times are comparable. A trial that
    raises is recorded as a failed row and the experiment continues.
    """
    if not methods or not cases:
        raise InvalidParameterError("need at least one method and one case")
    corners = bbox_corners(vol)
    threshold = threshold_for_diagonal(bbox_diagonal(corners))
    center = vol.gravity_center
    rows: List[Dict[str, Any]] = []
    for case_index, case in enumerate(cases):
        starts = perturbation_stream(case.t_gt, spec, case_index)
        logger.info("Case {}: {} trials x {} methods", case.case_id, len(starts), len(methods))
        for trial, (seed, t_init) in enumerate(starts):
            for method in methods:
                row = _row(method.name, case, trial, seed, t_init)
                start = time.perf_counter()
                try:
                    outcome = method.run(case, t_init)
                    row["wall_time_s"] = time.perf_counter() - start
                    err = mtre_proj(outcome.t_est, case.t_gt, corners, geom, center)
                    row.update(dict(zip(T_EST_COLUMNS, outcome.t_est.to_list())))
                    row.update({"mtreproj_mm": err, "success": bool(err < threshold), "n_drr_evals": outcome.n_drr_evals})
                except Exception as e:
                    row["wall_time_s"] = time.perf_counter() - start
                    row["error"] = f"{type(e).__name__}: {e}"
                    if isinstance(e, XrayRegError):
                        logger.warning("Trial {} of {} failed for {}: {}", trial, case.case_id, method.name, e)
                    else:
                        logger.exception("Trial {} of {} crashed in {}", trial, case.case_id, method.name)
                rows.append(row)
    df = pd.DataFrame(rows, columns=REPORT_COLUMNS)
    report = ExperimentReport(rows=df, summary=summarize(df), threshold_mm=threshold)
    if out_dir is not None:
        write_report(report, out_dir)
    return report


def summarize(rows: pd.DataFrame) -> Dict[str, Dict[str, Any]]:
    """Per-method aggregates, derived from the trial rows alone."""
    summary = {}
    for method, g in rows.groupby("method", sort=False):
        ok = g[g["success"].astype(bool)]
        summary[str(method)] = {
            "n_trials": int(len(g)),
            "n_failed": int((g["error"] != "").sum()),
            "success_rate": float(len(ok) / len(g)),
            "mean_mtreproj_mm": float(ok["mtreproj_mm"].mean()) if len(ok) else None,
            "median_mtreproj_mm": float(g["mtreproj_mm"].median()) if g["mtreproj_mm"].notna().any() else None,
            "time_mean_s": float(g["wall_time_s"].mean()),
            "time_std_s": float(g["wall_time_s"].std(ddof=0)),
            "mean_drr_evals": float(g["n_drr_evals"].mean()),
        }
    return summary


def render_table(summary: Dict[str, Dict[str, Any]]) -> str:
    lines = [
        "| Method | Success Rate | Mean mTREproj (mm) | Running Time (s) |",
        "|---|---|---|---|",
    ]
    for method, s in summary.items():
        mean_err = "n/a" if s["mean_mtreproj_mm"] is None else f"{s['mean_mtreproj_mm']:.3f}"
        lines.append(
            f"| {method} | {100.0 * s['success_rate']:.1f}% | {mean_err} | {s['time_mean_s']:.2f} ± {s['time_std_s']:.2f} |"
        )
    return "\n".join(lines) + "\n"


def write_report(report: ExperimentReport, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report.rows.to_csv(out / "trials.csv", index=False)
    write_json(out / "summary.json", {"threshold_mm": report.threshold_mm, "methods": report.summary})
    (out / "summary.md").write_text(render_table(report.summary))
    logger.info("Report written to {}", out)
    return out
