# xrayreg/regression/synthesis.py
"""
Training-set synthesis per (zone, group): random (t, δt) pairs, a synthetic
X-ray rendered at t + δt, and the residual feature at t.
"""
import hashlib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np
from loguru import logger

from xrayreg.common.errors import FormatError, InvalidParameterError
from xrayreg.common.fileio import config_hash, read_blob, read_json, require, write_blob, write_json
from xrayreg.common.parallel import gather_ordered
from xrayreg.drr import render_drr
from xrayreg.feature import Feature, RoiSpec, compute_roi, feature_residual, roi_footprint
from xrayreg.geometry import ProjectionGeometry, TransformParams
from xrayreg.volume import Volume
from .groups import GroupSpec
from .zones import Zone, ZoneGrid


@dataclass(frozen=True)
class NominalSpec:
    """Distribution of t outside the zone constraint on (α, β)."""

    x_half: float = 10.0
    y_half: float = 10.0
    z_min: float = 400.0
    z_max: float = 600.0
    theta_half: float = 30.0

    def __post_init__(self):
        if min(self.x_half, self.y_half, self.theta_half) < 0 or not (0 < self.z_min <= self.z_max):
            raise InvalidParameterError(f"invalid nominal ranges {self}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "NominalSpec":
        return cls(**doc)


def draw_params(rng: np.random.Generator, grid: ZoneGrid, zone: Zone, nominal: NominalSpec) -> TransformParams:
    (a0, a1), (b0, b1) = grid.bounds(zone)
    return TransformParams(
        t_x=rng.uniform(-nominal.x_half, nominal.x_half),
        t_y=rng.uniform(-nominal.y_half, nominal.y_half),
        t_z=rng.uniform(nominal.z_min, nominal.z_max),
        t_theta=rng.uniform(-nominal.theta_half, nominal.theta_half),
        t_alpha=rng.uniform(a0, a1),
        t_beta=rng.uniform(b0, b1),
    )


def draw_delta(rng: np.random.Generator, group: GroupSpec) -> np.ndarray:
    hr = np.asarray(group.half_ranges)
    return rng.uniform(-hr, hr)


def synthesize_sample(
    vol: Volume,
    geom: ProjectionGeometry,
    spec: RoiSpec,
    grid: ZoneGrid,
    zone: Zone,
    group: GroupSpec,
    rng: np.random.Generator,
    nominal: NominalSpec = NominalSpec(),
    delta: Optional[np.ndarray] = None,
    step: Optional[float] = None,
) -> Tuple[Feature, np.ndarray]:
    """
    One training pair: X(t, I_{t+δt}) and the normalized group components of δt.
    Passing delta overrides the random δt draw (t is still drawn).
    """
    t = draw_params(rng, grid, zone, nominal)
    d = draw_delta(rng, group) if delta is None else np.asarray(delta, dtype=float)
    t_moved = t + d
    region = roi_footprint(compute_roi(t, geom, spec), geom)
    xray = render_drr(vol, t_moved, geom, region=region, step=step, provenance="synthetic-xray")
    feature = feature_residual(t, xray, vol, geom, spec, step=step)
    label = group.scaler().normalize(d[list(group.members)])
    return feature, label


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    manifest: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return self.features.shape[0]


def sample_rng(seed: int, zone: Zone, group: int, index: int) -> np.random.Generator:
    """Independent stream per sample, so output does not depend on generation order."""
    return np.random.default_rng([seed, zone[0], zone[1], group, index])


def synthesize_dataset(
    vol: Volume,
    geom: ProjectionGeometry,
    spec: RoiSpec,
    grid: ZoneGrid,
    zone: Zone,
    group: GroupSpec,
    n_samples: int,
    seed: int,
    out_dir=None,
    nominal: NominalSpec = NominalSpec(),
    step: Optional[float] = None,
    threads: int = 1,
) -> Dataset:
    if n_samples < 1:
        raise InvalidParameterError("n_samples must be >= 1")
    logger.info("Synthesizing {} samples for zone {} group {} (seed {})", n_samples, zone, group.group, seed)

    def make(index: int):
        return synthesize_sample(vol, geom, spec, grid, zone, group, sample_rng(seed, zone, group.group, index), nominal, step=step)

    pairs = gather_ordered(make, range(n_samples), threads)
    features = np.stack([f.values for f, _ in pairs]).astype(np.float32)
    labels = np.stack([y for _, y in pairs])
    synth_config = {
        "geometry": geom.to_dict(),
        "roi_spec": spec.to_dict(),
        "zone_grid": grid.to_dict(),
        "group_spec": group.to_dict(),
        "nominal": nominal.to_dict(),
        "step_mm": step,
        "volume": {"dims": list(vol.dims), "spacing_mm": list(vol.spacing), "data_sha256": _volume_digest(vol)},
    }
    manifest = {
        "zone": list(zone),
        "group": group.group,
        "seed": seed,
        "n": n_samples,
        "rows": spec.patch_rows,
        "cols": spec.patch_cols,
        "n_out": group.n_out,
        "label_half_ranges": group.scaler().to_list(),
        "out_of_field": int(sum(f.out_of_field for f, _ in pairs)),
        "spec_hash": config_hash(synth_config),
        "config": synth_config,
    }
    dataset = Dataset(features=features, labels=labels, manifest=manifest)
    if out_dir is not None:
        save_dataset(dataset, out_dir)
    return dataset


def _volume_digest(vol: Volume) -> str:
    return hashlib.sha256(vol.data.tobytes()).hexdigest()


def save_dataset(dataset: Dataset, out_dir) -> Path:
    out = Path(out_dir)
    write_blob(out / "features.f32", dataset.features.ravel(), "f32le")
    write_blob(out / "labels.f64", dataset.labels.ravel(), "f64le")
    doc = dict(dataset.manifest)
    doc.update({"features_file": "features.f32", "labels_file": "labels.f64"})
    write_json(out / "manifest.json", doc)
    logger.info("Dataset written to {}", out)
    return out


def load_dataset(out_dir) -> Dataset:
    out = Path(out_dir)
    doc = read_json(out / "manifest.json")
    n = require(doc, "n", int)
    rows = require(doc, "rows", int)
    cols = require(doc, "cols", int)
    n_out = require(doc, "n_out", int)
    if n < 1:
        raise FormatError("n", "dataset must hold at least one sample")
    feats = read_blob(out / require(doc, "features_file", str), "f32le", n * rows * cols, field="features_file")
    labels = read_blob(out / require(doc, "labels_file", str), "f64le", n * n_out, field="labels_file")
    return Dataset(features=feats.reshape(n, rows, cols), labels=labels.reshape(n, n_out), manifest=doc)
