# xrayreg/regression/bank.py
"""
Trained regressors per (zone, group) and their on-disk layout:

    <bank>/manifest.json                       geometry, ROI spec, zone grid, groups, models
    <bank>/zone_<i>_<j>_group_<g>.f64          weights, Network parameter order
"""
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Tuple

import numpy as np
from loguru import logger

from xrayreg.common.errors import CoverageError, DivergenceError, FormatError
from xrayreg.common.fileio import read_json, require, write_json
from xrayreg.feature import RoiSpec
from xrayreg.geometry import ProjectionGeometry
from xrayreg.nn import LabelScaler, Network, NetworkSpec, TrainConfig, forward, read_weights, train, write_weights, xavier_init
from xrayreg.nn.model_io import LAYER_ORDER
from xrayreg.volume import Volume
from .groups import GroupSpec, default_group_specs
from .synthesis import NominalSpec, load_dataset, synthesize_dataset
from .zones import Zone, ZoneGrid


@dataclass
class RegressorModel:
    net: Network
    scaler: LabelScaler
    zone: Zone
    group: int
    meta: Dict[str, Any] = field(default_factory=dict)

    def predict(self, feature) -> np.ndarray:
        """Parameter update for the group's members, in mm / degrees."""
        return self.scaler.denormalize(forward(self.net, feature))


@dataclass
class RegressorBank:
    grid: ZoneGrid
    roi_spec: RoiSpec
    geometry: ProjectionGeometry
    groups: Dict[int, GroupSpec]
    models: Dict[Tuple[Zone, int], RegressorModel] = field(default_factory=dict)
    step: Optional[float] = None
    nominal: NominalSpec = NominalSpec()

    def get(self, zone: Zone, group: int) -> RegressorModel:
        try:
            return self.models[(tuple(zone), group)]
        except KeyError:
            raise CoverageError(tuple(zone), group) from None

    def add(self, model: RegressorModel) -> None:
        self.models[(tuple(model.zone), model.group)] = model

    def save(self, out_dir) -> Path:
        out = Path(out_dir)
        entries = []
        for (zone, group), model in sorted(self.models.items()):
            blob = f"zone_{zone[0]}_{zone[1]}_group_{group}.f64"
            write_weights(model.net, out / blob)
            entries.append({
                "zone": list(zone),
                "group": group,
                "weights_file": blob,
                "architecture": model.net.spec.to_dict(),
                "n_params": model.net.n_params(),
                "label_half_ranges": model.scaler.to_list(),
                **model.meta,
            })
        write_json(out / "manifest.json", {
            "layer_order": LAYER_ORDER,
            "dtype": "f64le",
            "geometry": self.geometry.to_dict(),
            "roi_spec": self.roi_spec.to_dict(),
            "zone_grid": self.grid.to_dict(),
            "groups": {str(g): spec.to_dict() for g, spec in sorted(self.groups.items())},
            "nominal": self.nominal.to_dict(),
            "step_mm": self.step,
            "models": entries,
        })
        logger.info("Saved regressor bank with {} models to {}", len(entries), out)
        return out

    @classmethod
    def load(cls, out_dir) -> "RegressorBank":
        out = Path(out_dir)
        doc = read_json(out / "manifest.json")
        try:
            bank = cls(
                grid=ZoneGrid.from_dict(require(doc, "zone_grid", dict)),
                roi_spec=RoiSpec.from_dict(require(doc, "roi_spec", dict)),
                geometry=ProjectionGeometry.from_dict(require(doc, "geometry", dict)),
                groups={int(g): GroupSpec.from_dict(s) for g, s in require(doc, "groups", dict).items()},
                step=doc.get("step_mm"),
                nominal=NominalSpec.from_dict(doc.get("nominal", {})),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError("manifest", str(e)) from e
        for i, entry in enumerate(require(doc, "models", list)):
            bank.add(_load_model(out, i, entry))
        return bank


_MODEL_KEYS = ("zone", "group", "weights_file", "architecture", "n_params", "label_half_ranges")


def _load_model(out: Path, i: int, entry: Any) -> RegressorModel:
    where = f"models[{i}]"
    if not isinstance(entry, dict):
        raise FormatError(where, "expected an object")
    try:
        zone = tuple(int(v) for v in require(entry, "zone", int, length=2))
        group = int(require(entry, "group", int))
        spec = NetworkSpec.from_dict(require(entry, "architecture", dict))
        net = read_weights(spec, out / require(entry, "weights_file", str))
        scaler = LabelScaler(np.asarray(require(entry, "label_half_ranges", list), dtype=float))
    except FormatError as e:
        raise FormatError(f"{where}.{e.field}", str(e).split(": ", 1)[-1]) from e
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(where, str(e)) from e
    if scaler.half_ranges.size != spec.n_out:
        raise FormatError(f"{where}.label_half_ranges", f"{scaler.half_ranges.size} constants for {spec.n_out} outputs")
    meta = {k: v for k, v in entry.items() if k not in _MODEL_KEYS}
    return RegressorModel(net=net, scaler=scaler, zone=zone, group=group, meta=meta)


def model_seed(seed: int, zone: Zone, group: int) -> int:
    return int(np.random.SeedSequence([seed, zone[0], zone[1], group]).generate_state(1)[0])


def train_bank(
    vol: Volume,
    geom: ProjectionGeometry,
    roi_spec: RoiSpec,
    grid: ZoneGrid,
    zones: Iterable[Zone],
    groups: Iterable[int],
    train_config: TrainConfig,
    n_samples: int,
    seed: int = 0,
    group_specs: Optional[Dict[int, GroupSpec]] = None,
    net_overrides: Optional[Dict[str, Any]] = None,
    nominal: NominalSpec = NominalSpec(),
    step: Optional[float] = None,
    out_dir=None,
    dataset_root=None,
    threads: int = 1,
) -> RegressorBank:
    """
    Synthesize (or reuse from dataset_root) a training set and train one
    Network per (zone, group). The bank is written to out_dir when given.
    """
    group_specs = group_specs or default_group_specs()
    bank = RegressorBank(grid=grid, roi_spec=roi_spec, geometry=geom, groups=group_specs, step=step, nominal=nominal)
    for zone in zones:
        for g in groups:
            gspec = group_specs[g]
            data_dir = Path(dataset_root) / f"zone_{zone[0]}_{zone[1]}_group_{g}" if dataset_root else None
            if data_dir is not None and (data_dir / "manifest.json").exists():
                dataset = load_dataset(data_dir)
                logger.info("Reusing dataset {}", data_dir)
            else:
                dataset = synthesize_dataset(
                    vol, geom, roi_spec, grid, zone, gspec, n_samples, seed,
                    out_dir=data_dir, nominal=nominal, step=step, threads=threads,
                )
            spec = NetworkSpec(input_rows=roi_spec.patch_rows, input_cols=roi_spec.patch_cols, n_out=gspec.n_out, **(net_overrides or {}))
            init_seed = model_seed(seed, zone, g)
            net = xavier_init(Network(spec), init_seed)
            cfg = replace(train_config, seed=init_seed)
            context = f"zone {zone} group {g}"
            try:
                result = train(net, dataset.features, dataset.labels, cfg, threads=threads, context=context)
            except DivergenceError:
                logger.error("Training diverged for {}", context)
                raise
            bank.add(RegressorModel(
                net=result.net,
                scaler=gspec.scaler(),
                zone=zone,
                group=g,
                meta={"seed": init_seed, "train_config": cfg.to_dict(), "loss_trace": result.loss_trace, "n_samples": len(dataset)},
            ))
    if out_dir is not None:
        bank.save(out_dir)
    return bank
