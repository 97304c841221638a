# xrayreg/cli/main.py
"""
Command-line entry point.

    python -m xrayreg.cli phantom  --preset plate --out runs/plate.vol.json
    python -m xrayreg.cli drr      --volume runs/plate.vol.json --params 0,0,500,0,0,0 --out runs/d.img.json
    python -m xrayreg.cli synth    --volume ... --group 1 --n-samples 2000 --out runs/data
    python -m xrayreg.cli train    --volume ... --group all --n-samples 2000 --epochs 32 --out runs/bank
    python -m xrayreg.cli register --bank runs/bank --volume ... --xray ... --init ... --passes 3 --out runs/reg
    python -m xrayreg.cli baseline --volume ... --xray ... --init ... --method mi+gc --out runs/base
    python -m xrayreg.cli evaluate --volume ... --bank runs/bank --method cnn --method gc --n-perturb 50 --out runs/eval
    python -m xrayreg.cli inspect  --volume ... --params ... --out runs/inspect

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""
import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from xrayreg.baseline import INTENSITY_METHODS, PowellConfig, register_intensity
from xrayreg.common import config
from xrayreg.common.errors import UsageError, XrayRegError
from xrayreg.common.fileio import write_json
from xrayreg.drr import Image, export_pgm, load_image, render_drr, save_image
from xrayreg.evaluation import (
    PerturbSpec,
    cnn_method,
    intensity_method,
    make_xray_case,
    render_table,
    run_experiment,
)
from xrayreg.feature import RoiSpec, compute_roi, default_roi_spec, extract_patch, feature_residual, roi_footprint, standardize_patch
from xrayreg.geometry import GEOMETRY_PRESETS, ProjectionGeometry, TransformParams, load_geometry, parse_params
from xrayreg.nn import TrainConfig
from xrayreg.regression import (
    GROUP_ORDER,
    RegressorBank,
    ZoneGrid,
    default_group_specs,
    regress_multipass,
    synthesize_dataset,
    train_bank,
    zone_of,
)
from xrayreg.volume import load_volume, make_phantom, phantom_preset, save_volume

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

DESK_PATCH = "52x100"


@dataclass
class RunConfig:
    """Everything a subcommand ran with; echoed to effective_config.json."""

    command: str
    seed: int
    threads: int
    paths: Dict[str, Optional[str]] = field(default_factory=dict)
    geometry: Optional[ProjectionGeometry] = None
    roi_spec: Optional[RoiSpec] = None
    zone_grid: Optional[ZoneGrid] = None
    train_config: Optional[TrainConfig] = None
    perturb: Optional[PerturbSpec] = None
    options: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {"command": self.command, "seed": self.seed, "threads": self.threads, "paths": self.paths}
        for name in ("geometry", "roi_spec", "zone_grid", "train_config", "perturb"):
            value = getattr(self, name)
            if value is not None:
                doc[name] = value.to_dict()
        doc["options"] = self.options
        return doc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _pair(text: str, sep: str, kind) -> Tuple[Any, Any]:
    parts = text.lower().split(sep)
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two values separated by {sep!r}, got {text!r}")
    try:
        return kind(parts[0]), kind(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid value {text!r}") from None


def grid_dims(text: str) -> Tuple[int, int]:
    return _pair(text, "x", int)


def angle_pair(text: str) -> Tuple[float, float]:
    return _pair(text, ",", float)


def params_arg(text: str) -> TransformParams:
    try:
        return parse_params(text)
    except XrayRegError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", required=True, help="Output file or directory")
    p.add_argument("--seed", type=int, default=0, help="Seed for every random draw")
    p.add_argument("--threads", type=int, default=config.THREADS, help="Worker threads (outputs do not depend on it)")
    p.add_argument("--log-level", default=config.LOG_LEVEL)
    p.add_argument("--log-file", default=None, help="Also write a DEBUG log to this file")


def _add_geometry(p: argparse.ArgumentParser) -> None:
    p.add_argument("--geom", default=None, help="Geometry JSON (D_mm, det_px, pixel_spacing_mm, principal_point_px)")
    p.add_argument("--geom-preset", choices=sorted(GEOMETRY_PRESETS), default="desk")
    p.add_argument("--step", type=float, default=None, help="Ray integration step in mm (default half the smallest voxel spacing)")


def _add_training(p: argparse.ArgumentParser) -> None:
    p.add_argument("--zone-grid", type=grid_dims, default=(1, 1), metavar="RxC")
    p.add_argument("--zone-span", type=angle_pair, default=(10.0, 10.0), metavar="A,B", help="Grid covers [-A, A] x [-B, B] degrees")
    p.add_argument("--zone", type=grid_dims, default=None, metavar="IxJ", help="Only this zone (default: all)")
    p.add_argument("--group", choices=["1", "2", "3", "all"], default="all")
    p.add_argument("--n-samples", type=int, default=2000)
    p.add_argument("--patch", type=grid_dims, default=grid_dims(DESK_PATCH), metavar="RxC")
    p.add_argument("--roi-margin", type=float, default=1.2, help="ROI size as a multiple of the object's x/y extent")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="xrayreg", description="2-D/3-D rigid registration by ROI-feature CNN regression")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("phantom", help="Write a synthetic phantom volume")
    _add_common(p)
    p.add_argument("--preset", choices=["plate", "cube", "spheres"], default="plate")
    p.add_argument("--spacing", type=float, default=1.0)

    p = sub.add_parser("drr", help="Render a DRR")
    _add_common(p)
    _add_geometry(p)
    p.add_argument("--volume", required=True)
    p.add_argument("--params", type=params_arg, required=True, help="tx,ty,tz,theta,alpha,beta (mm, degrees); use --params=-1,... for a negative first value")
    p.add_argument("--pgm", action="store_true", help="Also write an 8-bit PGM preview")

    p = sub.add_parser("synth", help="Synthesize training sets")
    _add_common(p)
    _add_geometry(p)
    _add_training(p)
    p.add_argument("--volume", required=True)

    p = sub.add_parser("train", help="Train a regressor bank")
    _add_common(p)
    _add_geometry(p)
    _add_training(p)
    p.add_argument("--volume", required=True)
    p.add_argument("--epochs", type=int, default=32)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--dataset", default=None, help="Dataset root to reuse (or populate)")

    p = sub.add_parser("register", help="Register an X-ray with a trained bank")
    _add_common(p)
    p.add_argument("--bank", required=True)
    p.add_argument("--volume", required=True)
    p.add_argument("--xray", required=True)
    p.add_argument("--init", type=params_arg, required=True)
    p.add_argument("--passes", type=int, default=3)

    p = sub.add_parser("baseline", help="Intensity-based registration with Powell's method")
    _add_common(p)
    _add_geometry(p)
    p.add_argument("--volume", required=True)
    p.add_argument("--xray", required=True)
    p.add_argument("--init", type=params_arg, required=True)
    p.add_argument("--method", choices=list(INTENSITY_METHODS), default="mi+gc")
    p.add_argument("--patch", type=grid_dims, default=grid_dims(DESK_PATCH), metavar="RxC")
    p.add_argument("--roi-margin", type=float, default=1.2)
    p.add_argument("--bins", type=int, default=32)

    p = sub.add_parser("evaluate", help="Perturbation experiment with a success-rate / timing report")
    _add_common(p)
    _add_geometry(p)
    p.add_argument("--volume", required=True)
    p.add_argument("--bank", default=None, help="Required for --method cnn")
    p.add_argument("--method", action="append", choices=["cnn", *INTENSITY_METHODS], default=None)
    p.add_argument("--params", type=params_arg, default=parse_params("0,0,500,0,0,0"), help="Ground-truth pose")
    p.add_argument("--n-perturb", type=int, default=140)
    p.add_argument("--perturb-scale", type=float, default=1.0, help="Multiplier on the default perturbation stds")
    p.add_argument("--noise-pct", type=float, default=0.0)
    p.add_argument("--passes", type=int, default=3)
    p.add_argument("--patch", type=grid_dims, default=grid_dims(DESK_PATCH), metavar="RxC")
    p.add_argument("--roi-margin", type=float, default=1.2)

    p = sub.add_parser("inspect", help="Dump the DRR, ROI patches and residual feature as PGM images")
    _add_common(p)
    _add_geometry(p)
    p.add_argument("--volume", required=True)
    p.add_argument("--params", type=params_arg, required=True)
    p.add_argument("--xray", default=None, help="Observed image (default: DRR at --params)")
    p.add_argument("--patch", type=grid_dims, default=grid_dims(DESK_PATCH), metavar="RxC")
    p.add_argument("--roi-margin", type=float, default=1.2)
    return parser


def _geometry(args) -> ProjectionGeometry:
    return load_geometry(args.geom) if args.geom else GEOMETRY_PRESETS[args.geom_preset]


def _roi_spec(args, vol) -> RoiSpec:
    rows, cols = args.patch
    return default_roi_spec(vol, margin=args.roi_margin, patch_rows=rows, patch_cols=cols)


def _zone_grid(args) -> ZoneGrid:
    (n_a, n_b), (s_a, s_b) = args.zone_grid, args.zone_span
    return ZoneGrid.from_span(n_a, n_b, s_a, s_b)


def _zones(args, grid: ZoneGrid) -> List[Tuple[int, int]]:
    if args.zone is None:
        return list(grid.zones())
    i, j = args.zone
    if not (0 <= i < grid.n_alpha and 0 <= j < grid.n_beta):
        raise UsageError(f"zone {args.zone} is outside the {grid.n_alpha}x{grid.n_beta} grid")
    return [(i, j)]


def _groups(args) -> List[int]:
    return list(GROUP_ORDER) if args.group == "all" else [int(args.group)]


def _region_list(region) -> List[int]:
    return [region.col0, region.row0, region.width, region.height]


def _out_dir(args) -> Path:
    """Directory the effective config goes to: --out itself, or its parent for file outputs."""
    out = Path(args.out)
    return out.parent if out.name.endswith(".json") else out


def cmd_phantom(args, run: RunConfig) -> None:
    spec = phantom_preset(args.preset, spacing=args.spacing)
    save_volume(make_phantom(spec), args.out)
    run.options["phantom"] = spec.to_dict()


def cmd_drr(args, run: RunConfig) -> None:
    vol = load_volume(args.volume)
    run.geometry = _geometry(args)
    img = render_drr(vol, args.params, run.geometry, step=args.step, threads=args.threads)
    path = save_image(img, args.out)
    if args.pgm:
        export_pgm(img, path.with_name(path.name.replace(".img.json", "") + ".pgm"))
    run.options.update({"params": args.params.to_list(), "step_mm": args.step})


def cmd_synth(args, run: RunConfig) -> None:
    vol = load_volume(args.volume)
    run.geometry, run.roi_spec, run.zone_grid = _geometry(args), _roi_spec(args, vol), _zone_grid(args)
    specs = default_group_specs()
    for zone in _zones(args, run.zone_grid):
        for g in _groups(args):
            synthesize_dataset(
                vol, run.geometry, run.roi_spec, run.zone_grid, zone, specs[g], args.n_samples, args.seed,
                out_dir=Path(args.out) / f"zone_{zone[0]}_{zone[1]}_group_{g}", step=args.step, threads=args.threads,
            )
    run.options.update({"groups": _groups(args), "n_samples": args.n_samples, "step_mm": args.step})


def cmd_train(args, run: RunConfig) -> None:
    vol = load_volume(args.volume)
    run.geometry, run.roi_spec, run.zone_grid = _geometry(args), _roi_spec(args, vol), _zone_grid(args)
    run.train_config = TrainConfig(epochs=args.epochs, batch_size=args.batch_size, seed=args.seed)
    bank = train_bank(
        vol, run.geometry, run.roi_spec, run.zone_grid, _zones(args, run.zone_grid), _groups(args),
        run.train_config, args.n_samples, seed=args.seed, step=args.step,
        out_dir=args.out, dataset_root=args.dataset, threads=args.threads,
    )
    run.options.update({
        "groups": _groups(args),
        "n_samples": args.n_samples,
        "step_mm": args.step,
        "final_loss": {f"zone_{z[0]}_{z[1]}_group_{g}": m.meta["loss_trace"][-1] for (z, g), m in sorted(bank.models.items())},
    })


def cmd_register(args, run: RunConfig) -> None:
    bank = RegressorBank.load(args.bank)
    vol = load_volume(args.volume)
    xray = load_image(args.xray)
    run.geometry, run.roi_spec, run.zone_grid = bank.geometry, bank.roi_spec, bank.grid
    result = regress_multipass(bank, vol, xray, args.init, passes=args.passes, threads=args.threads)
    write_json(Path(args.out) / "result.json", {
        "t_init": args.init.to_list(),
        "t_est": result.t_est.to_list(),
        "passes": args.passes,
        "zone": list(zone_of(args.init.t_alpha, args.init.t_beta, bank.grid)),
        "trajectory": [t.to_list() for t in result.trajectory],
        "steps": [s.to_dict() for s in result.steps],
        "n_drr_evals": result.n_drr_evals,
    })
    run.options.update({"init": args.init.to_list(), "passes": args.passes})
    logger.info("Registered: {}", np.round(result.t_est.as_array(), 4).tolist())


def cmd_baseline(args, run: RunConfig) -> None:
    vol = load_volume(args.volume)
    xray = load_image(args.xray)
    run.geometry, run.roi_spec = _geometry(args), _roi_spec(args, vol)
    powell = PowellConfig()
    res = register_intensity(
        args.method, vol, xray, args.init, run.geometry, run.roi_spec,
        powell=powell, bins=args.bins, step=args.step, threads=args.threads,
    )
    write_json(Path(args.out) / "result.json", {
        "method": args.method,
        "t_init": args.init.to_list(),
        "t_est": res.t_est.to_list(),
        "n_evals": res.n_evals,
        "stage_evals": res.stage_evals,
        "wall_time_s": res.wall_time_s,
    })
    run.options.update({"method": args.method, "init": args.init.to_list(), "bins": args.bins, "powell": powell.to_dict()})


def _bank_step(args, bank: Optional[RegressorBank]) -> Optional[float]:
    """Ray step for rendering next to a bank: the bank's own unless --step overrides it."""
    if bank is None or bank.step is None:
        return args.step
    if args.step is None:
        return bank.step
    if args.step != bank.step:
        logger.warning("--step {} mm differs from the {} mm the bank was trained with", args.step, bank.step)
    return args.step


def cmd_evaluate(args, run: RunConfig) -> None:
    methods_wanted = args.method or ["cnn"]
    if "cnn" in methods_wanted and not args.bank:
        raise UsageError("--method cnn needs --bank")
    vol = load_volume(args.volume)
    bank = RegressorBank.load(args.bank) if args.bank else None
    step = _bank_step(args, bank)
    run.geometry = bank.geometry if bank else _geometry(args)
    run.roi_spec = bank.roi_spec if bank else _roi_spec(args, vol)
    run.perturb = PerturbSpec(count=args.n_perturb, seed=args.seed).scaled(args.perturb_scale)
    methods = []
    for name in methods_wanted:
        if name == "cnn":
            methods.append(cnn_method(bank, vol, passes=args.passes, threads=args.threads))
        else:
            methods.append(intensity_method(name, vol, run.geometry, run.roi_spec, step=step, threads=args.threads))
    case = make_xray_case(
        vol, args.params, run.geometry, noise_pct=args.noise_pct,
        rng=np.random.default_rng(args.seed), step=step, threads=args.threads,
    )
    report = run_experiment(methods, vol, [case], run.perturb, run.geometry, out_dir=args.out)
    run.options.update({
        "methods": methods_wanted, "t_gt": args.params.to_list(), "noise_pct": args.noise_pct,
        "passes": args.passes, "step_mm": step,
    })
    sys.stdout.write(render_table(report.summary))


def cmd_inspect(args, run: RunConfig) -> None:
    vol = load_volume(args.volume)
    run.geometry, run.roi_spec = _geometry(args), _roi_spec(args, vol)
    out = Path(args.out)
    drr = render_drr(vol, args.params, run.geometry, step=args.step, threads=args.threads)
    xray = load_image(args.xray) if args.xray else drr
    roi = compute_roi(args.params, run.geometry, run.roi_spec)
    feature = feature_residual(args.params, xray, vol, run.geometry, run.roi_spec, step=args.step, threads=args.threads)

    def as_image(values: np.ndarray) -> Image:
        return Image(values=values, pixel_spacing=run.geometry.pixel_spacing, provenance="patch")

    export_pgm(drr, out / "drr.pgm")
    export_pgm(as_image(standardize_patch(extract_patch(drr, roi, run.roi_spec, run.geometry)).values), out / "patch_drr.pgm")
    export_pgm(as_image(standardize_patch(extract_patch(xray, roi, run.roi_spec, run.geometry)).values), out / "patch_xray.pgm")
    export_pgm(Image(values=feature.values, pixel_spacing=run.geometry.pixel_spacing, provenance="feature"), out / "feature.pgm")
    write_json(out / "roi.json", {
        "roi": roi.to_dict(),
        "footprint_px": _region_list(roi_footprint(roi, run.geometry)),
        "feature_norm": float(np.linalg.norm(feature.values)),
        "out_of_field": feature.out_of_field,
    })
    run.options["params"] = args.params.to_list()


COMMANDS = {
    "phantom": cmd_phantom,
    "drr": cmd_drr,
    "synth": cmd_synth,
    "train": cmd_train,
    "register": cmd_register,
    "baseline": cmd_baseline,
    "evaluate": cmd_evaluate,
    "inspect": cmd_inspect,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"{e}\n")
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return int(e.code or 0)

    config.configure_logging(args.log_level, args.log_file)
    run = RunConfig(
        command=args.command,
        seed=args.seed,
        threads=args.threads,
        paths={k: getattr(args, k, None) for k in ("volume", "xray", "bank", "dataset", "geom", "out")},
    )
    try:
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        COMMANDS[args.command](args, run)
        write_json(_out_dir(args) / "effective_config.json", run.to_dict())
    except UsageError as e:
        logger.error("{}", e)
        return EXIT_USAGE
    except (XrayRegError, OSError) as e:
        logger.error("{} failed: {}", args.command, e)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
