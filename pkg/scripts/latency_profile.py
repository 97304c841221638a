# scripts/latency_profile.py
"""
Wall-time profile of CNN regression against Powell+GC on the same perturbed starts.

    python scripts/latency_profile.py --volume runs/plate.vol.json --bank runs/bank --n-perturb 50

Reports p50/p95/p99 and the coefficient of variation (std/mean) per method:
CNN registration runs a fixed number of DRRs per trial, Powell does not.
"""
import argparse
import sys
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger

from xrayreg.common import config
from xrayreg.common.errors import XrayRegError
from xrayreg.evaluation import PerturbSpec, cnn_method, intensity_method, make_xray_case, run_experiment
from xrayreg.geometry import parse_params
from xrayreg.regression import RegressorBank
from xrayreg.volume import load_volume


def profile(rows: pd.DataFrame) -> pd.DataFrame:
    g = rows.groupby("method")["wall_time_s"]
    out = pd.DataFrame({
        "p50": g.quantile(0.50),
        "p95": g.quantile(0.95),
        "p99": g.quantile(0.99),
        "mean": g.mean(),
        "std": g.std(ddof=0),
    })
    out["cv"] = out["std"] / out["mean"]
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--volume", required=True)
    parser.add_argument("--bank", required=True)
    parser.add_argument("--params", default="0,0,500,0,0,0", help="Ground-truth pose")
    parser.add_argument("--n-perturb", type=int, default=50)
    parser.add_argument("--perturb-scale", type=float, default=0.5)
    parser.add_argument("--passes", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out", default=str(Path(config.DATA_DIR) / "latency"), help="Report directory")
    args = parser.parse_args(argv)
    config.configure_logging(config.LOG_LEVEL)

    try:
        vol = load_volume(args.volume)
        bank = RegressorBank.load(args.bank)
        case = make_xray_case(vol, parse_params(args.params), bank.geometry, threads=args.threads)
        methods = [
            cnn_method(bank, vol, passes=args.passes, threads=args.threads),
            intensity_method("gc", vol, bank.geometry, bank.roi_spec, step=bank.step, threads=args.threads),
        ]
        spec = PerturbSpec(count=args.n_perturb, seed=args.seed).scaled(args.perturb_scale)
        report = run_experiment(methods, vol, [case], spec, bank.geometry, out_dir=args.out)
    except XrayRegError as e:
        logger.error("Profiling failed: {}", e)
        return 2

    table = profile(report.rows)
    logger.info("Wall time per registration (s):\n{}", table.round(4).to_string())
    for method, cv in table["cv"].items():
        logger.info("{}: std/mean = {:.1%}", method, cv if np.isfinite(cv) else float("nan"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
