"""Closed-loop recovery study: repeat simulate -> acquire -> estimate over many seeds.

    python3 scripts/closed_loop.py --seeds 100
    python3 scripts/closed_loop.py --seeds 50 --trigger-efficiency-scale 0.5
"""
import argparse
import time
from dataclasses import replace

import numpy as np

from pdccal.config import load_config
from pdccal.pipeline import closed_loop


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config", default="paper-desk-scale")
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--first-seed", type=int, default=0)
    p.add_argument("--trigger-efficiency-scale", type=float, default=1.0)
    p.add_argument("--background", choices=["independent", "same-realization"], default="independent")
    args = p.parse_args()

    cfg = load_config(args.config)
    if args.trigger_efficiency_scale != 1.0:
        arm = cfg.experiment.trigger_arm
        arm = replace(arm, efficiency=arm.efficiency * args.trigger_efficiency_scale)
        cfg = replace(cfg, experiment=replace(cfg.experiment, trigger_arm=arm))
    truth = cfg.experiment.signal_arm.efficiency

    start = time.perf_counter()
    s = closed_loop(cfg, range(args.first_seed, args.first_seed + args.seeds), args.background)
    elapsed = time.perf_counter() - start

    print(f"{args.seeds} seeds in {elapsed:.1f} s, true eta = {truth}")
    print(f"{'system':<20}{'mean eta':>10}{'spread':>9}{'sigma':>9}{'pull sd':>9}{'in 3 sigma':>12}{'errors':>8}")
    for name in s.eta:
        eta, sig = np.array(s.eta[name]), np.array(s.sigma[name])
        pull = (eta - truth) / sig
        print(f"{name:<20}{eta.mean():10.4f}{eta.std(ddof=1):9.4f}{np.median(sig):9.4f}"
              f"{pull.std(ddof=1):9.2f}{s.within(name, truth):>8d}/{len(eta):<3d}{s.errors[name]:>8d}")


if __name__ == "__main__":
    main()
