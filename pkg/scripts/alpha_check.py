"""Compare the alpha correction with the simulated fraction of stolen conversions.

A start is followed by its correlated stop after t_delay; uncorrelated stops
at rate W can arrive first.  The measured loss is set against 1 - alpha for
the linear and inverse forms, with and without signal dead time.

    python3 scripts/alpha_check.py --rate 1.83e6 --delay 12.57ns
"""
import argparse

import numpy as np

from pdccal.calib import alpha_missed, gamma_deadtime
from pdccal.config import parse_time
from pdccal.electronics import AcquisitionSystem, tac_convert
from pdccal.sim import PS, apply_dead_time, poisson_process


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--rate", type=float, default=1.83e6, help="uncorrelated stop rate (1/s)")
    p.add_argument("--delay", type=parse_time, default=parse_time("12.57ns"))
    p.add_argument("--dead-time", type=parse_time, default=parse_time("31ns"))
    p.add_argument("--starts", type=float, default=2e4, help="start rate (1/s)")
    p.add_argument("--duration", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    d = round(args.delay / PS)
    sys = AcquisitionSystem("tac-valid-start", tac_range=50e-9, tac_conversion_time=1e-9)
    starts = poisson_process(args.starts, args.duration, rng)
    noise = poisson_process(args.rate, args.duration, rng)
    for label, dead in (("no dead time", 0.0), (f"dead time {args.dead_time * 1e9:g} ns", args.dead_time)):
        stops = apply_dead_time(np.union1d(starts + d, noise), dead)
        iv, n = tac_convert(starts, stops, sys)
        lost = 1 - np.count_nonzero(iv == d) / n
        print(f"{label:<22} lost {lost:.5f}   1-alpha linear {1 - alpha_missed(args.rate, args.delay):.5f}"
              f"   inverse {1 - alpha_missed(args.rate, args.delay, 'inverse'):.5f}"
              f"   1-alpha*gamma {1 - alpha_missed(args.rate, args.delay) * gamma_deadtime(args.rate, dead):.5f}")


if __name__ == "__main__":
    main()
