"""Growth of the biased Pisier ratio with the cube dimension.

Prints, for each n, the largest lhs/rhs and lhs/((log n + 1) rhs) over a
batch of random maps. The constants in these inequalities are not explicit,
so the point is to watch the log-corrected column stay flat.
"""

import argparse
import math
from dataclasses import dataclass

import numpy as np

from heatcube.cube import NormSpec
from heatcube.fourier import random_function
from heatcube.functionals import pisier_report


@dataclass
class SweepConfig:
    n_max: int = 9
    d: int = 2
    p: float = 2.0
    alpha: float = 0.2
    batch: int = 20
    mode: str = "lp"
    seed: int = 0


def sweep(cfg: SweepConfig):
    rows = []
    norm = NormSpec.lp(2.0, cfg.d)
    for n in range(1, cfg.n_max + 1):
        rng = np.random.default_rng([cfg.seed, n])
        reps = [pisier_report(random_function(n, cfg.d, rng), cfg.alpha, cfg.p, norm, cfg.mode)
                for _ in range(cfg.batch)]
        rows.append((n, max(r.ratio for r in reps), max(r.extras["ratio_over_log"] for r in reps)))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=9)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--alpha", type=float, default=0.2)
    ap.add_argument("--mode", choices=("lp", "orlicz"), default="lp")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cfg = SweepConfig(n_max=args.n_max, p=args.p, alpha=args.alpha, mode=args.mode, seed=args.seed)
    print(f"{'n':>3} {'max ratio':>12} {'max ratio/log':>14}")
    for n, r, rl in sweep(cfg):
        print(f"{n:>3} {r:12.4f} {rl:14.4f}")
    print(f"(log factor at n_max: {math.log(cfg.n_max) + 1:.3f})")


if __name__ == "__main__":
    main()
