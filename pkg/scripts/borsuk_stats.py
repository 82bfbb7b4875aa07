"""How far the antipodal face search goes before it finds a witness."""

import argparse
import time
from collections import Counter
from dataclasses import dataclass

import numpy as np

from heatcube.cube import NormSpec
from heatcube.fourier import random_function, walsh_transform
from heatcube.topology import find_antipodal_zero, restricted_poincare_check


@dataclass
class StatsConfig:
    n: int = 7
    range_dim: int = 3
    trials: int = 40
    p: float = 2.0
    seed: int = 0


def run(cfg: StatsConfig):
    seqs = np.random.SeedSequence(cfg.seed).spawn(cfg.trials)
    faces = Counter()
    ratios, resid = [], []
    start = time.perf_counter()
    for s in seqs:
        f = random_function(cfg.n, cfg.range_dim, np.random.default_rng(s))
        w = find_antipodal_zero(walsh_transform(f), cfg.range_dim)
        rep = restricted_poincare_check(f, w, cfg.p, NormSpec.lp(cfg.p, cfg.range_dim))
        faces[w.faces_examined] += 1
        ratios.append(rep.ratio / rep.constant_budget)
        resid.append(w.residual)
    return faces, max(ratios), max(resid), time.perf_counter() - start


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=7)
    ap.add_argument("--range-dim", type=int, default=3)
    ap.add_argument("--trials", type=int, default=40)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cfg = StatsConfig(n=args.n, range_dim=args.range_dim, trials=args.trials, seed=args.seed)
    faces, worst, res, secs = run(cfg)
    print("faces examined -> count")
    for k in sorted(faces):
        print(f"{k:>6} {faces[k]:>6}")
    print(f"worst lhs/(budget*rhs): {worst:.4f}, worst residual {res:.2e}, {secs:.2f}s")


if __name__ == "__main__":
    main()
