"""Closed-form distortion lower bounds next to exact distortions of small maps."""

import argparse
from dataclasses import dataclass

import numpy as np

from heatcube.cube import CubeFunction, NormSpec
from heatcube.embeddings import (BoundInputs, distortion, edge_antipodal_ratio, lower_bound_ivv,
                                 lower_bound_main, sharp_example, sweep_p)
from heatcube.fourier import random_function


@dataclass
class TableConfig:
    sizes: tuple = ((3, 1), (6, 2), (9, 3), (10, 2), (12, 4))
    p: float = 1.0
    seed: int = 0


def table(cfg: TableConfig):
    rng = np.random.default_rng(cfg.seed)
    out = []
    for n, d in cfg.sizes:
        norm = NormSpec.lp(cfg.p, d)
        b = BoundInputs(n, d, cfg.p)
        sharp = sharp_example(n, d) if (n // d) % 2 else None
        rand = random_function(n, d, rng)
        out.append({
            "n": n, "d": d,
            "main": lower_bound_main(b), "ivv": lower_bound_ivv(b),
            "main_best_p": sweep_p(lower_bound_main, b)[0],
            "sharp_ratio": edge_antipodal_ratio(sharp, norm) if sharp else float("nan"),
            "random_distortion": distortion(rand, norm).distortion,
        })
    n = max(s[0] for s in cfg.sizes)
    ident = distortion(CubeFunction.identity(min(n, 10)), NormSpec.lp(2.0))
    return out, ident.distortion


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rows, ident = table(TableConfig(p=args.p, seed=args.seed))
    keys = list(rows[0])
    print(" ".join(f"{k:>17}" for k in keys))
    for r in rows:
        print(" ".join(f"{r[k]:>17.4f}" if isinstance(r[k], float) else f"{r[k]:>17}" for k in keys))
    print(f"identity into l_2 (n=10): distortion {ident:.4f}")


if __name__ == "__main__":
    main()
