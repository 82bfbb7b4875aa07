"""Batch front-end: ``python -m heatcube <subcommand> [options]``.

Every subcommand writes one JSON document ``{config, results, residuals,
verdict}`` (CSV flattens ``results`` only). Exit status is 0 when every
checked contract holds, 1 on a violation and 2 on a configuration error.
Per-trial random streams are spawned from the master seed, so a report
depends only on the configuration, never on the worker count.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .cube import BiasVector, CubeFunction, NormSpec, ProductMeasure, WeightVector
from .embeddings import (BoundInputs, antipodal_edge_extremes, distortion, edge_antipodal_ratio,
                         lower_bound_ivv, lower_bound_main, lower_bound_ole, sharp_example,
                         snowflake_bound, sweep_p)
from .fourier import random_function, walsh_transform
from .functionals import (MetricSpec, enflo_functional, metric_stable_functional, pisier_report,
                          poincare_functional, stable_weak_functional)
from .heatflow import (CubePoint, kernel_matrix, mc_semigroup, semigroup_apply,
                       verify_identity)
from .topology import (BudgetExhausted, find_antipodal_zero, main_inequality_chain,
                       restricted_poincare_check)

DEFAULT_SEED = 20240601
WORKERS_ENV = "HEATCUBE_WORKERS"
IDENTITY_RTOL = 1e-10
LAW_TOL = 1e-11


class ConfigError(ValueError):
    pass


# --- helpers -------------------------------------------------------------------


def _trial_rngs(seed: int, trials: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]


def _draw_f(cfg: dict, n: int, d: int, rng) -> CubeFunction:
    return random_function(n, d, rng, cfg.get("fourier_sparse"))


def _draw_bias(cfg: dict, n: int, rng) -> BiasVector:
    raw = cfg.get("alpha")
    if raw in (None, "random"):
        return BiasVector(tuple(rng.uniform(0.05, 0.95, n)))
    vals = [float(v) for v in str(raw).split(",")]
    if len(vals) == 1:
        return BiasVector.constant(vals[0], n)
    if len(vals) != n:
        raise ConfigError(f"--alpha needs 1 or {n} values")
    return BiasVector(tuple(vals))


def _draw_q(cfg: dict, rng) -> float:
    if cfg.get("q") is not None:
        return float(cfg["q"])
    if cfg.get("t") is not None:
        return math.exp(-float(cfg["t"]))
    return float(rng.uniform(0.05, 0.95))


def _draw_thetas(cfg: dict, bias: BiasVector, q: float, rng):
    raw = cfg.get("theta") or "star"
    if raw == "star":
        return None
    if raw == "random":
        return rng.uniform(0.0, q, bias.n)
    return np.full(bias.n, float(raw))


def _norm_for(p: float, d: int) -> NormSpec:
    return NormSpec.lp(p, d)


def _map(fn, jobs, workers: int):
    if workers <= 1:
        return [fn(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*jobs)))


def _max_finite(values):
    vals = [v for v in values if v is not None]
    return max(vals) if vals else 0.0


# --- trial bodies (module level so they pickle) --------------------------------


def _identity_trial(cfg, k, rng):
    n, d = cfg["n"], cfg["d"]
    f = _draw_f(cfg, n, d, rng)
    bias = _draw_bias(cfg, n, rng)
    q = _draw_q(cfg, rng)
    thetas = _draw_thetas(cfg, bias, q, rng)
    resid = verify_identity(f, bias, q, thetas)
    bound = IDENTITY_RTOL * (1.0 + float(np.abs(f.values).max()))
    row = {"trial": k, "n": n, "d": d, "q": q, "residual": resid, "bound": bound,
           "ok": resid <= bound}
    if not row["ok"]:
        row["instance"] = {"f": f.values.tolist(), "alpha": list(bias.alphas),
                           "thetas": None if thetas is None else list(thetas)}
    return row


def _semigroup_trial(cfg, k, rng):
    n, d = cfg["n"], cfg["d"]
    f = _draw_f(cfg, n, d, rng)
    bias = _draw_bias(cfg, n, rng)
    q1, q2 = _draw_q(cfg, rng), float(rng.uniform(0.05, 0.95))
    two = semigroup_apply(semigroup_apply(f, bias, q1), bias, q2).values
    one = semigroup_apply(f, bias, q1 * q2).values
    mu = ProductMeasure(bias).weights()
    comp = float(np.abs(two - one).max())
    stat = float(np.abs(mu @ semigroup_apply(f, bias, q1).values - mu @ f.values).max())
    flow = mu[:, None] * kernel_matrix(bias, q1)
    balance = float(np.abs(flow - flow.T).max())
    ok = max(comp, stat, balance) <= LAW_TOL
    return {"trial": k, "n": n, "q1": q1, "q2": q2, "composition": comp,
            "stationarity": stat, "detailed_balance": balance, "ok": ok}


def _poincare_trial(cfg, k, rng):
    n, d, p = cfg["n"], cfg["d"], cfg["p"]
    f = _draw_f(cfg, n, d, rng)
    bias = _draw_bias(cfg, n, rng)
    rep = poincare_functional(f, bias, p, _norm_for(p, d), cfg["tp"])
    return {"trial": k, "n": n, "d": d, **rep.as_dict(), "ok": bool(rep.holds)}


def _pisier_trial(cfg, k, rng):
    n, d, p = cfg["n"], cfg["d"], cfg["p"]
    f = _draw_f(cfg, n, d, rng)
    alpha = float(cfg["alpha"]) if cfg.get("alpha") not in (None, "random") \
        else float(rng.uniform(0.05, 0.95))
    rep = pisier_report(f, alpha, p, _norm_for(p, d), cfg["mode"])
    ok = math.isfinite(rep.ratio) and math.isfinite(rep.extras["ratio_over_log"])
    return {"trial": k, "n": n, "d": d, **rep.as_dict(), "ok": ok}


def _enflo_trial(cfg, k, rng):
    n, d, p = cfg["n"], cfg["d"], cfg["p"]
    f = _draw_f(cfg, n, d, rng)
    rep = enflo_functional(f, p, _norm_for(p, d))
    return {"trial": k, "n": n, "d": d, **rep.as_dict(),
            "ok": rep.lhs <= rep.rhs * (1 + 1e-12)}


def _stable_trial(cfg, k, rng):
    n, d, p = cfg["n"], cfg["d"], cfg["p"]
    norm_p = cfg.get("norm_p") or 2.0
    norm = _norm_for(norm_p, d)
    f = _draw_f(cfg, n, d, rng)
    rep = metric_stable_functional(f, p, MetricSpec.from_norm(norm))
    row = {"trial": k, "n": n, "d": d, **rep.as_dict()}
    row["ok"] = rep.rhs <= rep.extras["rhs_strong"] * (1 + 1e-12)
    if 1 <= p < 2:
        vecs = rng.uniform(-1, 1, (n, d))
        row["linear_stable_ratio"] = stable_weak_functional(vecs, p, norm).ratio
    return row


def _borsuk_trial(cfg, k, rng):
    n, r, p = cfg["n"], cfg["range_dim"], cfg["p"]
    f = _draw_f(cfg, n, r, rng)
    norm = _norm_for(p, r)
    row = {"trial": k, "n": n, "range_dim": r}
    try:
        w = find_antipodal_zero(walsh_transform(f), r, tol=cfg["tol"])
    except BudgetExhausted as exc:
        return {**row, "ok": False, "error": str(exc), "instance": {"f": f.values.tolist()}}
    rep = restricted_poincare_check(f, w, p, norm, cfg["tp"])
    chain = main_inequality_chain(f, w, p, norm, cfg["tp"])
    row.update({"z": w.z.tolist(), "residual": w.residual, "faces_examined": w.faces_examined,
                "face_free": w.face.free, "face_fixed": w.face.fixed_signs,
                "bias": None if w.bias is None else list(w.bias.alphas),
                "on_complex": w.on_complex(r), "restricted_poincare": rep.as_dict(),
                "chain": {key: chain[key] for key in ("antipodal", "centred", "bound")}})
    row["ok"] = bool(w.residual <= cfg["tol"] and row["on_complex"] and rep.holds)
    return row


def _simulate_trial(cfg, k, rng):
    n, d = cfg["n"], cfg["d"]
    f = _draw_f(cfg, n, d, rng)
    bias = _draw_bias(cfg, n, rng)
    q = _draw_q(cfg, rng)
    x = CubePoint(n, int(rng.integers(1 << n)))
    est, se = mc_semigroup(f, bias, q, x, cfg["samples"], rng)
    exact = semigroup_apply(f, bias, q).values[x.mask]
    err = np.abs(est - exact)
    within = bool(np.all(err <= 4 * se + 1e-12))
    return {"trial": k, "n": n, "q": q, "x": x.mask, "estimate": est.tolist(),
            "exact": exact.tolist(), "stderr": se.tolist(), "within_4se": within}


# --- subcommands ----------------------------------------------------------------


def _run_trials(cfg, body):
    rngs = _trial_rngs(cfg["seed"], cfg["trials"])
    jobs = [(cfg, k, rng) for k, rng in enumerate(rngs)]
    return _map(body, jobs, cfg["workers"])


def cmd_verify_identity(cfg):
    rows = _run_trials(cfg, _identity_trial)
    resid = {"max_residual": _max_finite(r["residual"] for r in rows)}
    return rows, resid, all(r["ok"] for r in rows)


def cmd_semigroup(cfg):
    rows = _run_trials(cfg, _semigroup_trial)
    resid = {key: _max_finite(r[key] for r in rows)
             for key in ("composition", "stationarity", "detailed_balance")}
    return rows, resid, all(r["ok"] for r in rows)


def cmd_poincare(cfg):
    rows = _run_trials(cfg, _poincare_trial)
    return rows, {"max_ratio": _max_finite(r["ratio"] for r in rows)}, all(r["ok"] for r in rows)


def cmd_pisier(cfg):
    rows = _run_trials(cfg, _pisier_trial)
    resid = {"max_ratio": _max_finite(r["ratio"] for r in rows),
             "max_ratio_over_log": _max_finite(r["ratio_over_log"] for r in rows)}
    return rows, resid, all(r["ok"] for r in rows)


def cmd_enflo(cfg):
    rows = _run_trials(cfg, _enflo_trial)
    return rows, {"max_ratio": _max_finite(r["ratio"] for r in rows)}, all(r["ok"] for r in rows)


def cmd_stable_type(cfg):
    rows = _run_trials(cfg, _stable_trial)
    resid = {"max_stable_lower_bound": _max_finite(r["stable_lower_bound"] for r in rows)}
    return rows, resid, all(r["ok"] for r in rows)


def cmd_borsuk(cfg):
    rows = _run_trials(cfg, _borsuk_trial)
    resid = {"max_residual": _max_finite(r.get("residual") for r in rows)}
    return rows, resid, all(r["ok"] for r in rows)


def cmd_simulate(cfg):
    rows = _run_trials(cfg, _simulate_trial)
    frac = float(np.mean([r["within_4se"] for r in rows]))
    return rows, {"fraction_within_4se": frac}, frac >= 0.95


def cmd_distortion(cfg):
    n, d, p = cfg["n"], cfg["d"], cfg["p"]
    kind = "sharp" if cfg.get("sharp") else cfg["map"]
    if kind == "sharp":
        f = sharp_example(n, d)
    elif kind == "identity":
        f = CubeFunction.identity(n)
        d = n
    else:
        f = random_function(n, d, np.random.default_rng(cfg["seed"]), cfg.get("fourier_sparse"))
    norm = _norm_for(p, f.d)
    weights = WeightVector(tuple(cfg["weights"])) if cfg.get("weights") else None
    rep = distortion(f, norm, weights, cfg.get("snowflake") or 1.0)
    amin, emax = antipodal_edge_extremes(f, norm)
    b = BoundInputs(n, f.d, p, cfg["tp"], Sp=cfg.get("sp"), theta=cfg.get("snowflake"))
    bounds = {"main": lower_bound_main(b), "ivv": lower_bound_ivv(b),
              "main_sup_over_p": sweep_p(lower_bound_main, b)[0]}
    if b.Sp is not None:
        bounds["ole"] = lower_bound_ole(b)
    if b.theta is not None:
        bounds["snowflake"] = snowflake_bound(b)
    result = {"map": kind, "n": n, "d": f.d, "p": p, **rep.as_dict(),
              "edge_antipodal_ratio": edge_antipodal_ratio(f, norm),
              "antipodal_min": amin, "edge_max": emax, "bounds": bounds}
    target = bounds["snowflake"] if b.theta is not None else bounds["main"]
    # the bounds are only claimed for the unweighted cube into l_p^d with T_p = 1
    sound = weights is not None or rep.distortion >= target - 1e-9
    result["ok"] = bool(sound)
    return [result], {"distortion": rep.distortion}, sound


COMMANDS = {
    "verify-identity": cmd_verify_identity,
    "semigroup": cmd_semigroup,
    "poincare": cmd_poincare,
    "pisier": cmd_pisier,
    "enflo": cmd_enflo,
    "stable-type": cmd_stable_type,
    "borsuk": cmd_borsuk,
    "distortion": cmd_distortion,
    "simulate": cmd_simulate,
}


# --- argument parsing -------------------------------------------------------------


def _theta_arg(value: str):
    if value in ("star", "random"):
        return value
    try:
        float(value)
    except ValueError:
        raise argparse.ArgumentTypeError("theta must be 'star', 'random' or a number")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heatcube",
                                     description="Exact checks of hypercube heat-flow inequalities.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=6)
    common.add_argument("--d", type=int, default=2)
    common.add_argument("--p", type=float, default=2.0)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--trials", type=int, default=20)
    common.add_argument("--tol", type=float, default=1e-8)
    common.add_argument("--tp", type=float, default=1.0, help="type constant used as budget")
    common.add_argument("--alpha", default=None, help="'random', one bias, or a comma list")
    time_group = common.add_mutually_exclusive_group()
    time_group.add_argument("--q", type=float, default=None, help="exp(-t)")
    time_group.add_argument("--t", type=float, default=None)
    common.add_argument("--theta", type=_theta_arg, default="star")
    common.add_argument("--fourier-sparse", type=int, default=None)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", default=None, help="report path (stdout if omitted)")
    common.add_argument("--no-meta", action="store_true", help="omit timestamps")
    common.add_argument("--workers", type=int, default=None,
                        help=f"worker processes (default from ${WORKERS_ENV} or 1)")

    sub.add_parser("verify-identity", parents=[common])
    sub.add_parser("semigroup", parents=[common])
    sub.add_parser("poincare", parents=[common])
    pis = sub.add_parser("pisier", parents=[common])
    pis.add_argument("--mode", choices=("lp", "orlicz"), default="lp")
    sub.add_parser("enflo", parents=[common])
    st = sub.add_parser("stable-type", parents=[common])
    st.add_argument("--norm-p", type=float, default=2.0)
    bor = sub.add_parser("borsuk", parents=[common])
    bor.add_argument("--range-dim", type=int, default=2)
    dis = sub.add_parser("distortion", parents=[common])
    dis.add_argument("--map", choices=("sharp", "identity", "random"), default="random")
    dis.add_argument("--sharp", action="store_true")
    dis.add_argument("--snowflake", type=float, default=None)
    dis.add_argument("--sp", type=float, default=None)
    dis.add_argument("--weights", type=lambda s: [float(v) for v in s.split(",")], default=None)
    sim = sub.add_parser("simulate", parents=[common])
    sim.add_argument("--samples", type=int, default=10_000)
    return parser


def _validate(cfg: dict) -> None:
    cmd = cfg["command"]
    if cfg["n"] < 1 or cfg["trials"] < 1:
        raise ConfigError("--n and --trials must be positive")
    if cmd in ("verify-identity", "semigroup", "poincare", "pisier", "simulate") and cfg["n"] > 12:
        raise ConfigError("--n must be at most 12 for exhaustive evaluation")
    if cmd == "distortion" and cfg["n"] > 14:
        raise ConfigError("--n must be at most 14 for the pair scan")
    if cfg["d"] < 1:
        raise ConfigError("--d must be positive")
    if cfg.get("q") is not None and not 0 < cfg["q"] < 1:
        raise ConfigError("--q must lie in (0, 1)")
    if cfg.get("t") is not None and not cfg["t"] > 0:
        raise ConfigError("--t must be positive")
    if cmd in ("poincare", "enflo", "borsuk", "distortion") and not 1 <= cfg["p"] <= 2:
        raise ConfigError("--p must lie in [1, 2]")
    if cmd == "pisier" and cfg["p"] < 1:
        raise ConfigError("--p must be >= 1")
    if cmd == "stable-type" and not 0 < cfg["p"] < 2:
        raise ConfigError("--p must lie in (0, 2)")
    if cmd == "borsuk" and not 1 <= cfg["range_dim"] < cfg["n"]:
        raise ConfigError("--range-dim must lie in [1, n)")
    if cmd == "distortion":
        kind = "sharp" if cfg.get("sharp") else cfg["map"]
        if kind == "sharp" and (cfg["n"] % cfg["d"] or (cfg["n"] // cfg["d"]) % 2 == 0):
            raise ConfigError("sharp example needs d | n with n/d odd")
        if cfg.get("weights") and len(cfg["weights"]) != cfg["n"]:
            raise ConfigError("--weights needs n entries")
        if cfg.get("snowflake") is not None and not 0 < cfg["snowflake"] < 1:
            raise ConfigError("--snowflake must lie in (0, 1)")
    if cfg.get("alpha") not in (None, "random"):
        try:
            vals = [float(v) for v in str(cfg["alpha"]).split(",")]
        except ValueError:
            raise ConfigError("--alpha must be numeric")
        if any(not 0 < v < 1 for v in vals):
            raise ConfigError("--alpha values must lie in (0, 1)")
        if cmd == "pisier" and len(vals) != 1:
            raise ConfigError("pisier takes a single scalar --alpha")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else ("-inf" if v < 0 else "nan"))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"
    rows = [{k: (json.dumps(_jsonable(v)) if isinstance(v, (dict, list)) else _jsonable(v))
             for k, v in r.items()} for r in report["results"]]
    keys = sorted({k for r in rows for k in r})
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = vars(args).copy()
    if cfg["workers"] is None:
        cfg["workers"] = int(os.environ.get(WORKERS_ENV, "1"))
    try:
        _validate(cfg)
        results, residuals, ok = COMMANDS[cfg["command"]](cfg)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    echo = {k: v for k, v in cfg.items() if k not in ("output", "format", "workers", "no_meta")}
    report = {"config": echo, "results": results, "residuals": residuals,
              "verdict": "pass" if ok else "fail"}
    if not ok:
        report["violations"] = [r for r in results if not r.get("ok", r.get("within_4se", True))]
    if not cfg["no_meta"]:
        report["meta"] = {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z")}
    text = _render(report, cfg["format"])
    if cfg["output"]:
        with open(cfg["output"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
