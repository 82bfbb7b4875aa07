"""Bi-Lipschitz distortion of explicit maps and closed-form distortion lower bounds.

The lower bounds carry explicit constants: the factor ``2 pi`` from the
biased Poincaré route is applied to the Rademacher type bounds, and every
bound is clamped at 1 since distortion never drops below it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cube import CubeFunction, NormSpec, WeightVector, lp_norm, sign_table, weak_lp_norm

P_GRID = np.round(np.arange(1.0, 2.0 + 1e-9, 0.05), 10)


@dataclass
class DistortionReport:
    lip: float
    colip: float
    argmax: tuple
    argmin: tuple

    @property
    def distortion(self) -> float:
        if self.colip == 0:
            return math.inf
        return self.lip / self.colip

    def as_dict(self) -> dict:
        return {"lip": self.lip, "colip": self.colip, "distortion": self.distortion,
                "argmax": list(self.argmax), "argmin": list(self.argmin)}


def distortion(f: CubeFunction, norm: NormSpec, w: WeightVector | None = None,
               theta: float = 1.0, chunk: int = 256) -> DistortionReport:
    """Exact sup and inf of ``|f(x) - f(y)| / rho_w(x, y)^theta`` over pairs ``x < y``.

    Ties resolve to the lexicographically smallest pair. Pairs at zero
    weighted distance (possible when some ``w_i = 0``) are skipped.
    """
    n = f.n
    if n > 14:
        raise ValueError("pair scan limited to n <= 14")
    if not 0 < theta <= 1:
        raise ValueError("snowflake exponent must lie in (0, 1]")
    w = w or WeightVector.ones(n)
    if w.n != n:
        raise ValueError("weight vector dimension mismatch")
    rho_of = w.mask_weights() ** theta
    N = 1 << n
    idx = np.arange(N)
    lip, colip = -math.inf, math.inf
    amax = amin = (0, 0)
    for lo in range(0, N, chunk):
        xs = idx[lo: lo + chunk]
        diffs = f.values[xs][:, None, :] - f.values[None, :, :]
        dist = norm(diffs)
        rho = rho_of[xs[:, None] ^ idx[None, :]]
        valid = (idx[None, :] > xs[:, None]) & (rho > 0)
        if not valid.any():
            continue
        ratio = np.where(valid, dist / np.where(valid, rho, 1.0), np.nan)
        k = int(np.nanargmax(ratio))
        if ratio.flat[k] > lip:
            lip = float(ratio.flat[k])
            amax = (int(xs[k // N]), int(k % N))
        k = int(np.nanargmin(ratio))
        if ratio.flat[k] < colip:
            colip = float(ratio.flat[k])
            amin = (int(xs[k // N]), int(k % N))
    return DistortionReport(lip, colip, amax, amin)


@dataclass
class BoundInputs:
    n: int
    d: int
    p: float = 2.0
    Tp: float = 1.0
    Sp: float | None = None
    S: float | None = None
    w: WeightVector | None = None
    theta: float | None = None

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be positive")
        if not 1 <= self.p <= 2:
            raise ValueError("p must lie in [1, 2]")
        for name in ("Tp", "Sp", "S"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if self.theta is not None and not 0 < self.theta < 1:
            raise ValueError("snowflake exponent must lie in (0, 1)")


def _clamp(x: float) -> float:
    return max(1.0, x)


def lower_bound_main(b: BoundInputs) -> float:
    """``n / (2 pi Tp min(n, d)^(1/p))``: from ``n^p <= (2 pi Tp)^p d D^p``."""
    return _clamp(b.n / (2 * math.pi * b.Tp * min(b.n, b.d) ** (1.0 / b.p)))


def lower_bound_ole(b: BoundInputs) -> float:
    """``n / (Sp min(n, d)^(1/p))`` for a ``p``-uniformly smooth target."""
    if b.Sp is None:
        raise ValueError("smoothness constant Sp is required")
    return _clamp(b.n / (b.Sp * min(b.n, b.d) ** (1.0 / b.p)))


def lower_bound_ivv(b: BoundInputs) -> float:
    """Dimension-free ``n^(1 - 1/p) / (2 pi Tp)``."""
    return _clamp(b.n ** (1.0 - 1.0 / b.p) / (2 * math.pi * b.Tp))


def lower_bound_weighted(b: BoundInputs) -> float:
    """``|w|_1 / (S |w|_{p,inf})`` for weighted cubes into metric stable type ``p`` targets."""
    if b.w is None or b.S is None:
        raise ValueError("weights w and metric stable type constant S are required")
    if math.isinf(b.S):
        return 1.0
    w = b.w.as_array()
    weak = float(weak_lp_norm(w, b.p))
    if weak == 0:
        return 1.0
    return _clamp(float(lp_norm(w, 1.0)) / (b.S * weak))


def enflo_weighted_bound(b: BoundInputs) -> float:
    """``|w|_1 / |w|_p``, the weighted bound available from Enflo type alone."""
    if b.w is None:
        raise ValueError("weights w are required")
    w = b.w.as_array()
    strong = float(lp_norm(w, b.p))
    return _clamp(float(lp_norm(w, 1.0)) / strong) if strong > 0 else 1.0


def snowflake_bound(b: BoundInputs) -> float:
    """``n^theta / (2 pi Tp min(n, d)^(1/p))`` for the ``theta``-snowflake."""
    if b.theta is None:
        raise ValueError("snowflake exponent theta is required")
    return _clamp(b.n ** b.theta / (2 * math.pi * b.Tp * min(b.n, b.d) ** (1.0 / b.p)))


def sweep_p(bound, b: BoundInputs, grid=P_GRID, constants=None):
    """Maximise ``bound`` over ``p`` on ``grid``; ``constants(p)`` may supply ``{"Tp": ...}``.

    Returns ``(best_value, best_p)``.
    """
    from dataclasses import replace

    best, best_p = -math.inf, None
    for p in grid:
        kw = {"p": float(p)}
        if constants is not None:
            kw.update(constants(float(p)))
        v = bound(replace(b, **kw))
        if v > best:
            best, best_p = v, float(p)
    return best, best_p


def antipodal_edge_extremes(f: CubeFunction, norm: NormSpec):
    """``(min antipodal displacement, max edge displacement)`` by direct scan."""
    n = f.n
    N = 1 << n
    half = np.arange(N // 2)
    antipodal = norm(f.values[half] - f.values[(N - 1) ^ half])
    idx = np.arange(N)
    edge_max = 0.0
    for i in range(n):
        lows = idx[(idx >> i) & 1 == 0]
        edge_max = max(edge_max, float(np.max(norm(f.values[lows] - f.values[lows | (1 << i)]))))
    return float(np.min(antipodal)), edge_max


def edge_antipodal_ratio(f: CubeFunction, norm: NormSpec) -> float:
    """``(sup_antipodal n / |Δf|) * (sup_edges |Δf|)``; infinite if an antipodal pair collapses."""
    amin, emax = antipodal_edge_extremes(f, norm)
    if amin == 0:
        return math.inf
    return f.n / amin * emax


def sharp_example(n: int, d: int) -> CubeFunction:
    """Block sums over ``d`` consecutive blocks of size ``n/d`` (which must be odd)."""
    if d < 1 or n % d:
        raise ValueError("d must divide n")
    m = n // d
    if m % 2 == 0:
        raise ValueError("block size n/d must be odd")
    signs = sign_table(n)
    return CubeFunction(signs.reshape(-1, d, m).sum(axis=2))
