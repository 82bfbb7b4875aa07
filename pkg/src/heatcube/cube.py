"""Points, measures and functions on the discrete hypercube {-1,1}^n.

Vertices are encoded as bitmasks: bit ``i`` of ``mask`` is set iff the
coordinate ``x(i)`` equals ``+1``. Every table indexed by vertices (function
values, measure weights) uses this ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

MAX_DIM = 30
BIAS_EPS = 1e-9


@dataclass(frozen=True)
class CubePoint:
    n: int
    mask: int

    def __post_init__(self):
        if not 1 <= self.n <= MAX_DIM:
            raise ValueError(f"cube dimension must lie in [1, {MAX_DIM}], got {self.n}")
        if not 0 <= self.mask < (1 << self.n):
            raise ValueError(f"mask {self.mask} out of range for n={self.n}")

    @classmethod
    def from_signs(cls, signs: Sequence[int]) -> "CubePoint":
        mask = 0
        for i, s in enumerate(signs):
            if s not in (-1, 1):
                raise ValueError(f"coordinate {i} is {s}, expected +1 or -1")
            if s == 1:
                mask |= 1 << i
        return cls(len(signs), mask)

    def sign(self, i: int) -> int:
        _check_index(i, self.n)
        return 1 if (self.mask >> i) & 1 else -1

    def signs(self) -> np.ndarray:
        return sign_table(self.n)[self.mask].copy()

    def flip(self, i: int) -> "CubePoint":
        return flip(self, i)

    def antipode(self) -> "CubePoint":
        return CubePoint(self.n, self.mask ^ ((1 << self.n) - 1))


def _check_index(i: int, n: int) -> None:
    if not 0 <= i < n:
        raise IndexError(f"coordinate index {i} out of range for n={n}")


def flip(x: CubePoint, i: int) -> CubePoint:
    """Negate coordinate ``i`` of ``x``."""
    _check_index(i, x.n)
    return CubePoint(x.n, x.mask ^ (1 << i))


@lru_cache(maxsize=None)
def _sign_table(n: int) -> np.ndarray:
    masks = np.arange(1 << n)[:, None]
    bits = (masks >> np.arange(n)[None, :]) & 1
    table = (2 * bits - 1).astype(float)
    table.setflags(write=False)
    return table


def sign_table(n: int) -> np.ndarray:
    """Read-only ``(2**n, n)`` array whose row ``m`` holds the signs of vertex ``m``."""
    return _sign_table(n)


@lru_cache(maxsize=None)
def _popcounts(n: int) -> np.ndarray:
    table = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        table[1 << i: 1 << (i + 1)] = table[: 1 << i] + 1
    table.setflags(write=False)
    return table


def popcounts(n: int) -> np.ndarray:
    return _popcounts(n)


@dataclass(frozen=True)
class BiasVector:
    alphas: tuple

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        if not alphas:
            raise ValueError("bias vector must be non-empty")
        for i, a in enumerate(alphas):
            if not (BIAS_EPS <= a <= 1.0 - BIAS_EPS):
                raise ValueError(f"bias alpha_{i}={a} outside [{BIAS_EPS}, 1-{BIAS_EPS}]")
        object.__setattr__(self, "alphas", alphas)

    @classmethod
    def uniform(cls, n: int) -> "BiasVector":
        return cls((0.5,) * n)

    @classmethod
    def constant(cls, alpha: float, n: int) -> "BiasVector":
        return cls((alpha,) * n)

    @property
    def n(self) -> int:
        return len(self.alphas)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.alphas)


@dataclass(frozen=True)
class ProductMeasure:
    """The product of two-point laws with mass ``alpha_i`` on ``x(i) = +1``."""

    bias: BiasVector

    @classmethod
    def uniform(cls, n: int) -> "ProductMeasure":
        return cls(BiasVector.uniform(n))

    @property
    def n(self) -> int:
        return self.bias.n

    def weights(self) -> np.ndarray:
        return _product_weights(self.bias.alphas)


@lru_cache(maxsize=256)
def _product_weights(alphas: tuple) -> np.ndarray:
    w = np.ones(1)
    # vertex index is sum bit_i 2^i, so coordinate i doubles the table on the high side
    for a in alphas:
        w = np.concatenate([w * (1.0 - a), w * a])
    w.setflags(write=False)
    return w


def measure_weight(mu: ProductMeasure, x: CubePoint) -> float:
    if mu.n != x.n:
        raise ValueError(f"dimension mismatch: measure on n={mu.n}, point on n={x.n}")
    w = 1.0
    for i, a in enumerate(mu.bias.alphas):
        w *= a if (x.mask >> i) & 1 else 1.0 - a
    return w


@dataclass
class CubeFunction:
    """Vector values ``f(x) in R^d`` for all ``2**n`` vertices, indexed by mask."""

    values: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise ValueError("values must be a (2**n, d) array")
        size = values.shape[0]
        n = size.bit_length() - 1
        if size < 2 or (1 << n) != size:
            raise ValueError(f"table length {size} is not 2**n with n >= 1")
        if not np.all(np.isfinite(values)):
            raise ValueError("function values must be finite")
        self.values = values
        self.n = n

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_callable(cls, n: int, fn: Callable[[np.ndarray], Sequence[float]]) -> "CubeFunction":
        """Tabulate ``fn(signs)`` over every vertex."""
        signs = sign_table(n)
        return cls(np.array([np.atleast_1d(fn(s)) for s in signs], dtype=float))

    @classmethod
    def constant(cls, n: int, c) -> "CubeFunction":
        c = np.atleast_1d(np.asarray(c, dtype=float))
        return cls(np.tile(c, (1 << n, 1)))

    @classmethod
    def coordinate(cls, n: int, i: int) -> "CubeFunction":
        """The scalar dictator ``x -> x(i)``."""
        return cls(sign_table(n)[:, i].copy())

    @classmethod
    def identity(cls, n: int) -> "CubeFunction":
        return cls(sign_table(n).copy())

    def __call__(self, x: CubePoint) -> np.ndarray:
        if x.n != self.n:
            raise ValueError("dimension mismatch")
        return self.values[x.mask]

    def scaled(self, c: float) -> "CubeFunction":
        return CubeFunction(c * self.values)

    def reflected(self) -> np.ndarray:
        """Values of ``x -> f(-x)`` in vertex order."""
        return self.values[::-1]


def expectation(f: CubeFunction, mu: ProductMeasure) -> np.ndarray:
    if f.n != mu.n:
        raise ValueError(f"dimension mismatch: f on n={f.n}, measure on n={mu.n}")
    return mu.weights() @ f.values


@dataclass(frozen=True)
class WeightVector:
    w: tuple

    def __post_init__(self):
        w = tuple(float(v) for v in self.w)
        if any(not math.isfinite(v) or v < 0 for v in w):
            raise ValueError("weights must be finite and nonnegative")
        object.__setattr__(self, "w", w)

    @classmethod
    def ones(cls, n: int) -> "WeightVector":
        return cls((1.0,) * n)

    @property
    def n(self) -> int:
        return len(self.w)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.w)

    def mask_weights(self) -> np.ndarray:
        """``rho_w`` between vertices differing exactly on ``mask``, for every mask."""
        table = np.zeros(1)
        for wi in self.w:
            table = np.concatenate([table, table + wi])
        return table


def weighted_hamming(w: WeightVector, x: CubePoint, y: CubePoint) -> float:
    if not (w.n == x.n == y.n):
        raise ValueError("dimension mismatch")
    diff = x.mask ^ y.mask
    return float(sum(wi for i, wi in enumerate(w.w) if (diff >> i) & 1))


def hamming(x: CubePoint, y: CubePoint) -> int:
    if x.n != y.n:
        raise ValueError("dimension mismatch")
    return bin(x.mask ^ y.mask).count("1")


# --- norms -----------------------------------------------------------------


def lp_norm(v, p: float = 2.0) -> np.ndarray | float:
    """ℓ_p norm along the last axis; ``p = inf`` gives the max modulus."""
    v = np.abs(np.asarray(v, dtype=float))
    if p < 1:
        raise ValueError("lp_norm needs p >= 1")
    if math.isinf(p):
        return v.max(axis=-1) if v.shape[-1] else np.zeros(v.shape[:-1])
    if p == 1:
        return v.sum(axis=-1)
    if p == 2:
        return np.sqrt((v * v).sum(axis=-1))
    scale = v.max(axis=-1, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    return (safe[..., 0]) * ((v / safe) ** p).sum(axis=-1) ** (1.0 / p)


def weak_lp_norm(v, p: float) -> np.ndarray | float:
    """Weak ℓ_{p,∞} quasi-norm ``sup_r r * #{i : |v_i| >= r}**(1/p)`` along the last axis.

    The supremum is attained at an order statistic, so this is
    ``max_k k**(1/p) * v_(k)`` with ``v_(k)`` the k-th largest modulus.
    """
    if p <= 0:
        raise ValueError("weak_lp_norm needs p > 0")
    v = np.abs(np.asarray(v, dtype=float))
    ordered = -np.sort(-v, axis=-1)
    k = np.arange(1, v.shape[-1] + 1, dtype=float)
    if not v.shape[-1]:
        return np.zeros(v.shape[:-1])
    return (k ** (1.0 / p) * ordered).max(axis=-1)


@dataclass(frozen=True)
class NormSpec:
    """A norm on ``R^d``: ``lp`` with ``p in [1, inf]`` or ``weak_lp`` with ``p > 0``."""

    kind: str = "lp"
    p: float = 2.0
    d: int | None = None

    def __post_init__(self):
        if self.kind == "lp":
            if not self.p >= 1:
                raise ValueError("lp norm needs p in [1, inf]")
        elif self.kind == "weak_lp":
            if not self.p > 0:
                raise ValueError("weak lp norm needs p > 0")
        else:
            raise ValueError(f"unknown norm kind {self.kind!r}")

    @classmethod
    def lp(cls, p: float, d: int | None = None) -> "NormSpec":
        return cls("lp", float(p), d)

    @classmethod
    def weak(cls, p: float, d: int | None = None) -> "NormSpec":
        return cls("weak_lp", float(p), d)

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        if self.d is not None and v.shape[-1] != self.d:
            raise ValueError(f"expected vectors of dimension {self.d}, got {v.shape[-1]}")
        if self.kind == "lp":
            return lp_norm(v, self.p)
        return weak_lp_norm(v, self.p)


def _orlicz_phi(r: np.ndarray, w: np.ndarray, p: float, a: float, gamma: float) -> float:
    s = (r / gamma) ** p
    if a == 0:
        return float(w @ s)
    return float(w @ (s * np.log(np.e + s) ** a))


def orlicz_norm(values, weights, norm=None, p: float = 1.0, a: float = 0.0,
                rtol: float = 1e-12) -> float:
    """Gauge norm of ``L_p(log L)^a(mu)``.

    ``inf{g > 0 : sum_w (|f|/g)^p log^a(e + (|f|/g)^p) <= 1}`` where ``|f|`` is
    ``norm`` applied to each row of ``values`` (absolute value for scalars).
    The defining functional is strictly decreasing in ``g`` and is solved by
    bisection until the bracket's relative width is at most ``rtol``.
    """
    if p < 1 or a < 0:
        raise ValueError("need p >= 1 and a >= 0")
    values = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("weights must form a probability vector")
    if values.ndim == 1:
        r = np.abs(values)
    else:
        r = np.asarray(norm(values) if norm is not None else lp_norm(values, 2.0))
    if len(r) != len(w):
        raise ValueError("values and weights differ in length")
    if not np.any(r > 0):
        return 0.0

    lp = float(w @ r ** p) ** (1.0 / p)
    lo = lp / (1.0 + np.log(np.e + 1.0) ** a) ** (1.0 / p)
    hi = lp * (1.0 + a)
    while _orlicz_phi(r, w, p, a, lo) < 1.0:
        lo /= 2.0
    while _orlicz_phi(r, w, p, a, hi) > 1.0:
        hi *= 2.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if _orlicz_phi(r, w, p, a, mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
