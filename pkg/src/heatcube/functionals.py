"""Exact evaluation of the hypercube inequality functionals.

Each functional is returned as an :class:`InequalityReport` holding the two
sides of an inequality ``lhs <= budget * rhs``. Optimal constants (type,
cotype, stable type) are never asserted here; ratios only give lower bounds
on them, and a budget is attached only when the caller supplies a constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cube import (BiasVector, CubeFunction, NormSpec, ProductMeasure,
                   orlicz_norm, sign_table, weak_lp_norm)
from .heatflow import all_derivatives

EXACT_PISIER_MAX_N = 10


@dataclass
class InequalityReport:
    lhs: float
    rhs: float
    constant_budget: float | None = None
    extras: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        if self.rhs > 0:
            return self.lhs / self.rhs
        return 0.0 if self.lhs == 0 else math.inf

    @property
    def holds(self) -> bool | None:
        if self.constant_budget is None:
            return None
        return bool(self.lhs <= self.constant_budget * self.rhs)

    def as_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio,
                "constant_budget": self.constant_budget, "holds": self.holds,
                **self.extras}


@dataclass
class MetricSpec:
    """A metric on value vectors, either a :class:`NormSpec` or a trusted callback."""

    norm: NormSpec | None = None
    callback: Callable | None = None

    def __post_init__(self):
        if (self.norm is None) == (self.callback is None):
            raise ValueError("give exactly one of norm or callback")

    @classmethod
    def from_norm(cls, norm: NormSpec) -> "MetricSpec":
        return cls(norm=norm)

    @classmethod
    def from_callback(cls, fn: Callable, dim: int, seed: int = 0, pairs: int = 100,
                      atol: float = 1e-9) -> "MetricSpec":
        """Register ``fn(u, v)`` after a spot check of symmetry and ``d(u,u) = 0``."""
        rng = np.random.default_rng(seed)
        for _ in range(pairs):
            u, v = rng.uniform(-1, 1, (2, dim))
            if abs(fn(u, u)) > atol:
                raise ValueError("callback fails d(u,u) = 0")
            duv, dvu = fn(u, v), fn(v, u)
            if duv < 0 or abs(duv - dvu) > atol * (1 + abs(duv)):
                raise ValueError("callback is not a symmetric nonnegative function")
        return cls(callback=fn)

    def distances(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Row-wise distances between two ``(m, d)`` arrays."""
        if self.norm is not None:
            return np.asarray(self.norm(u - v), dtype=float)
        return np.array([self.callback(a, b) for a, b in zip(u, v)], dtype=float)


def _flip_values(values: np.ndarray, i: int) -> np.ndarray:
    return values[np.arange(values.shape[0]) ^ (1 << i)]


def _signs(n: int) -> np.ndarray:
    return sign_table(n)


def enflo_functional(f: CubeFunction, p: float, norm: NormSpec) -> InequalityReport:
    """Antipodal versus edge displacements, both averaged over the uniform cube."""
    lhs = float(np.mean(norm(f.values - f.reflected()) ** p))
    rhs = sum(float(np.mean(norm(f.values - _flip_values(f.values, i)) ** p))
              for i in range(f.n))
    return InequalityReport(lhs, rhs, 1.0, {"p": p})


def _rademacher_average(vectors: np.ndarray, p: float, norm) -> float:
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    if vectors.shape[0] == 0:
        raise ValueError("need at least one vector")
    sums = _signs(vectors.shape[0]) @ vectors
    return float(np.mean(norm(sums) ** p))


def _as_vectors(vectors) -> np.ndarray:
    v = np.asarray(vectors, dtype=float)
    if v.size == 0:
        raise ValueError("need at least one vector")
    return v[:, None] if v.ndim == 1 else v


def rademacher_type_ratio(vectors, p: float, norm: NormSpec,
                          Tp: float | None = None) -> InequalityReport:
    """``E|sum x_i v_i|^p`` against ``sum |v_i|^p``; ``ratio**(1/p) <= T_p``."""
    v = _as_vectors(vectors)
    lhs = _rademacher_average(v, p, norm)
    rhs = float(np.sum(norm(v) ** p))
    rep = InequalityReport(lhs, rhs, None if Tp is None else Tp ** p, {"p": p})
    rep.extras["type_lower_bound"] = rep.ratio ** (1.0 / p)
    return rep


def cotype_ratio(vectors, q: float, norm: NormSpec) -> InequalityReport:
    """``E|sum x_i v_i|^q`` against ``sum |v_i|^q``.

    Cotype ``q`` with constant ``C`` reads ``lhs >= C^-q rhs``, so
    ``(rhs / lhs)**(1/q)`` is a lower bound on ``C``.
    """
    if q < 2:
        raise ValueError("cotype exponent must be >= 2")
    v = _as_vectors(vectors)
    lhs = _rademacher_average(v, q, norm)
    rhs = float(np.sum(norm(v) ** q))
    bound = (rhs / lhs) ** (1.0 / q) if lhs > 0 else math.inf
    return InequalityReport(lhs, rhs, None, {"q": q, "cotype_lower_bound": bound})


def poincare_functional(f: CubeFunction, bias: BiasVector, p: float, norm: NormSpec,
                        Tp: float = 1.0) -> InequalityReport:
    """Biased Poincaré: variance-type term against the sum of biased derivatives.

    The budget is ``(2 pi Tp)^p`` with ``Tp`` the caller's type-``p`` constant.
    """
    mu = ProductMeasure(bias).weights()
    mean = mu @ f.values
    lhs = float(mu @ norm(f.values - mean) ** p)
    D = all_derivatives(f, bias)
    rhs = float(sum(mu @ norm(Di) ** p for Di in D))
    return InequalityReport(lhs, rhs, (2 * math.pi * Tp) ** p, {"p": p, "Tp": Tp})


def _delta_sums_exact(D: np.ndarray) -> np.ndarray:
    """``sum_i delta_i D_i(x)`` for every sign vector ``delta`` and vertex ``x``."""
    n = D.shape[0]
    return np.einsum("ki,ixd->kxd", _signs(n), D)


def pisier_rhs(f: CubeFunction, alpha: float, p: float, norm: NormSpec,
               trials: int | None = None, rng: np.random.Generator | None = None):
    """Randomised-derivative energy ``(E_delta |sum delta_i ∂_i^alpha f|_{L_p}^p)^(1/p)``.

    Exact over all ``4^n`` pairs ``(delta, x)`` when ``trials`` is None
    (``n <= 10``); otherwise ``trials`` random sign vectors are drawn from
    ``rng``. Returns ``(value, stderr)`` with ``stderr = 0`` in exact mode.
    """
    if p < 1:
        raise ValueError("need p >= 1")
    bias = BiasVector.constant(alpha, f.n)
    mu = ProductMeasure(bias).weights()
    D = all_derivatives(f, bias)
    if trials is None:
        if f.n > EXACT_PISIER_MAX_N:
            raise ValueError(f"exact mode supports n <= {EXACT_PISIER_MAX_N}")
        per_delta = norm(_delta_sums_exact(D)) ** p @ mu
    else:
        if rng is None:
            raise ValueError("sampled mode needs an rng")
        deltas = rng.choice([-1.0, 1.0], size=(trials, f.n))
        per_delta = norm(np.einsum("ki,ixd->kxd", deltas, D)) ** p @ mu
    m = float(per_delta.mean())
    value = m ** (1.0 / p)
    if trials is None or trials < 2:
        return value, 0.0
    se_m = float(per_delta.std(ddof=1)) / math.sqrt(trials)
    se = se_m / (p * m ** (1.0 - 1.0 / p)) if m > 0 else 0.0
    return value, se


def pisier_report(f: CubeFunction, alpha: float, p: float, norm: NormSpec,
                  mode: str = "lp", a: float | None = None) -> InequalityReport:
    """Both sides of the biased Pisier / log-Sobolev inequalities.

    ``mode="lp"`` measures ``f - mean`` in ``L_p(mu_alpha^n)``; ``mode="orlicz"``
    uses ``L_p(log L)^a`` with ``a = p/2`` unless given. The constants in
    these inequalities exist but are not explicit, so no verdict is attached;
    the report carries ``ratio`` and ``ratio / (log n + 1)`` and the
    ``(log n + 1) * L_1`` term as extras.
    """
    bias = BiasVector.constant(alpha, f.n)
    mu = ProductMeasure(bias).weights()
    centred = f.values - mu @ f.values
    if mode == "lp":
        lhs = float(mu @ norm(centred) ** p) ** (1.0 / p)
    elif mode == "orlicz":
        a = p / 2.0 if a is None else a
        lhs = orlicz_norm(centred, mu, norm, p, a)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    rhs, _ = pisier_rhs(f, alpha, p, norm)
    log_factor = math.log(f.n) + 1.0
    l1, _ = pisier_rhs(f, alpha, 1.0, norm)
    rep = InequalityReport(lhs, rhs, None, {"p": p, "mode": mode, "alpha": alpha})
    rep.extras["ratio_over_log"] = rep.ratio / log_factor
    rep.extras["l1_term"] = log_factor * l1
    if mode == "orlicz":
        rep.extras["a"] = a
    return rep


def unbiased_derivatives(f: CubeFunction) -> np.ndarray:
    """``(n, 2^n, d)`` stack of ``(f(x) - f(x with i flipped)) / 2``."""
    return np.stack([(f.values - _flip_values(f.values, i)) / 2.0 for i in range(f.n)])


def asymmetric_gradient(h: CubeFunction) -> np.ndarray:
    """``Mh(x) = (sum_i max(∂_i h(x), 0)^2)^(1/2)`` for scalar ``h``."""
    if h.d != 1:
        raise ValueError("asymmetric gradient is defined for scalar functions only")
    D = unbiased_derivatives(h)[:, :, 0]
    return np.sqrt(np.sum(np.maximum(D, 0.0) ** 2, axis=0))


def pointwise_gradient_bound(f: CubeFunction, p: float, norm: NormSpec) -> float:
    """``max_x [ M|f|(x) - sqrt(2) (E_delta |sum delta_i ∂_i f(x)|^p)^(1/p) ]``.

    Non-positive whenever the pointwise inequality holds.
    """
    h = CubeFunction(norm(f.values))
    lhs = asymmetric_gradient(h)
    D = unbiased_derivatives(f)
    rhs = np.mean(norm(_delta_sums_exact(D)) ** p, axis=0) ** (1.0 / p)
    return float(np.max(lhs - math.sqrt(2.0) * rhs))


def metric_stable_functional(f: CubeFunction, p: float, metric: MetricSpec) -> InequalityReport:
    """Antipodal ``d^p`` average against the averaged weak-ℓ_p norm of half-edge lengths.

    ``ratio**(1/p)`` lower-bounds the metric stable type constant. The extra
    ``rhs_strong`` uses the ℓ_p norm in place of the weak norm and is never
    smaller than ``rhs``.
    """
    if not 0 < p < 2:
        raise ValueError("metric stable type needs p in (0, 2)")
    vals = f.values
    lhs = float(np.mean(metric.distances(vals, f.reflected()) ** p))
    half = np.stack([0.5 * metric.distances(vals, _flip_values(vals, i))
                     for i in range(f.n)], axis=1)
    rhs = float(np.mean(weak_lp_norm(half, p) ** p))
    strong = float(np.mean(np.sum(half ** p, axis=1)))
    rep = InequalityReport(lhs, rhs, None, {"p": p, "rhs_strong": strong})
    rep.extras["stable_lower_bound"] = rep.ratio ** (1.0 / p)
    return rep


def stable_weak_functional(vectors, p: float, norm: NormSpec) -> InequalityReport:
    """``E|sum x_i v_i|^p`` against the weak-ℓ_p norm of ``(|v_1|, ..., |v_n|)`` to the ``p``."""
    if not 1 <= p < 2:
        raise ValueError("stable type functional needs p in [1, 2)")
    v = _as_vectors(vectors)
    lhs = _rademacher_average(v, p, norm)
    rhs = float(weak_lp_norm(norm(v), p)) ** p
    rep = InequalityReport(lhs, rhs, None, {"p": p})
    rep.extras["stable_type_lower_bound"] = rep.ratio ** (1.0 / p)
    return rep
