"""The biased Markov semigroup on {-1,1}^n.

Time enters only through ``q = exp(-t)`` in ``(0, 1]``. Each coordinate is
driven by an independent unit-rate Poisson clock; at every ring the
coordinate is redrawn from its two-point law, so over a horizon ``t`` it is
refreshed with probability ``1 - q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cube import BiasVector, CubeFunction, CubePoint, ProductMeasure, sign_table


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"bias must lie in (0,1), got {alpha}")


def _check_q(q: float, open_right: bool = False) -> None:
    if open_right:
        if not 0.0 < q < 1.0:
            raise ValueError(f"q = exp(-t) must lie in (0,1) here, got {q}")
    elif not 0.0 < q <= 1.0:
        raise ValueError(f"q = exp(-t) must lie in (0,1], got {q}")


def _row(v: int) -> int:
    """Matrix row/column for a sign in the printed layout: +1 first, -1 second."""
    return 0 if v == 1 else 1


@dataclass(frozen=True)
class Kernel1D:
    """``p_t^alpha`` with rows/columns ordered ``(+1, -1)``."""

    alpha: float
    q: float

    @property
    def entries(self) -> np.ndarray:
        a, s = self.alpha, 1.0 - self.q
        return np.array([[1.0 - s * (1.0 - a), s * (1.0 - a)],
                         [s * a, 1.0 - s * a]])

    def __call__(self, x: int, y: int) -> float:
        return float(self.entries[_row(x), _row(y)])


def kernel_1d(alpha: float, q: float) -> Kernel1D:
    _check_alpha(alpha)
    _check_q(q)
    return Kernel1D(float(alpha), float(q))


def _bit_kernel(alpha: float, q: float) -> np.ndarray:
    """Same kernel indexed by bit value (0 for -1, 1 for +1)."""
    s = 1.0 - q
    return np.array([[1.0 - s * alpha, s * alpha],
                     [s * (1.0 - alpha), 1.0 - s * (1.0 - alpha)]])


def kernel_nd(bias: BiasVector, q: float, x: CubePoint, y: CubePoint) -> float:
    if not (bias.n == x.n == y.n):
        raise ValueError("dimension mismatch")
    _check_q(q)
    out = 1.0
    for i, a in enumerate(bias.alphas):
        out *= _bit_kernel(a, q)[(x.mask >> i) & 1, (y.mask >> i) & 1]
    return out


def kernel_matrix(bias: BiasVector, q: float) -> np.ndarray:
    """Full ``2^n x 2^n`` transition matrix in vertex order."""
    _check_q(q)
    m = np.ones((1, 1))
    for a in bias.alphas:
        m = np.kron(_bit_kernel(a, q), m)
    return m


# --- derivatives, generator, semigroup ---------------------------------------


def _split(values: np.ndarray, i: int):
    """Views of ``values`` on the halves ``x(i) = -1`` and ``x(i) = +1``."""
    h = 1 << i
    view = values.reshape(-1, 2, h, values.shape[1])
    return view, view[:, 0], view[:, 1]


def biased_derivative(f: CubeFunction, i: int, beta: float) -> CubeFunction:
    """``f(x)`` minus the ``mu_beta``-average of ``f`` over coordinate ``i``."""
    if not 0 <= i < f.n:
        raise IndexError(f"coordinate {i} out of range for n={f.n}")
    _check_alpha(beta)
    out = f.values.copy()
    view, minus, plus = _split(out, i)
    mean = beta * plus + (1.0 - beta) * minus
    view -= mean[:, None]
    return CubeFunction(out)


def all_derivatives(f: CubeFunction, bias: BiasVector) -> np.ndarray:
    """``(n, 2^n, d)`` stack of ``∂_i^{alpha_i} f``."""
    if bias.n != f.n:
        raise ValueError("dimension mismatch")
    return np.stack([biased_derivative(f, i, a).values for i, a in enumerate(bias.alphas)])


def generator_apply(f: CubeFunction, bias: BiasVector) -> CubeFunction:
    return CubeFunction(-all_derivatives(f, bias).sum(axis=0))


def semigroup_apply(f: CubeFunction, bias: BiasVector, q: float) -> CubeFunction:
    """``P_t f`` applied one coordinate at a time, O(n 2^n d)."""
    if bias.n != f.n:
        raise ValueError("dimension mismatch")
    _check_q(q)
    out = f.values.copy()
    for i, a in enumerate(bias.alphas):
        view, minus, plus = _split(out, i)
        mean = a * plus + (1.0 - a) * minus
        view *= q
        view += (1.0 - q) * mean[:, None]
    return CubeFunction(out)


# --- the eta coefficients -----------------------------------------------------


@dataclass(frozen=True)
class EtaMatrix:
    """``eta_t^alpha(., .; theta)`` laid out as ``[[(1,1), (1,-1)], [(-1,1), (-1,-1)]]``."""

    alpha: float
    q: float
    theta: float

    @property
    def entries(self) -> np.ndarray:
        p = kernel_1d(self.alpha, self.q).entries
        q, th = self.q, self.theta
        return np.array([[(q - th) / p[0, 0], -th / p[1, 0]],
                         [(th - q) / p[0, 1], th / p[1, 1]]])

    def __call__(self, a: int, b: int) -> float:
        return float(self.entries[_row(a), _row(b)])


def eta(alpha: float, q: float, theta: float) -> EtaMatrix:
    _check_alpha(alpha)
    _check_q(q, open_right=True)
    return EtaMatrix(float(alpha), float(q), float(theta))


def centering_residual(alpha: float, q: float, theta: float) -> float:
    """Max over ``x`` of ``|sum_y p(x,y) eta(y,x)|``; zero by construction."""
    p = kernel_1d(alpha, q)
    e = eta(alpha, q, theta)
    return max(abs(p(x, 1) * e(1, x) + p(x, -1) * e(-1, x)) for x in (1, -1))


def theta_star(alpha: float, q: float) -> float:
    """Minimiser of ``second_moment_max`` over ``theta``."""
    _check_alpha(alpha)
    _check_q(q, open_right=True)
    p = kernel_1d(alpha, q).entries
    u = math.sqrt(alpha * p[1, 1])
    v = math.sqrt((1.0 - alpha) * p[0, 0])
    return q * u / (u + v)


def second_moment_max(alpha: float, q: float, theta: float) -> float:
    """``max_x sum_y p(x,y) eta(y,x;theta)^2`` as the larger of two quadratics."""
    _check_alpha(alpha)
    _check_q(q, open_right=True)
    p = kernel_1d(alpha, q).entries
    return max((q - theta) ** 2 / (p[0, 0] * p[0, 1]),
               theta ** 2 / (p[1, 0] * p[1, 1]))


def second_moment_min(alpha: float, q: float) -> float:
    """Closed form of ``min_theta second_moment_max``."""
    p = kernel_1d(alpha, q).entries
    s = math.sqrt(alpha * p[1, 1]) + math.sqrt((1.0 - alpha) * p[0, 0])
    return q / ((1.0 / q - 1.0) * s * s)


def _resolve_thetas(bias: BiasVector, q: float, thetas) -> np.ndarray:
    if thetas is None:
        return np.array([theta_star(a, q) for a in bias.alphas])
    thetas = np.asarray(thetas, dtype=float)
    if thetas.shape != (bias.n,):
        raise ValueError(f"expected {bias.n} theta values")
    return thetas


def _eta_pair_tables(bias: BiasVector, q: float, thetas: np.ndarray,
                     orientation: str) -> list:
    """Per coordinate, the ``2^n x 2^n`` table ``eta_i(., .)`` on (start x, end y)."""
    n = bias.n
    bits = ((np.arange(1 << n)[:, None] >> np.arange(n)[None, :]) & 1)
    tables = []
    for i, (a, th) in enumerate(zip(bias.alphas, thetas)):
        e = eta(a, q, th).entries
        # reindex printed layout (+1 first) to bit value (1 for +1)
        ebits = e[::-1, ::-1]
        xb = bits[:, i][:, None]
        yb = bits[:, i][None, :]
        if orientation == "start_end":
            tables.append(ebits[xb, yb])
        elif orientation == "end_start":
            tables.append(ebits[yb, xb])
        else:
            raise ValueError(f"unknown orientation {orientation!r}")
    return tables


def identity_rhs_table(f: CubeFunction, bias: BiasVector, q: float, thetas=None,
                       orientation: str = "start_end") -> np.ndarray:
    """Right side of the heat-flow derivative identity at every start vertex.

    ``-sum_y p_t(x,y) sum_i eta_i(x(i), y(i); theta_i) ∂_i^{alpha_i} f(y)``,
    evaluated as a plain ``2^n``-term sum per start point. With
    ``orientation="end_start"`` the arguments of ``eta`` are swapped, which
    is only used as a diagnostic.
    """
    if bias.n != f.n:
        raise ValueError("dimension mismatch")
    _check_q(q, open_right=True)
    thetas = _resolve_thetas(bias, q, thetas)
    P = kernel_matrix(bias, q)
    D = all_derivatives(f, bias)
    tables = _eta_pair_tables(bias, q, thetas, orientation)
    out = np.zeros_like(f.values)
    for E, Di in zip(tables, D):
        out -= (P * E) @ Di
    return out


def identity_rhs(f: CubeFunction, bias: BiasVector, q: float, thetas, x: CubePoint,
                 orientation: str = "start_end") -> np.ndarray:
    if x.n != f.n:
        raise ValueError("dimension mismatch")
    _check_q(q, open_right=True)
    thetas = _resolve_thetas(bias, q, thetas)
    D = all_derivatives(f, bias)
    etas = [eta(a, q, th) for a, th in zip(bias.alphas, thetas)]
    signs = sign_table(f.n)
    xs = signs[x.mask]
    total = np.zeros(f.d)
    for ymask in range(1 << f.n):
        ys = signs[ymask]
        w = kernel_nd(bias, q, x, CubePoint(f.n, ymask))
        for i, e in enumerate(etas):
            a, b = (xs[i], ys[i]) if orientation == "start_end" else (ys[i], xs[i])
            total -= w * e(int(a), int(b)) * D[i, ymask]
    return total


def verify_identity(f: CubeFunction, bias: BiasVector, q: float, thetas=None) -> float:
    """Max over vertices of ``|L P_t f - rhs|_inf``."""
    lhs = generator_apply(semigroup_apply(f, bias, q), bias).values
    rhs = identity_rhs_table(f, bias, q, thetas)
    return float(np.abs(lhs - rhs).max())


def reversed_pairing_gap(f: CubeFunction, bias: BiasVector, q: float, thetas=None,
                         p: float = 2.0, norm=None) -> float:
    """Gap between the two ways of writing the stationary ``L_p`` energy.

    With ``X_0 ~ mu`` the quantity ``E |sum_i eta_i(X_0(i), X_t(i)) ∂_i f(X_t)|^p``
    equals ``int sum_y p_t(x,y) |sum_i eta_i(y(i), x(i)) ∂_i f(x)|^p dmu(x)``
    by reversibility; both are computed here and their difference returned.
    """
    from .cube import lp_norm

    norm = norm or (lambda v: lp_norm(v, 2.0))
    thetas = _resolve_thetas(bias, q, thetas)
    mu = ProductMeasure(bias).weights()
    P = kernel_matrix(bias, q)
    D = all_derivatives(f, bias)
    tables = _eta_pair_tables(bias, q, thetas, "start_end")
    # forward: start x ~ mu, endpoint y, derivative evaluated at y
    fwd = np.zeros((1 << f.n, 1 << f.n, f.d))
    for E, Di in zip(tables, D):
        fwd += E[:, :, None] * Di[None, :, :]
    forward = float(np.sum(mu[:, None] * P * norm(fwd) ** p))
    # reversed: start x ~ mu, endpoint y, eta(y(i), x(i)), derivative at x
    rev = np.zeros_like(fwd)
    for E, Di in zip(tables, D):
        rev += E.T[:, :, None] * Di[:, None, :]
    backward = float(np.sum(mu[:, None] * P * norm(rev) ** p))
    return abs(forward - backward)


# --- Monte Carlo ---------------------------------------------------------------


@dataclass(frozen=True)
class ProcessState:
    n: int
    current: CubePoint
    elapsed: float = 0.0


def _refresh(mask: int, alphas, p_refresh: float, rng: np.random.Generator) -> int:
    for i, a in enumerate(alphas):
        if rng.random() < p_refresh:
            if rng.random() < a:
                mask |= 1 << i
            else:
                mask &= ~(1 << i)
    return mask


def simulate_step(state: ProcessState, bias: BiasVector, horizon: float,
                  rng: np.random.Generator, explicit_events: bool = False) -> ProcessState:
    """Advance the process by ``horizon``.

    The default skips ahead: a coordinate whose clock rang at least once is
    a fresh draw from its law. ``explicit_events=True`` walks through the
    exponential inter-arrival times instead; the law is the same.
    """
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if bias.n != state.n:
        raise ValueError("dimension mismatch")
    mask = state.current.mask
    if horizon > 0:
        if explicit_events:
            for i, a in enumerate(bias.alphas):
                clock = rng.exponential()
                while clock <= horizon:
                    if rng.random() < a:
                        mask |= 1 << i
                    else:
                        mask &= ~(1 << i)
                    clock += rng.exponential()
        else:
            mask = _refresh(mask, bias.alphas, -math.expm1(-horizon), rng)
    return ProcessState(state.n, CubePoint(state.n, mask), state.elapsed + horizon)


def sample_endpoints(bias: BiasVector, q: float, x: CubePoint, samples: int,
                     rng: np.random.Generator) -> np.ndarray:
    """Vectorised skip-ahead: masks of ``X_t`` for ``samples`` runs started at ``x``."""
    _check_q(q)
    n = bias.n
    alphas = bias.as_array()
    start = ((x.mask >> np.arange(n)) & 1).astype(bool)
    refresh = rng.random((samples, n)) >= q
    draws = rng.random((samples, n)) < alphas
    bits = np.where(refresh, draws, start[None, :])
    return bits.astype(np.int64) @ (1 << np.arange(n, dtype=np.int64))


def mc_semigroup(f: CubeFunction, bias: BiasVector, q: float, x: CubePoint, samples: int,
                 rng: np.random.Generator, blocks: int = 1):
    """Sample mean of ``f(X_t)`` from ``X_0 = x`` with its per-component stderr.

    With ``blocks > 1`` the samples are split into blocks, each drawn from an
    independent child stream of ``rng``; the result depends only on the parent
    state and the block count.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    if blocks > 1:
        sizes = [samples // blocks + (k < samples % blocks) for k in range(blocks)]
        children = rng.spawn(blocks)
        endpoints = np.concatenate([sample_endpoints(bias, q, x, s, c)
                                    for s, c in zip(sizes, children) if s])
    else:
        endpoints = sample_endpoints(bias, q, x, samples, rng)
    vals = f.values[endpoints]
    est = vals.mean(axis=0)
    if samples == 1:
        return est, np.zeros(f.d)
    stderr = vals.std(axis=0, ddof=1) / math.sqrt(samples)
    return est, stderr
