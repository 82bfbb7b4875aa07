"""Walsh-Fourier expansion and the multilinear extension to [-1,1]^n.

Subsets ``S`` of coordinates are bitmasks with the same convention as
vertices, so ``coeffs[S]`` multiplies the character ``w_S(x) = prod_{i in S} x(i)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cube import CubeFunction, popcounts

BOX_TOL = 1e-12


@dataclass
class FourierTable:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        size = c.shape[0]
        if size < 2 or size & (size - 1):
            raise ValueError("coefficient table length must be 2**n with n >= 1")
        self.coeffs = c

    @property
    def n(self) -> int:
        return self.coeffs.shape[0].bit_length() - 1

    @property
    def d(self) -> int:
        return self.coeffs.shape[1]

    def odd_part(self) -> "FourierTable":
        """Table keeping only the odd-cardinality subsets."""
        odd = (popcounts(self.n) & 1).astype(bool)
        return FourierTable(np.where(odd[:, None], self.coeffs, 0.0))


def _butterfly(a: np.ndarray, inverse: bool) -> np.ndarray:
    n = a.shape[0].bit_length() - 1
    d = a.shape[1]
    a = a.copy()
    for i in range(n):
        h = 1 << i
        view = a.reshape(-1, 2, h, d)
        lo = view[:, 0].copy()  # bit i clear: x(i) = -1
        hi = view[:, 1]
        if inverse:
            view[:, 0] = lo - hi
            view[:, 1] = lo + hi
        else:
            view[:, 0] = hi + lo
            view[:, 1] = hi - lo
    return a


def walsh_transform(f: CubeFunction) -> FourierTable:
    """``coeffs[S] = 2^-n sum_x f(x) w_S(x)`` via the O(n 2^n) butterfly."""
    return FourierTable(_butterfly(f.values, inverse=False) / (1 << f.n))


def inverse_walsh(t: FourierTable) -> CubeFunction:
    return CubeFunction(_butterfly(t.coeffs, inverse=True))


def _check_box(y: np.ndarray, n: int) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (n,):
        raise ValueError(f"expected a point of length {n}")
    if np.any(np.abs(y) > 1.0 + BOX_TOL):
        raise ValueError("point lies outside the cube [-1,1]^n")
    return y


def _contract(coeffs: np.ndarray, factors) -> np.ndarray:
    """Sum ``coeffs[S] * prod_i factors[i][bit_i(S)]`` with bit 0 varying fastest."""
    a = coeffs
    d = coeffs.shape[1]
    for u0, u1 in factors:
        a = a.reshape(-1, 2, d)
        a = u0 * a[:, 0] + u1 * a[:, 1]
    return a.reshape(d)


def multilinear_eval(t: FourierTable, y) -> np.ndarray:
    """The unique multilinear extension ``F(y) = sum_S coeffs[S] prod_{i in S} y_i``."""
    y = _check_box(y, t.n)
    return _contract(t.coeffs, [(1.0, yi) for yi in y])


def multilinear_jacobian(t: FourierTable, y) -> np.ndarray:
    """Exact ``(d, n)`` Jacobian of the extension at ``y``."""
    y = _check_box(y, t.n)
    base = [(1.0, yi) for yi in y]
    cols = []
    for j in range(t.n):
        factors = list(base)
        factors[j] = (0.0, 1.0)
        cols.append(_contract(t.coeffs, factors))
    return np.stack(cols, axis=1)


def odd_part_eval(t: FourierTable, y) -> np.ndarray:
    """``(F(y) - F(-y)) / 2``, i.e. the odd-cardinality part of the expansion."""
    return multilinear_eval(t.odd_part(), y)


def vertex_point(mask: int, n: int) -> np.ndarray:
    return np.array([1.0 if (mask >> i) & 1 else -1.0 for i in range(n)])


def random_function(n: int, d: int, rng: np.random.Generator, sparse: int | None = None) -> CubeFunction:
    """Random ``f`` with Walsh coefficients uniform on ``[-1, 1]``.

    With ``sparse=k`` only ``k`` distinct random subsets carry a coefficient.
    """
    coeffs = np.zeros((1 << n, d))
    if sparse is None:
        coeffs[:] = rng.uniform(-1.0, 1.0, coeffs.shape)
    else:
        k = min(sparse, 1 << n)
        subsets = rng.choice(1 << n, size=k, replace=False)
        coeffs[subsets] = rng.uniform(-1.0, 1.0, (k, d))
    return inverse_walsh(FourierTable(coeffs))
