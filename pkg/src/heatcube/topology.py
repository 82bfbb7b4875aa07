"""Antipodal zeros of the multilinear extension on the cube complex C_d^n.

For ``f : {-1,1}^n -> R^r`` with ``r <= d < n`` the extension ``F`` has a
point ``z`` on the union of ``d``-dimensional faces of ``[-1,1]^n`` with
``F(z) = F(-z)``. Such a point is located here by solving
``F(z) - F(-z) = 0`` face by face with a box-projected, damped Gauss-Newton
iteration, falling back to a coarse grid scan for starting points.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .cube import BiasVector, CubeFunction, NormSpec, ProductMeasure
from .fourier import FourierTable, _contract, multilinear_eval, walsh_transform
from .functionals import InequalityReport
from .heatflow import all_derivatives


class BudgetExhausted(RuntimeError):
    """No antipodal zero was found within the search budget."""


@dataclass(frozen=True)
class Face:
    """Face of ``[-1,1]^n``: coordinates in ``free`` vary, the others are fixed.

    ``fixed_signs`` is a vertex mask; only its bits outside ``free`` matter.
    """

    n: int
    free: int
    fixed_signs: int

    def __post_init__(self):
        full = (1 << self.n) - 1
        object.__setattr__(self, "fixed_signs", self.fixed_signs & full & ~self.free)

    @property
    def dim(self) -> int:
        return bin(self.free).count("1")

    @property
    def free_coords(self) -> list:
        return [i for i in range(self.n) if (self.free >> i) & 1]

    def antipode(self) -> "Face":
        full = (1 << self.n) - 1
        return Face(self.n, self.free, ~self.fixed_signs & full & ~self.free)

    def point(self, y) -> np.ndarray:
        """Embed local coordinates ``y`` (one per free coordinate) into ``[-1,1]^n``."""
        z = np.array([1.0 if (self.fixed_signs >> i) & 1 else -1.0 for i in range(self.n)])
        z[self.free_coords] = y
        return z

    def center(self) -> np.ndarray:
        return self.point(np.zeros(self.dim))


def enumerate_faces(n: int, d: int, dedupe: bool = False) -> list:
    """All faces of dimension exactly ``d``, ordered by free mask then fixed mask.

    With ``dedupe`` only the first face of each ``{face, -face}`` pair is kept.
    """
    if not 0 <= d <= n:
        raise ValueError("need 0 <= d <= n")
    frees = sorted(sum(1 << i for i in c) for c in itertools.combinations(range(n), d))
    faces = []
    for free in frees:
        rest = [i for i in range(n) if not (free >> i) & 1]
        for bits in range(1 << len(rest)):
            fixed = sum(1 << rest[k] for k in range(len(rest)) if (bits >> k) & 1)
            face = Face(n, free, fixed)
            if dedupe and face.antipode().fixed_signs < face.fixed_signs:
                continue
            faces.append(face)
    return faces


@dataclass
class AntipodalWitness:
    z: np.ndarray
    residual: float
    face: Face
    bias: BiasVector | None
    faces_examined: int = 0
    extras: dict = field(default_factory=dict)

    def on_complex(self, d: int, tol: float = 1e-9) -> bool:
        return int(np.sum(np.abs(np.abs(self.z) - 1.0) <= tol)) >= len(self.z) - d


def restrict_to_face(t: FourierTable, face: Face) -> np.ndarray:
    """Coefficients of the extension restricted to ``face``, over its free coordinates.

    The fixed coordinates are contracted away; the result is a ``(2^k, r)``
    multilinear table whose local bit ``j`` is the ``j``-th free coordinate.
    """
    n, r = t.n, t.d
    a = t.coeffs.reshape([2] * n + [r])
    # tensor axis n-1-i carries coordinate i; contract from the highest axis down
    for i in range(n):
        if (face.free >> i) & 1:
            continue
        axis = n - 1 - i
        s = 1.0 if (face.fixed_signs >> i) & 1 else -1.0
        a = np.take(a, 0, axis=axis) + s * np.take(a, 1, axis=axis)
    return a.reshape(-1, r)


def _batch_eval(table: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Evaluate a multilinear table at each row of ``Y``; returns ``(B, r)``."""
    B = Y.shape[0]
    r = table.shape[1]
    a = np.broadcast_to(table, (B,) + table.shape)
    for j in range(Y.shape[1]):
        a = a.reshape(B, -1, 2, r)
        a = a[:, :, 0] + Y[:, j, None, None] * a[:, :, 1]
    return a.reshape(B, r)


class _FaceMap:
    """``g(y) = F(z) - F(-z)`` restricted to one face, with its exact Jacobian."""

    def __init__(self, odd: FourierTable, face: Face):
        self.face = face
        self.table = 2.0 * restrict_to_face(odd, face)
        self.k = face.dim

    def value(self, y) -> np.ndarray:
        return _contract(self.table, [(1.0, yj) for yj in y])

    def values(self, Y: np.ndarray) -> np.ndarray:
        return _batch_eval(self.table, Y)

    def jacobian(self, y) -> np.ndarray:
        base = [(1.0, yj) for yj in y]
        cols = []
        for j in range(self.k):
            factors = list(base)
            factors[j] = (0.0, 1.0)
            cols.append(_contract(self.table, factors))
        return np.stack(cols, axis=1)


def _gauss_newton(fm: _FaceMap, y0: np.ndarray, tol: float, max_iter: int):
    """Projected Levenberg-damped Gauss-Newton on ``[-1,1]^k``. Returns ``(y, resid_inf)``.

    Iterates past ``tol`` down to ``tol * 1e-4`` while progress is made, so
    accepted points are polished rather than borderline.
    """
    target = tol * 1e-4
    y = np.clip(y0, -1.0, 1.0)
    r = fm.value(y)
    cost = float(r @ r)
    lam = 1e-8
    for _ in range(max_iter):
        if np.max(np.abs(r), initial=0.0) <= target:
            break
        J = fm.jacobian(y)
        grad = J.T @ r
        # coordinates pinned at the boundary whose descent direction points outward
        active = ((y >= 1.0) & (grad < 0)) | ((y <= -1.0) & (grad > 0))
        free = ~active
        if not free.any():
            break
        Jf = J[:, free]
        improved = False
        for _ in range(30):
            A = Jf.T @ Jf + lam * np.eye(Jf.shape[1])
            try:
                step = np.linalg.solve(A, -Jf.T @ r)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = y.copy()
            trial[free] += step
            trial = np.clip(trial, -1.0, 1.0)
            rt = fm.value(trial)
            ct = float(rt @ rt)
            if ct < cost:
                y, r, cost = trial, rt, ct
                lam = max(lam / 10.0, 1e-12)
                improved = True
                break
            lam *= 10.0
        if not improved:
            break
    return y, float(np.max(np.abs(r), initial=0.0))


def _starts(k: int, count: int) -> np.ndarray:
    pts = [np.zeros(k)]
    if count > 1 and k > 0:
        halton = qmc.Halton(d=k, scramble=False).random(count)[1:]
        pts.extend(2.0 * halton - 1.0)
    return np.array(pts)


def _grid_starts(fm: _FaceMap, k: int, per_axis: int = 33, keep: int = 4,
                 chunk: int = 1 << 14) -> np.ndarray:
    """Best ``keep`` points of a ``per_axis^min(k,4)`` grid (remaining coordinates at 0)."""
    m = min(k, 4)
    axis = np.linspace(-1.0, 1.0, per_axis)
    grid = np.stack(np.meshgrid(*([axis] * m), indexing="ij"), axis=-1).reshape(-1, m)
    scores = np.empty(len(grid))
    for lo in range(0, len(grid), chunk):
        Y = np.zeros((min(chunk, len(grid) - lo), k))
        Y[:, :m] = grid[lo: lo + chunk]
        scores[lo: lo + len(Y)] = np.max(np.abs(fm.values(Y)), axis=1)
    order = np.argsort(scores, kind="stable")[:keep]
    out = np.zeros((len(order), k))
    out[:, :m] = grid[order]
    return out


def find_antipodal_zero(t: FourierTable, d: int, tol: float = 1e-8, max_newton: int = 60,
                        multistarts: int = 8, grid_fallback: bool = True,
                        eps: float = 1e-9) -> AntipodalWitness:
    """Locate ``z`` on ``C_d^n`` with ``|F(z) - F(-z)|_inf <= tol``.

    Faces are visited in the order of :func:`enumerate_faces` with antipodal
    duplicates dropped (a zero on ``-face`` is the negation of one on
    ``face``). Every face is first tried from its centre and low-discrepancy
    starts; only then, if enabled, from the best points of a grid scan.
    Raises :class:`BudgetExhausted` if nothing passes.
    """
    n = t.n
    if not t.d <= d < n:
        raise ValueError(f"need range dim {t.d} <= d < n = {n}, got d = {d}")
    odd = t.odd_part()
    faces = enumerate_faces(n, d, dedupe=True)
    starts = _starts(d, multistarts)
    examined = 0

    def _accept(face, y, resid):
        z = face.point(y)
        w = AntipodalWitness(z, resid, face, None, examined)
        w.bias = derive_bias(w, eps)[2]
        return w

    for face in faces:
        examined += 1
        fm = _FaceMap(odd, face)
        for y0 in starts:
            y, resid = _gauss_newton(fm, y0, tol, max_newton)
            if resid <= tol:
                return _accept(face, y, resid)
    if grid_fallback:
        for face in faces:
            fm = _FaceMap(odd, face)
            for y0 in _grid_starts(fm, d):
                y, resid = _gauss_newton(fm, y0, tol, 4 * max_newton)
                if resid <= tol:
                    return _accept(face, y, resid)
    raise BudgetExhausted(f"no antipodal zero with residual <= {tol} on {len(faces)} faces")


def derive_bias(w: AntipodalWitness, eps: float = 1e-9):
    """Split ``z`` into free coordinates with bias ``(1 + z_i)/2`` and a fixed sign pattern.

    Returns ``(sigma, fixed, bias)``: ``sigma`` is the mask of free coordinates,
    ``fixed`` a vertex mask holding the signs of the others, and ``bias`` a
    :class:`BiasVector` over ``sigma`` in increasing coordinate order (None
    when ``sigma`` is empty).
    """
    z = np.asarray(w.z, dtype=float)
    sigma, fixed, alphas = 0, 0, []
    for i, zi in enumerate(z):
        if abs(zi) >= 1.0 - eps:
            if zi > 0:
                fixed |= 1 << i
        else:
            sigma |= 1 << i
            alphas.append(min(max((1.0 + zi) / 2.0, eps), 1.0 - eps))
    bias = BiasVector(tuple(alphas)) if alphas else None
    return sigma, fixed, bias


def _subcube_tables(f: CubeFunction, sigma: int, fixed: int):
    """Values of ``x -> f(x, w)`` and ``x -> f(-x, -w)`` on ``{-1,1}^sigma``."""
    n = f.n
    full = (1 << n) - 1
    coords = [i for i in range(n) if (sigma >> i) & 1]
    k = len(coords)
    plus_idx = np.empty(1 << k, dtype=np.int64)
    for local in range(1 << k):
        m = fixed & ~sigma
        for j, i in enumerate(coords):
            if (local >> j) & 1:
                m |= 1 << i
        plus_idx[local] = m
    minus_idx = full ^ plus_idx
    return f.values[plus_idx], f.values[minus_idx]


def restricted_poincare_check(f: CubeFunction, w: AntipodalWitness, p: float, norm: NormSpec,
                              Tp: float = 1.0, eps: float = 1e-9) -> InequalityReport:
    """Biased Poincaré on the antipodal pair of subcubes picked out by a witness.

    LHS is ``int |f(x,w) - f(-x,-w)|^p dmu_alpha``; RHS sums the biased
    derivatives of both restrictions; the budget is ``2^(2p-1) (pi Tp)^p``.
    An empty ``sigma`` (vertex witness) compares the two antipodal vertices
    directly against a zero right side and is flagged ``degenerate``.
    """
    sigma, fixed, bias = derive_bias(w, eps)
    budget = 2.0 ** (2 * p - 1) * (math.pi * Tp) ** p
    if bias is None:
        m = fixed
        diff = f.values[m] - f.values[((1 << f.n) - 1) ^ m]
        lhs = float(norm(diff[None, :])[0] ** p)
        return InequalityReport(lhs, 0.0, budget, {"degenerate": True, "sigma": sigma})
    hp, hm = _subcube_tables(f, sigma, fixed)
    mu = ProductMeasure(bias).weights()
    lhs = float(mu @ norm(hp - hm) ** p)
    rhs = 0.0
    for h in (hp, hm):
        D = all_derivatives(CubeFunction(h), bias)
        rhs += float(sum(mu @ norm(Di) ** p for Di in D))
    return InequalityReport(lhs, rhs, budget, {"degenerate": False, "sigma": sigma,
                                               "subcube_dim": bias.n})


def main_inequality_chain(f: CubeFunction, w: AntipodalWitness, p: float, norm: NormSpec,
                          Tp: float = 1.0, eps: float = 1e-9) -> dict:
    """The three quantities of the triangle-inequality/Poincaré chain on a witness.

    ``antipodal``: ``int |h+ - h-|^p``; ``centred``: ``2^(p-1) int |h+ - F(z)|^p + |h- - F(-z)|^p``;
    ``bound``: ``2^(2p-1) (pi Tp)^p`` times the derivative sum. A valid witness
    gives ``antipodal <= centred <= bound`` up to the witness residual.
    """
    rep = restricted_poincare_check(f, w, p, norm, Tp, eps)
    if rep.extras["degenerate"]:
        return {"antipodal": rep.lhs, "centred": rep.lhs, "bound": 0.0, "degenerate": True}
    sigma, fixed, bias = derive_bias(w, eps)
    hp, hm = _subcube_tables(f, sigma, fixed)
    mu = ProductMeasure(bias).weights()
    t = walsh_transform(f)
    Fz = multilinear_eval(t, np.clip(w.z, -1, 1))
    Fmz = multilinear_eval(t, np.clip(-w.z, -1, 1))
    centred = 2.0 ** (p - 1) * float(mu @ (norm(hp - Fz) ** p + norm(hm - Fmz) ** p))
    return {"antipodal": rep.lhs, "centred": centred,
            "bound": rep.constant_budget * rep.rhs, "degenerate": False,
            "mean_plus": (mu @ hp).tolist(), "F_z": Fz.tolist(),
            "mean_minus": (mu @ hm).tolist(), "F_minus_z": Fmz.tolist()}
