"""Linear dilations and canonical homogeneous norms.

A linear dilation is ``d(s) = exp(s * G_d)`` with an anti-Hurwitz generator
``G_d``.  The canonical homogeneous norm induced by ``|x|_P = sqrt(x^T P x)``
is ``exp(s_x)`` where ``s_x`` solves ``|d(-s_x) x|_P = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import constants as K
from .errors import DilationError, DimensionError
from .linalg import as_matrix, as_vector, mat_exp, sym_eig, symmetrize, weighted_norm


@dataclass(frozen=True, eq=False)
class Dilation:
    """Generator ``G_d`` plus the weight ``P`` of the inducing norm.

    Construction checks that ``G_d`` is anti-Hurwitz and that the dilation
    is monotone with respect to ``|.|_P``, i.e. ``P G_d + G_d^T P > 0``.
    """

    G_d: np.ndarray
    P: np.ndarray
    monotonicity_margin: float = field(init=False)
    scalar: float | None = field(init=False)

    def __post_init__(self):
        g = as_matrix(self.G_d, "G_d")
        p = symmetrize(as_matrix(self.P, "P"))
        n = g.shape[0]
        if g.shape != (n, n) or p.shape != (n, n):
            raise DimensionError(f"G_d {g.shape} and P {p.shape} must be equal and square")
        object.__setattr__(self, "G_d", g)
        object.__setattr__(self, "P", p)
        if n and np.max(np.linalg.eigvals(g).real) <= 0.0:
            raise DilationError("G_d is not anti-Hurwitz")
        if n and sym_eig(p).eigenvalues[0] <= 0.0:
            raise DilationError("P is not positive definite")
        margin = float(sym_eig(p @ g + g.T @ p).eigenvalues[0]) if n else math.inf
        if margin <= 0.0:
            raise DilationError(f"dilation is not monotone w.r.t. |.|_P (margin {margin:.3e})")
        object.__setattr__(self, "monotonicity_margin", margin)
        c = g[0, 0] if n else 1.0
        is_scalar = n == 0 or np.array_equal(g, c * np.eye(n))
        object.__setattr__(self, "scalar", float(c) if is_scalar else None)

    @classmethod
    def euler(cls, n: int, P=None) -> "Dilation":
        return cls(np.eye(n), np.eye(n) if P is None else P)

    @property
    def dim(self) -> int:
        return self.G_d.shape[0]

    def matrix(self, s: float) -> np.ndarray:
        if self.scalar is not None:
            return math.exp(self.scalar * s) * np.eye(self.dim)
        return mat_exp(self.G_d, s)

    def stacked(self, copies: int) -> "Dilation":
        """The dilation ``I_N (x) d`` with weight ``I_N (x) P``."""
        eye = np.eye(copies)
        return Dilation(np.kron(eye, self.G_d), np.kron(eye, self.P))

    def exponents(self) -> tuple[float, float]:
        """(alpha, beta) for the sandwich bound of |x|_P by powers of |x|_d.

        They are half the extreme eigenvalues of ``P G_d + G_d^T P`` taken
        relative to ``P`` (so ``G_d = I`` gives ``alpha = beta = 1``).
        """
        r = np.linalg.cholesky(self.P)
        r_inv = np.linalg.inv(r)
        m = r_inv @ (self.P @ self.G_d + self.G_d.T @ self.P) @ r_inv.T
        lam = sym_eig(m).eigenvalues
        return float(lam[-1]) / 2.0, float(lam[0]) / 2.0


def dilate(dil: Dilation, s: float, x) -> np.ndarray:
    x = as_vector(x, "x")
    if x.size != dil.dim:
        raise DimensionError(f"x has length {x.size}, dilation acts on R^{dil.dim}")
    if s == 0.0:
        return x.copy()
    if dil.scalar is not None:
        return math.exp(dil.scalar * s) * x
    return mat_exp(dil.G_d, s) @ x


class HomNormResult(NamedTuple):
    value: float
    s_x: float
    residual: float
    iterations: int


def _p_norm(x: np.ndarray, p: np.ndarray) -> float:
    return math.sqrt(max(float(x @ p @ x), 0.0))


def hom_norm(dil: Dilation, x) -> HomNormResult:
    """Canonical homogeneous norm of ``x`` (bracketing plus bisection)."""
    x = as_vector(x, "x")
    if x.size != dil.dim:
        raise DimensionError(f"x has length {x.size}, dilation acts on R^{dil.dim}")
    base = _p_norm(x, dil.P)
    if base == 0.0:
        return HomNormResult(0.0, -math.inf, 0.0, 0)
    if dil.scalar is not None:
        s = math.log(base) / dil.scalar
        residual = abs(math.exp(-dil.scalar * s) * base - 1.0)
        return HomNormResult(math.exp(s), s, residual, 0)

    def phi(s: float) -> float:
        return _p_norm(mat_exp(dil.G_d, -s) @ x, dil.P) - 1.0

    lo, hi = -1.0, 1.0
    f_lo, f_hi = phi(lo), phi(hi)
    doublings = 0
    # phi is strictly decreasing: need phi(lo) >= 0 >= phi(hi)
    while f_lo < 0.0 or f_hi > 0.0:
        if doublings >= K.BRACKET_MAX_DOUBLINGS:
            raise DilationError("no bracket for the homogeneous norm; dilation not monotone?")
        if f_lo < 0.0:
            lo *= 2.0
            f_lo = phi(lo)
        if f_hi > 0.0:
            hi *= 2.0
            f_hi = phi(hi)
        doublings += 1
    mid, f_mid = lo, f_lo
    it = 0
    for it in range(1, K.BISECTION_MAX_STEPS + 1):
        mid = 0.5 * (lo + hi)
        f_mid = phi(mid)
        if abs(f_mid) < K.BISECTION_RESIDUAL_TOL or mid in (lo, hi):
            break
        if f_mid > 0.0:
            lo = mid
        else:
            hi = mid
    return HomNormResult(math.exp(mid), mid, abs(f_mid), it + doublings)


def hom_norm_bounds(dil: Dilation, x) -> tuple[float, float]:
    """(lower, upper) = (min, max) of {|x|_d^alpha, |x|_d^beta}; checks the sandwich."""
    x = as_vector(x, "x")
    value = hom_norm(dil, x).value
    if value == 0.0:
        return 0.0, 0.0
    alpha, beta = dil.exponents()
    a, b = value**alpha, value**beta
    lower, upper = min(a, b), max(a, b)
    pn = weighted_norm(x, dil.P)
    slack = 1e-9 * max(1.0, pn)
    if not (lower - slack <= pn <= upper + slack):
        raise DilationError(
            f"norm sandwich violated: {lower:.6e} <= {pn:.6e} <= {upper:.6e} fails"
        )
    return lower, upper


def hom_norm_gradient(dil: Dilation, x) -> np.ndarray:
    """Gradient of |x|_d for x != 0."""
    x = as_vector(x, "x")
    res = hom_norm(dil, x)
    if res.value == 0.0:
        raise DimensionError("the homogeneous norm is not differentiable at x = 0")
    d_minus = dil.matrix(-res.s_x)
    z = d_minus @ x
    pz = dil.P @ z
    return res.value * (pz @ d_minus) / float(pz @ dil.G_d @ z)


def check_field_homogeneity(
    f: Callable[[np.ndarray], np.ndarray],
    dil: Dilation,
    mu: float,
    samples: int = 100,
    seed: int = 0,
    s_range: tuple[float, float] = (-2.0, 2.0),
) -> float:
    """Max over random (x, s) of |f(d(s)x) - e^{mu s} d(s) f(x)| / (1 + |f(x)|)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        x = rng.standard_normal(dil.dim)
        s = float(rng.uniform(*s_range))
        fx = np.asarray(f(x), dtype=float)
        lhs = np.asarray(f(dilate(dil, s, x)), dtype=float)
        rhs = math.exp(mu * s) * dilate(dil, s, fx)
        worst = max(worst, float(np.linalg.norm(lhs - rhs)) / (1.0 + float(np.linalg.norm(fx))))
    return worst
