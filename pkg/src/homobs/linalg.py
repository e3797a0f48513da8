"""Dense real-matrix kernels.

Matrices are plain ``numpy.ndarray`` objects of dtype float64.  Every
function here is pure: inputs are never modified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import constants as K
from .errors import DefinitenessError, DimensionError


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite 2-D float array (a copy when converted)."""
    m = np.array(a, dtype=float)
    if m.ndim == 1:
        m = m.reshape(1, -1) if m.size else m.reshape(0, 0)
    if m.ndim != 2:
        raise DimensionError(f"{name}: expected a 2-D array, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise DimensionError(f"{name}: non-finite entries")
    return m


def as_vector(v, name: str = "vector") -> np.ndarray:
    x = np.array(v, dtype=float).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise DimensionError(f"{name}: non-finite entries")
    return x


def _require_square(m: np.ndarray, name: str) -> int:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name}: expected a square matrix, got shape {m.shape}")
    return m.shape[0]


def symmetrize(s: np.ndarray) -> np.ndarray:
    return 0.5 * (s + s.T)


def mat_exp(m, s: float = 1.0) -> np.ndarray:
    """exp(s*M) by scaling and squaring with a truncated Taylor polynomial."""
    m = as_matrix(m, "M")
    n = _require_square(m, "M")
    eye = np.eye(n)
    if s == 0.0 or n == 0:
        return eye
    x = s * m
    norm = np.linalg.norm(x, 1)
    squarings = 0
    if norm > K.EXPM_NORM_TARGET:
        squarings = int(math.ceil(math.log2(norm / K.EXPM_NORM_TARGET)))
        x = x / 2.0**squarings
    # Horner evaluation of the Taylor sum
    result = eye.copy()
    for k in range(K.EXPM_TAYLOR_DEGREE, 0, -1):
        result = eye + (x @ result) / k
    for _ in range(squarings):
        result = result @ result
    return result


@dataclass(frozen=True, eq=False)
class SymEig:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def sym_eig(s) -> SymEig:
    """Symmetric eigendecomposition by the cyclic Jacobi method.

    The input is symmetrized first.  Sweeps visit pairs (p, q), p < q, in
    row order, so the result is deterministic for a given input.
    """
    a = as_matrix(s, "S")
    n = _require_square(a, "S")
    a = symmetrize(a)
    v = np.eye(n)
    if n <= 1:
        return SymEig(np.diag(a).copy(), v)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    for _ in range(K.JACOBI_MAX_SWEEPS):
        off = math.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= K.JACOBI_OFFDIAG_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= np.finfo(float).tiny * scale:
                    a[p, q] = a[q, p] = 0.0
                    continue
                diff = a[q, q] - a[p, p]
                if abs(diff) > 1e150 * abs(apq):
                    # rotation angle below rounding: t ~ apq / diff
                    t = apq / diff
                else:
                    tau = diff / (2.0 * apq)
                    if tau >= 0:
                        t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                    else:
                        t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                sn = t * c
                # A <- J^T A J with J the (p, q) rotation
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - sn * aq
                a[:, q] = sn * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - sn * aq
                a[q, :] = sn * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - sn * vq
                v[:, q] = sn * vp + c * vq
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return SymEig(w[order], v[:, order])


def kron(a, b) -> np.ndarray:
    """Kronecker product; block (i, j) of the result is a[i, j] * b."""
    return np.kron(as_matrix(a, "A"), as_matrix(b, "B"))


def weighted_norm(x, p) -> float:
    """sqrt(x^T P x) for a caller-certified positive definite P."""
    x = as_vector(x, "x")
    p = as_matrix(p, "P")
    if p.shape != (x.size, x.size):
        raise DimensionError(f"P has shape {p.shape}, x has length {x.size}")
    r = float(x @ p @ x)
    if r < 0.0:
        if r < -K.RADICAND_TOL * (1.0 + float(x @ x) * np.linalg.norm(p)):
            raise DefinitenessError(f"x^T P x = {r:.3e} < 0: P is not positive definite")
        r = 0.0
    return math.sqrt(r)


class Definiteness(NamedTuple):
    ok: bool
    min_eigenvalue: float


def is_positive_definite(s, margin: float = 0.0) -> Definiteness:
    """True iff lambda_min(sym(S)) >= margin; the report carries lambda_min."""
    lam = sym_eig(s).eigenvalues
    lam_min = float(lam[0]) if lam.size else math.inf
    return Definiteness(lam_min >= margin, lam_min)


class LeastSquares(NamedTuple):
    x: np.ndarray
    residual: float
    consistent: bool


def solve_least_squares(m, b, tol: float = K.LSTSQ_RESIDUAL_TOL) -> LeastSquares:
    """Minimum-norm minimizer of |Mx - b|, with the residual norm.

    ``consistent`` is False when the residual exceeds ``tol * (1 + |b|)``.
    """
    m = as_matrix(m, "M")
    b = as_vector(b, "b")
    if m.shape[0] != b.size:
        raise DimensionError(f"M has {m.shape[0]} rows, b has length {b.size}")
    x, *_ = np.linalg.lstsq(m, b, rcond=None)
    residual = float(np.linalg.norm(m @ x - b))
    return LeastSquares(x, residual, residual <= tol * (1.0 + np.linalg.norm(b)))


def is_nilpotent(m, tol: float = K.NILPOTENT_TOL) -> bool:
    """True iff |M^n|_F <= tol * (1 + |M|_F)^n."""
    m = as_matrix(m, "M")
    n = _require_square(m, "M")
    if n == 0:
        return True
    power = np.linalg.matrix_power(m, n)
    return bool(np.linalg.norm(power) <= tol * (1.0 + np.linalg.norm(m)) ** n)
