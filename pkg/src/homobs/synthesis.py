"""Observer parameter tuning.

Solves the structure equation for ``G0``/``L0``, synthesizes
``(P_a, Y, Hbar_i, nu)`` for the linear, finite-time and fixed-time
observers, and certifies every matrix inequality by eigenvalue margins.

Matrix inequalities are expressed as signed blocks: a block ``(name, +1, M)``
asks for ``M > 0`` and ``(name, -1, M)`` for ``M < 0``.  Strict inequalities
are certified with slack ``EPS_CERT``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import constants as K
from .errors import (
    CouplingInfeasibleError,
    DimensionError,
    InfeasibleError,
    ObservabilityError,
    StructureEquationError,
    VerificationError,
)
from .graph import Topology, decompose, is_strongly_connected, laplacian, left_null_vector
from .linalg import as_matrix, is_nilpotent, solve_least_squares, sym_eig, symmetrize

MODES = ("linear", "finite", "fixed")


# --------------------------------------------------------------------------
# observability and the structure equation


class ObservabilityReport(NamedTuple):
    observable: bool
    rank: int
    n_tilde: int | None


def check_observability(A, C) -> ObservabilityReport:
    """Rank of the n-block observability matrix, plus the smallest block count reaching n."""
    a = as_matrix(A, "A")
    c = as_matrix(C, "C")
    n = a.shape[0]
    if a.shape != (n, n) or c.shape[1] != n:
        raise DimensionError(f"A {a.shape} and C {c.shape} are inconsistent")
    rows = []
    block = c
    n_tilde = None
    rank = 0
    for k in range(1, n + 1):
        rows.append(block)
        rank = int(np.linalg.matrix_rank(np.vstack(rows)))
        if rank == n and n_tilde is None:
            n_tilde = k
        block = block @ a
    return ObservabilityReport(rank == n, rank, n_tilde)


@dataclass(frozen=True, eq=False)
class StructureSolution:
    G0: np.ndarray
    Y0: np.ndarray
    L0: np.ndarray
    A0: np.ndarray
    n_tilde: int
    nilpotency_ok: bool
    residual: float
    cond_I_plus_G0: float

    @property
    def ill_conditioned(self) -> bool:
        return self.cond_I_plus_G0 > K.STRUCTURE_COND_MAX

    def generator(self, mu: float) -> np.ndarray:
        """G_d = mu*G0 + I."""
        return mu * self.G0 + np.eye(self.G0.shape[0])


def _null_basis(c: np.ndarray) -> np.ndarray:
    n = c.shape[1]
    if c.shape[0] == 0:
        return np.eye(n)
    _, sv, vh = np.linalg.svd(c)
    tol = max(c.shape) * np.finfo(float).eps * (sv[0] if sv.size else 0.0)
    rank = int(np.sum(sv > tol))
    return vh[rank:].T


def solve_structure_equation(A, C) -> StructureSolution:
    """Minimum-norm solution of ``G0 A - A G0 + Y0 C = -A``, ``C G0 = 0``.

    ``C G0 = 0`` is built in by writing ``G0 = N Z`` with ``N`` an
    orthonormal basis of ker C, so the minimum-norm ``Z`` is also the
    minimum-norm ``G0``.  With ``L0 = (I + G0)^{-1} Y0`` the matrix
    ``A0 = A + L0 C`` then satisfies ``A0 G0 - G0 A0 = A0``, i.e. the field
    ``x -> A0 x`` is homogeneous for every ``G_d = mu G0 + I``.
    """
    a = as_matrix(A, "A")
    c = as_matrix(C, "C")
    n = a.shape[0]
    p = c.shape[0]
    report = check_observability(a, c)
    if not report.observable:
        raise ObservabilityError(f"(A, C) is not observable (rank {report.rank} < {n})")
    nb = _null_basis(c)
    k = nb.shape[1]
    eye = np.eye(n)
    # column-major vec: vec(X M) = (M^T kron I) vec X, vec(M X) = (I kron M) vec X
    m_z = np.kron(a.T, nb) - np.kron(eye, a @ nb) if k else np.zeros((n * n, 0))
    m_y = np.kron(c.T, eye)
    m = np.hstack([m_z, m_y])
    b = -a.reshape(-1, order="F")
    sol = solve_least_squares(m, b)
    z = sol.x[: k * n].reshape((k, n), order="F")
    y0 = sol.x[k * n :].reshape((n, p), order="F")
    g0 = nb @ z
    residual = float(
        np.linalg.norm(g0 @ a - a @ g0 + y0 @ c + a) + np.linalg.norm(c @ g0)
    )
    if residual > K.STRUCTURE_RESIDUAL_TOL * (1.0 + np.linalg.norm(a)):
        raise StructureEquationError(f"structure equation residual {residual:.3e}")
    cond = float(np.linalg.cond(eye + g0))
    l0 = np.linalg.solve(eye + g0, y0)
    a0 = a + l0 @ c
    return StructureSolution(
        G0=g0,
        Y0=y0,
        L0=l0,
        A0=a0,
        n_tilde=int(report.n_tilde),
        nilpotency_ok=is_nilpotent(a0),
        residual=residual,
        cond_I_plus_G0=cond,
    )


# --------------------------------------------------------------------------
# gain sets


@dataclass(eq=False)
class GainSet:
    """Observer parameters for one mode.

    ``mu`` is used by the finite-time mode, ``mu0``/``mu_inf`` by the
    fixed-time mode.  ``P_a`` and ``Y`` are absent for injected gains.
    """

    mode: str
    Hbar: list[np.ndarray]
    zeta: np.ndarray
    nu: float
    rho: float
    G0: np.ndarray
    P_a: np.ndarray | None = None
    Y: np.ndarray | None = None
    mu: float | None = None
    mu0: float | None = None
    mu_inf: float | None = None
    certificates: dict[str, float] = field(default_factory=dict)
    unverified: bool = False
    source: str = "synthesized"

    def __post_init__(self):
        if self.mode not in MODES:
            raise DimensionError(f"unknown mode {self.mode!r}")
        self.Hbar = [as_matrix(h, f"Hbar[{i}]") for i, h in enumerate(self.Hbar)]
        self.zeta = np.asarray(self.zeta, dtype=float).reshape(-1)
        self.G0 = as_matrix(self.G0, "G0")
        if len(self.Hbar) != self.zeta.size:
            raise DimensionError(f"{len(self.Hbar)} gain blocks but zeta has {self.zeta.size} entries")
        if self.mode == "finite" and self.mu is None:
            raise DimensionError("finite mode needs mu")
        if self.mode == "fixed" and (self.mu0 is None or self.mu_inf is None):
            raise DimensionError("fixed mode needs mu0 and mu_inf")
        if self.P_a is not None:
            self.P_a = as_matrix(self.P_a, "P_a")
        if self.Y is not None:
            self.Y = as_matrix(self.Y, "Y")

    @property
    def n(self) -> int:
        return self.G0.shape[0]

    @property
    def H(self) -> list[np.ndarray]:
        return [hb / z for hb, z in zip(self.Hbar, self.zeta)]

    @property
    def weight(self) -> np.ndarray:
        """P_a, or the identity when no certificate matrix is known."""
        return self.P_a if self.P_a is not None else np.eye(self.n)

    def generator(self, mu: float) -> np.ndarray:
        return mu * self.G0 + np.eye(self.n)

    @property
    def degrees(self) -> tuple[float, ...]:
        if self.mode == "finite":
            return (float(self.mu),)
        if self.mode == "fixed":
            return (float(self.mu0), float(self.mu_inf))
        return ()

    def to_dict(self) -> dict:
        def mat(m):
            return None if m is None else np.asarray(m).tolist()

        return {
            "mode": self.mode,
            "source": self.source,
            "unverified": self.unverified,
            "mu": self.mu,
            "mu0": self.mu0,
            "mu_inf": self.mu_inf,
            "rho": self.rho,
            "nu": self.nu,
            "zeta": self.zeta.tolist(),
            "G0": mat(self.G0),
            "P_a": mat(self.P_a),
            "Y": mat(self.Y),
            "Hbar": [mat(h) for h in self.Hbar],
            "certificates": dict(self.certificates),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GainSet":
        return cls(
            mode=d["mode"],
            Hbar=[np.array(h, dtype=float) for h in d["Hbar"]],
            zeta=np.array(d["zeta"], dtype=float),
            nu=float(d["nu"]),
            rho=float(d["rho"]),
            G0=np.array(d["G0"], dtype=float),
            P_a=None if d.get("P_a") is None else np.array(d["P_a"], dtype=float),
            Y=None if d.get("Y") is None else np.array(d["Y"], dtype=float),
            mu=d.get("mu"),
            mu0=d.get("mu0"),
            mu_inf=d.get("mu_inf"),
            certificates={k: float(v) for k, v in d.get("certificates", {}).items()},
            unverified=bool(d.get("unverified", False)),
            source=d.get("source", "synthesized"),
        )


# --------------------------------------------------------------------------
# matrix-inequality blocks


def _sym(m: np.ndarray) -> np.ndarray:
    return m + m.T


def local_blocks(
    mode: str, P_a: np.ndarray, Y: np.ndarray, A: np.ndarray, C: np.ndarray, rho: float,
    generators: Sequence[np.ndarray],
) -> list[tuple[str, int, np.ndarray]]:
    """Per-mode inequalities in (P_a, Y); ``generators`` are the G_d of each degree."""
    base = _sym(P_a @ A) + _sym(Y @ C)
    blocks = [("P_a", 1, P_a)]
    if mode == "linear":
        blocks.append(("decay", -1, base + 2.0 * rho * P_a))
    elif mode == "finite":
        (g,) = generators
        mono = _sym(P_a @ g)
        blocks.append(("monotone", 1, mono))
        blocks.append(("decay", -1, base + rho * mono))
    else:
        blocks.append(("decay", -1, base + 2.0 * rho * P_a))
        half = _sym(P_a @ A) + 0.5 * _sym(Y @ C)
        for tag, g in zip(("mu0", "mu_inf"), generators):
            mono = _sym(P_a @ g)
            blocks.append((f"monotone[{tag}]", 1, mono))
            blocks.append((f"decay_half[{tag}]", -1, half + rho * mono))
    return blocks


def graph_block(P_a: np.ndarray, Delta: np.ndarray) -> tuple[str, int, np.ndarray]:
    d = as_matrix(Delta, "Delta")
    return ("graph", 1, np.kron(d + d.T, P_a))


def _block_diag(*mats: np.ndarray) -> np.ndarray:
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    out = np.zeros((rows, cols))
    r = c = 0
    for m in mats:
        out[r : r + m.shape[0], c : c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out


def closed_loop_matrix(A, C_list, H_list, L, nu: float) -> np.ndarray:
    """I (x) A + blockdiag(H_i) blockdiag(C_i) - nu L (x) I."""
    a = as_matrix(A, "A")
    n = a.shape[0]
    lap = as_matrix(L, "L")
    big_n = lap.shape[0]
    hc = _block_diag(*[as_matrix(h) @ as_matrix(c) for h, c in zip(H_list, C_list)])
    return np.kron(np.eye(big_n), a) + hc - nu * np.kron(lap, np.eye(n))


def coupling_blocks(
    gs: GainSet, A, C_list, L, nu: float | None = None
) -> list[tuple[str, int, np.ndarray]]:
    """Network-level inequalities with weight W = N diag(zeta) (x) P_a.

    On the consensus subspace these reduce to N times the local decay
    inequality; elsewhere the Laplacian term dominates once nu is large.
    """
    nu = gs.nu if nu is None else nu
    a = as_matrix(A, "A")
    n = a.shape[0]
    lap = as_matrix(L, "L")
    big_n = lap.shape[0]
    p_a = gs.weight
    dz = big_n * np.diag(gs.zeta)
    w = np.kron(dz, p_a)
    a_big = np.kron(np.eye(big_n), a)
    hc = _block_diag(*[h @ as_matrix(c) for h, c in zip(gs.H, C_list)])
    lap_big = np.kron(lap, np.eye(n))
    full = _sym(w @ (a_big + hc - nu * lap_big))
    rho = gs.rho
    if gs.mode == "linear":
        return [("coupling", -1, full + 2.0 * rho * w)]
    if gs.mode == "finite":
        g = gs.generator(gs.mu)
        return [("coupling", -1, full + rho * np.kron(dz, _sym(p_a @ g)))]
    blocks = [("coupling", -1, full + 2.0 * rho * w)]
    half = _sym(w @ (a_big + 0.5 * hc - 0.5 * nu * lap_big))
    for tag, mu in (("mu0", gs.mu0), ("mu_inf", gs.mu_inf)):
        g = gs.generator(mu)
        blocks.append((f"coupling_half[{tag}]", -1, half + rho * np.kron(dz, _sym(p_a @ g))))
    return blocks


def _margin(sign: int, m: np.ndarray) -> float:
    if m.size == 0:
        return math.inf
    lam = sym_eig(m).eigenvalues
    return float(lam[0]) if sign > 0 else float(-lam[-1])


# --------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class BlockCertificate:
    name: str
    sign: int
    margin: float
    passed: bool


@dataclass(frozen=True)
class CertificateReport:
    mode: str
    blocks: tuple[BlockCertificate, ...]

    @property
    def passed(self) -> bool:
        return all(b.passed for b in self.blocks)

    @property
    def failures(self) -> list[str]:
        return [b.name for b in self.blocks if not b.passed]

    @property
    def min_margin(self) -> float:
        return min((b.margin for b in self.blocks), default=math.inf)

    def as_dict(self) -> dict[str, float]:
        return {b.name: b.margin for b in self.blocks}

    def lines(self) -> list[str]:
        rel = {1: "> 0", -1: "< 0"}
        return [
            f"{b.name:<22} {rel[b.sign]}  margin={b.margin:+.6e}  {'PASS' if b.passed else 'FAIL'}"
            for b in self.blocks
        ]


def verify_gain_set(
    gs: GainSet,
    Delta,
    A,
    C_list: Sequence,
    L=None,
    eps: float = K.EPS_CERT,
    strict: bool = True,
) -> CertificateReport:
    """Evaluate every inequality of ``gs.mode``; with ``L`` also the coupling blocks.

    With ``strict`` a failing block raises VerificationError naming it.
    """
    if gs.P_a is None or gs.Y is None:
        raise VerificationError("gain set has no P_a/Y certificate matrices", block="P_a")
    a = as_matrix(A, "A")
    c = np.vstack([as_matrix(ci) for ci in C_list])
    gens = [gs.generator(mu) for mu in gs.degrees]
    blocks = local_blocks(gs.mode, gs.P_a, gs.Y, a, c, gs.rho, gens)
    blocks.append(graph_block(gs.P_a, Delta))
    if L is not None:
        blocks.extend(coupling_blocks(gs, a, C_list, L))
    certs = []
    for name, sign, m in blocks:
        margin = _margin(sign, m)
        certs.append(BlockCertificate(name, sign, margin, margin >= eps))
    report = CertificateReport(gs.mode, tuple(certs))
    if strict and not report.passed:
        worst = min((b for b in certs if not b.passed), key=lambda b: b.margin)
        raise VerificationError(
            f"block {worst.name} fails with margin {worst.margin:.3e}", block=worst.name
        )
    return report


def max_real_eigenvalue(M) -> float:
    """Largest real part of the spectrum of a square matrix."""
    m = as_matrix(M, "M")
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got {m.shape}")
    if m.size == 0:
        return -math.inf
    return float(np.max(np.linalg.eigvals(m).real))


# --------------------------------------------------------------------------
# alternating projections


def _svec_basis(n: int) -> list[np.ndarray]:
    basis = []
    for i in range(n):
        for j in range(i, n):
            e = np.zeros((n, n))
            e[i, j] = e[j, i] = 1.0
            basis.append(e)
    return basis


def _clip(m: np.ndarray, floor: float) -> np.ndarray:
    eig = sym_eig(m)
    lam = np.maximum(eig.eigenvalues, floor)
    return (eig.eigenvectors * lam) @ eig.eigenvectors.T


def alternating_projections(
    blocks_of: Callable[[np.ndarray], list[tuple[str, int, np.ndarray]]],
    nvars: int,
    target: float,
    max_iters: int = K.PROJECTION_MAX_ITERS,
) -> tuple[np.ndarray, float, int]:
    """Find v with every signed block of ``blocks_of(v)`` at least ``accept`` definite.

    ``blocks_of`` must be affine in v.  The iteration alternates between the
    product of shifted cones {S >= target I} and the affine image of v.
    Returns (v, margin, iterations); raises InfeasibleError on stall.
    """

    def stacked(v: np.ndarray) -> list[np.ndarray]:
        return [sign * symmetrize(m) for _, sign, m in blocks_of(v)]

    zero = np.zeros(nvars)
    f0 = stacked(zero)
    shapes = [m.shape for m in f0]
    f0_flat = np.concatenate([m.ravel() for m in f0])
    cols = []
    for j in range(nvars):
        e = zero.copy()
        e[j] = 1.0
        cols.append(np.concatenate([m.ravel() for m in stacked(e)]) - f0_flat)
    lin = np.column_stack(cols)
    pinv = np.linalg.pinv(lin)
    accept = K.PROJECTION_ACCEPT * target

    v = zero
    history: list[float] = []
    best = -math.inf
    for it in range(1, max_iters + 1):
        flat = lin @ v + f0_flat
        mats = []
        pos = 0
        for shape in shapes:
            size = shape[0] * shape[1]
            mats.append(flat[pos : pos + size].reshape(shape))
            pos += size
        margin = min(float(sym_eig(m).eigenvalues[0]) for m in mats)
        if margin >= accept:
            return v, margin, it
        best = max(best, margin)
        history.append(best)
        if len(history) > K.PROJECTION_STALL_ITERS:
            if history[-1] - history[-1 - K.PROJECTION_STALL_ITERS] < K.PROJECTION_STALL_TOL:
                raise InfeasibleError(
                    f"projection stalled at margin {best:.3e} after {it} iterations; try a smaller rho"
                )
        projected = np.concatenate([_clip(m, target).ravel() for m in mats])
        v = pinv @ (projected - f0_flat)
    raise InfeasibleError(
        f"no feasible point within {max_iters} iterations (margin {best:.3e}); try a smaller rho"
    )


# --------------------------------------------------------------------------
# synthesis


def _split_columns(m: np.ndarray, sizes: Sequence[int]) -> list[np.ndarray]:
    out = []
    start = 0
    for s in sizes:
        out.append(m[:, start : start + s].copy())
        start += s
    return out


def _grow_nu(gs: GainSet, A, C_list, L, eps: float) -> float:
    nu = K.NU_START
    while nu <= K.NU_CAP:
        if all(_margin(sign, m) >= eps for _, sign, m in coupling_blocks(gs, A, C_list, L, nu)):
            return nu
        nu *= 2.0
    raise CouplingInfeasibleError(f"coupling inequality still fails at nu = {K.NU_CAP:g}")


def _network(topology: Topology):
    if not is_strongly_connected(topology):
        from .errors import NotStronglyConnectedError

        raise NotStronglyConnectedError("topology is not strongly connected")
    lap = laplacian(topology)
    zeta = left_null_vector(lap)
    dec = decompose(lap, zeta)
    d = dec.Delta
    if d.size and sym_eig(d + d.T).eigenvalues[0] <= 0.0:
        raise InfeasibleError("Delta + Delta^T is not positive definite; graph inequality cannot hold")
    return lap, zeta, dec


def _check_degrees(mode: str, degrees: Sequence[float], n_tilde: int) -> None:
    for mu in degrees:
        if mu <= -1.0 / n_tilde:
            raise DimensionError(f"degree {mu} must exceed -1/n_tilde = {-1.0 / n_tilde:.6g}")
    if mode == "fixed" and not (degrees[0] < 0.0 < degrees[1]):
        raise DimensionError("fixed mode needs mu0 < 0 < mu_inf")


def synthesize_gains(
    A,
    C_list: Sequence,
    topology: Topology,
    rho: float,
    mode: str,
    mu: float | None = None,
    mu0: float | None = None,
    mu_inf: float | None = None,
    nu: float | None = None,
    eps: float = K.EPS_CERT,
    allow_fallback: bool = True,
) -> GainSet:
    """Synthesize and certify a GainSet.

    ``nu=None`` grows nu geometrically from 1 until the coupling
    inequality holds.  In fixed mode an infeasible joint problem falls back
    to ``Y = -C^T`` with decreasing rho (see ``fixed_fallback_gains``).
    """
    if mode not in MODES:
        raise DimensionError(f"unknown mode {mode!r}")
    if rho <= 0.0:
        raise DimensionError("rho must be positive")
    a = as_matrix(A, "A")
    cs = [as_matrix(c, f"C[{i}]") for i, c in enumerate(C_list)]
    if len(cs) != topology.node_count:
        raise DimensionError(f"{len(cs)} sensors for {topology.node_count} nodes")
    c = np.vstack(cs)
    n = a.shape[0]
    structure = solve_structure_equation(a, c)
    degrees = {"linear": (), "finite": (mu,), "fixed": (mu0, mu_inf)}[mode]
    if any(d is None for d in degrees):
        raise DimensionError(f"{mode} mode needs its degree parameters")
    _check_degrees(mode, degrees, structure.n_tilde)
    lap, zeta, dec = _network(topology)
    gens = [structure.generator(d) for d in degrees]

    basis_p = _svec_basis(n)
    ny = n * c.shape[0]

    def unpack(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p_a = sum((v[k] * b for k, b in enumerate(basis_p)), np.zeros((n, n)))
        y = v[len(basis_p) :].reshape((n, c.shape[0]), order="F")
        return p_a, y

    def blocks_of(v):
        p_a, y = unpack(v)
        return local_blocks(mode, p_a, y, a, c, rho, gens)

    try:
        v, _, _ = alternating_projections(blocks_of, len(basis_p) + ny, K.PROJECTION_TARGET)
    except InfeasibleError:
        if mode == "fixed" and allow_fallback:
            return fixed_fallback_gains(a, cs, topology, rho, mu0, mu_inf, nu=nu, eps=eps)
        raise
    p_a, y = unpack(v)
    p_a = symmetrize(p_a)
    gs = _assemble(mode, p_a, y, cs, zeta, structure.G0, rho, degrees)
    return _finish(gs, a, cs, lap, dec.Delta, nu, eps)


def _assemble(mode, p_a, y, cs, zeta, g0, rho, degrees) -> GainSet:
    hbar_full = np.linalg.solve(p_a, y)
    hbar = _split_columns(hbar_full, [ci.shape[0] for ci in cs])
    extra = {"linear": {}, "finite": {"mu": degrees[0] if degrees else None}}.get(mode)
    if extra is None:
        extra = {"mu0": degrees[0], "mu_inf": degrees[1]}
    return GainSet(
        mode=mode, Hbar=hbar, zeta=zeta, nu=K.NU_START, rho=rho, G0=g0, P_a=p_a, Y=y, **extra
    )


def _finish(gs: GainSet, a, cs, lap, delta, nu, eps) -> GainSet:
    if nu is None:
        gs.nu = _grow_nu(gs, a, cs, lap, eps)
    else:
        gs.nu = float(nu)
        worst = min(_margin(sign, m) for _, sign, m in coupling_blocks(gs, a, cs, lap))
        if worst < eps:
            raise CouplingInfeasibleError(
                f"coupling inequality fails at the fixed nu = {gs.nu:g} (margin {worst:.3e}); "
                "use the auto nu policy"
            )
    report = verify_gain_set(gs, delta, a, cs, L=lap, eps=eps, strict=True)
    gs.certificates = report.as_dict()
    return gs


def fixed_fallback_gains(
    A,
    C_list: Sequence,
    topology: Topology,
    rho: float,
    mu0: float,
    mu_inf: float,
    nu: float | None = None,
    eps: float = K.EPS_CERT,
) -> GainSet:
    """Fixed-mode gains from ``Y = -C^T``: only P_a is searched, rho is halved until feasible."""
    a = as_matrix(A, "A")
    cs = [as_matrix(c, f"C[{i}]") for i, c in enumerate(C_list)]
    c = np.vstack(cs)
    n = a.shape[0]
    structure = solve_structure_equation(a, c)
    _check_degrees("fixed", (mu0, mu_inf), structure.n_tilde)
    lap, zeta, dec = _network(topology)
    gens = [structure.generator(mu0), structure.generator(mu_inf)]
    y = -c.T
    basis_p = _svec_basis(n)
    target = K.FALLBACK_TARGET * max(float(np.linalg.norm(c.T @ c, 2)), 1.0)

    last: Exception | None = None
    r = rho
    for _ in range(K.FIXED_RHO_HALVINGS + 1):
        def blocks_of(v, r=r):
            p_a = sum((v[k] * b for k, b in enumerate(basis_p)), np.zeros((n, n)))
            return local_blocks("fixed", p_a, y, a, c, r, gens)

        try:
            v, _, _ = alternating_projections(blocks_of, len(basis_p), target)
        except InfeasibleError as exc:
            last = exc
            r *= 0.5
            continue
        p_a = symmetrize(sum((v[k] * b for k, b in enumerate(basis_p)), np.zeros((n, n))))
        gs = _assemble("fixed", p_a, y, cs, zeta, structure.G0, r, (mu0, mu_inf))
        gs.source = "synthesized (Y = -C^T fallback)"
        try:
            return _finish(gs, a, cs, lap, dec.Delta, nu, eps)
        except VerificationError as exc:
            last = exc
            r *= 0.5
    raise InfeasibleError(f"Y = -C^T fallback failed down to rho = {r:.3e}: {last}")
