"""Plant, sensors and observer right-hand sides.

Node ``i`` runs

    xhat_i' = A xhat_i + B u + gamma(t, xhat_i) + out_i + cons_i

with ``omega_i = C_i xhat_i - y_i`` and ``theta_i = sum_j a_ij (xhat_j - xhat_i)``.
The linear observer uses ``out_i = H_i omega_i``, ``cons_i = nu theta_i`` and
drops ``gamma``; the homogeneous observers scale both terms by powers of
``|omega_i|`` and of the canonical norm of ``theta_i``.  Products such as
``g(|omega|) H omega`` are continuous at zero even though ``g`` is not, so
they are returned as exactly zero there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from . import constants as K
from .errors import DimensionError, ModelError, TopologyError
from .graph import Topology, laplacian
from .homogeneity import Dilation, dilate, hom_norm
from .linalg import as_matrix, as_vector, mat_exp
from .synthesis import GainSet


# --------------------------------------------------------------------------
# catalog of model functions


@dataclass(frozen=True)
class Signal:
    """Time signal ``t -> R^dim`` from the catalog.

    ``zero`` is identically zero.  ``sinusoid`` has per-component
    ``amplitude``, ``frequency`` and ``kind`` ("sin" or "cos") lists.
    """

    name: str
    dim: int
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in ("zero", "sinusoid"):
            raise ModelError(f"unknown signal {self.name!r}")
        if self.name == "sinusoid":
            for key in ("amplitude", "frequency", "kind"):
                if len(self.params.get(key, ())) != self.dim:
                    raise ModelError(f"sinusoid needs {self.dim} entries in {key!r}")
            if any(k not in ("sin", "cos") for k in self.params["kind"]):
                raise ModelError("sinusoid kind must be 'sin' or 'cos'")

    def __call__(self, t: float) -> np.ndarray:
        if self.name == "zero":
            return np.zeros(self.dim)
        p = self.params
        out = np.empty(self.dim)
        for k in range(self.dim):
            f = math.sin if p["kind"][k] == "sin" else math.cos
            out[k] = p["amplitude"][k] * f(p["frequency"][k] * t)
        return out

    def bound(self) -> float:
        """sup_t |q(t)|, bounded above by the amplitude vector norm."""
        if self.name == "zero":
            return 0.0
        return float(np.linalg.norm(self.params["amplitude"]))

    def to_dict(self) -> dict:
        return {"name": self.name, "params": {k: list(v) for k, v in self.params.items()}}


@dataclass(frozen=True)
class Nonlinearity:
    """State nonlinearity ``gamma(t, x)``.

    ``holder`` is ``coeff * direction * |x|^exponent`` (Euclidean norm).
    """

    name: str
    dim: int
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in ("zero", "holder"):
            raise ModelError(f"unknown nonlinearity {self.name!r}")
        if self.name == "holder":
            if len(self.params.get("direction", ())) != self.dim:
                raise ModelError(f"holder nonlinearity needs a length-{self.dim} direction")
            if float(self.params.get("exponent", -1.0)) <= 0.0:
                raise ModelError("holder exponent must be positive")

    @property
    def is_zero(self) -> bool:
        return self.name == "zero" or float(self.params.get("coeff", 0.0)) == 0.0

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        if self.name == "zero":
            return np.zeros(self.dim)
        p = self.params
        r = math.sqrt(float(x @ x))
        return float(p["coeff"]) * r ** float(p["exponent"]) * np.asarray(p["direction"], dtype=float)

    def batch(self, t: float, xs: np.ndarray) -> np.ndarray:
        """Row-wise evaluation on an (N, n) array."""
        if self.name == "zero":
            return np.zeros_like(xs)
        p = self.params
        r = np.sqrt(np.einsum("ij,ij->i", xs, xs))
        scale = float(p["coeff"]) * r ** float(p["exponent"])
        return scale[:, None] * np.asarray(p["direction"], dtype=float)[None, :]

    def to_dict(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}


def make_signal(spec: Mapping | None, dim: int) -> Signal:
    if spec is None:
        return Signal("zero", dim)
    return Signal(spec["name"], dim, dict(spec.get("params", {})))


def make_nonlinearity(spec: Mapping | None, dim: int) -> Nonlinearity:
    if spec is None:
        return Nonlinearity("zero", dim)
    return Nonlinearity(spec["name"], dim, dict(spec.get("params", {})))


# --------------------------------------------------------------------------
# models


@dataclass(frozen=True, eq=False)
class PlantModel:
    A: np.ndarray
    B: np.ndarray
    gamma: Nonlinearity
    q_x: Signal
    u: Signal

    def __post_init__(self):
        a = as_matrix(self.A, "A")
        b = np.array(self.B, dtype=float).reshape(a.shape[0], -1)
        if a.shape[0] != a.shape[1]:
            raise DimensionError(f"A must be square, got {a.shape}")
        if self.gamma.dim != a.shape[0] or self.q_x.dim != a.shape[0]:
            raise DimensionError("gamma and q_x must act on R^n")
        if self.u.dim != b.shape[1]:
            raise DimensionError(f"u has dimension {self.u.dim}, B has {b.shape[1]} columns")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "B", b)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def without_perturbation(self) -> "PlantModel":
        return PlantModel(self.A, self.B, self.gamma, Signal("zero", self.n), self.u)


@dataclass(frozen=True, eq=False)
class SensorModel:
    C: tuple[np.ndarray, ...]
    q_y: tuple[Signal, ...]

    def __post_init__(self):
        cs = tuple(as_matrix(c, f"C[{i}]") for i, c in enumerate(self.C))
        if not cs:
            raise DimensionError("at least one sensor is required")
        n = cs[0].shape[1]
        for i, c in enumerate(cs):
            if c.shape[1] != n:
                raise DimensionError(f"C[{i}] has {c.shape[1]} columns, expected {n}")
        if len(self.q_y) != len(cs):
            raise DimensionError("one output perturbation per sensor is required")
        for i, (c, q) in enumerate(zip(cs, self.q_y)):
            if q.dim != c.shape[0]:
                raise DimensionError(f"q_y[{i}] has dimension {q.dim}, C[{i}] has {c.shape[0]} rows")
        object.__setattr__(self, "C", cs)
        object.__setattr__(self, "q_y", tuple(self.q_y))

    @property
    def node_count(self) -> int:
        return len(self.C)

    @property
    def stacked(self) -> np.ndarray:
        return np.vstack(self.C)

    @property
    def rows(self) -> list[int]:
        return [c.shape[0] for c in self.C]

    def outputs(self, t: float, x: np.ndarray) -> list[np.ndarray]:
        return [c @ x + q(t) for c, q in zip(self.C, self.q_y)]

    def without_perturbation(self) -> "SensorModel":
        return SensorModel(self.C, tuple(Signal("zero", q.dim) for q in self.q_y))


def plant_rhs(pm: PlantModel, t: float, x) -> np.ndarray:
    x = as_vector(x, "x")
    if x.size != pm.n:
        raise DimensionError(f"x has length {x.size}, plant has n = {pm.n}")
    g = pm.gamma(t, x)
    if not np.all(np.isfinite(g)):
        raise ModelError(f"gamma returned non-finite values at t = {t}")
    return pm.A @ x + pm.B @ pm.u(t) + g + pm.q_x(t)


# --------------------------------------------------------------------------
# homogeneous gain terms


def _output_gain_matrix(mu: float, g0: np.ndarray, log_r: float) -> np.ndarray:
    n = g0.shape[0]
    if not np.any(g0):
        return math.exp(mu * log_r) * np.eye(n)
    return mat_exp(mu * (g0 + np.eye(n)), log_r)


def homogeneous_output_gain(omega_i, mu: float, G0, H_i) -> np.ndarray:
    """g(|omega|) H omega with g(r) = exp(mu (G0 + I) ln r); zero at omega = 0."""
    w = as_vector(omega_i, "omega")
    h = as_matrix(H_i, "H_i")
    r = math.sqrt(float(w @ w))
    if r <= K.SINGULAR_FLOOR:
        return np.zeros(h.shape[0])
    return _output_gain_matrix(mu, as_matrix(G0, "G0"), math.log(r)) @ (h @ w)


def homogeneous_consensus_gain(theta_i, mu: float, dil: Dilation, nu: float) -> np.ndarray:
    """nu |theta|_d^mu theta; zero at theta = 0."""
    th = as_vector(theta_i, "theta")
    if not np.any(th):
        return np.zeros_like(th)
    norm = hom_norm(dil, th).value
    if norm <= K.SINGULAR_FLOOR:
        return np.zeros_like(th)
    return nu * norm**mu * th


def bilimit_gains(
    omega_i, theta_i, mu0: float, mu_inf: float, G0, dil0: Dilation, dil_inf: Dilation, H_i, nu: float
) -> tuple[np.ndarray, np.ndarray]:
    """Two-degree averages of the output and consensus terms."""
    w = as_vector(omega_i, "omega")
    th = as_vector(theta_i, "theta")
    h = as_matrix(H_i, "H_i")
    g0 = as_matrix(G0, "G0")
    r = math.sqrt(float(w @ w))
    if r <= K.SINGULAR_FLOOR:
        out = np.zeros(h.shape[0])
    else:
        lr = math.log(r)
        g = 0.5 * (_output_gain_matrix(mu0, g0, lr) + _output_gain_matrix(mu_inf, g0, lr))
        out = g @ (h @ w)
    if not np.any(th):
        cons = np.zeros_like(th)
    else:
        n0 = hom_norm(dil0, th).value
        ninf = hom_norm(dil_inf, th).value
        if min(n0, ninf) <= K.SINGULAR_FLOOR:
            cons = np.zeros_like(th)
        else:
            cons = nu * 0.5 * (n0**mu0 + ninf**mu_inf) * th
    return out, cons


def dilations(gs: GainSet) -> list[Dilation]:
    """One dilation per homogeneity degree, weighted by P_a (identity if absent)."""
    return [Dilation(gs.generator(mu), gs.weight) for mu in gs.degrees]


# --------------------------------------------------------------------------
# per-node reference law


def observer_rhs(
    mode: str,
    i: int,
    t: float,
    xhat_i,
    y_i,
    neighbor_estimates: Mapping[int, Any],
    gs: GainSet,
    pm: PlantModel,
    sm: SensorModel,
    topology: Topology,
) -> np.ndarray:
    """Right-hand side of node ``i``; ``neighbor_estimates`` maps sender -> estimate."""
    if mode != gs.mode:
        raise ModelError(f"mode {mode!r} does not match gain set mode {gs.mode!r}")
    senders = topology.neighbors(i)
    if sorted(neighbor_estimates) != senders:
        raise TopologyError(
            f"node {i} hears {senders}, got estimates from {sorted(neighbor_estimates)}"
        )
    xh = as_vector(xhat_i, "xhat_i")
    adj = topology.adjacency
    theta = np.zeros_like(xh)
    for j in senders:
        theta = theta + adj[i, j] * (as_vector(neighbor_estimates[j]) - xh)
    omega = sm.C[i] @ xh - as_vector(y_i, "y_i")
    h_i = gs.H[i]
    rhs = pm.A @ xh + pm.B @ pm.u(t)
    if mode == "linear":
        return rhs + h_i @ omega + gs.nu * theta
    rhs = rhs + pm.gamma(t, xh)
    dils = dilations(gs)
    if mode == "finite":
        out = homogeneous_output_gain(omega, gs.mu, gs.G0, h_i)
        cons = homogeneous_consensus_gain(theta, gs.mu, dils[0], gs.nu)
    else:
        out, cons = bilimit_gains(omega, theta, gs.mu0, gs.mu_inf, gs.G0, dils[0], dils[1], h_i, gs.nu)
    return rhs + out + cons


# --------------------------------------------------------------------------
# vectorized network evaluator


def _block_diag(mats: Sequence[np.ndarray]) -> np.ndarray:
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    out = np.zeros((rows, cols))
    r = c = 0
    for m in mats:
        out[r : r + m.shape[0], c : c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out


class NetworkObserver:
    """All N node laws evaluated at once on the stacked estimate.

    Algebraically identical to calling ``observer_rhs`` per node; the
    common case ``G0 = 0`` (so every dilation is the Euler one) avoids
    matrix exponentials and bisection.
    """

    def __init__(
        self,
        gs: GainSet,
        pm: PlantModel,
        sm: SensorModel,
        topology: Topology,
        plant_matrix: np.ndarray | None = None,
    ):
        if sm.node_count != topology.node_count or len(gs.H) != topology.node_count:
            raise DimensionError("sensor, gain and topology node counts differ")
        self.gs = gs
        self.pm = pm
        self.sm = sm
        self.topology = topology
        self.mode = gs.mode
        self.N = topology.node_count
        self.n = pm.n
        self.A = pm.A if plant_matrix is None else as_matrix(plant_matrix, "A")
        self.L = laplacian(topology)
        self.C_stack = sm.stacked
        self.H_blk = _block_diag(gs.H)
        self.starts = np.cumsum([0] + sm.rows[:-1])
        self.rows = np.array(sm.rows)
        # row_sum[i] sums the output rows of node i
        self.row_sum = _block_diag([np.ones((1, r)) for r in sm.rows])
        self.q_y_live = [
            (q, s, r) for q, s, r in zip(sm.q_y, self.starts, self.rows) if q.name != "zero"
        ]
        self.drive = None if pm.u.name == "zero" else pm.B
        self.degrees = gs.degrees
        self.weight = gs.weight
        self.euler = not np.any(gs.G0)
        self.dils = dilations(gs) if self.mode != "linear" else []
        self.with_gamma = self.mode != "linear" and not pm.gamma.is_zero
        self.row_node = np.repeat(np.arange(self.N), self.rows)

    # Plant and observers share these row-wise kernels, so that an exact
    # estimate stays exact: a one-ulp mismatch would be amplified by the
    # non-Lipschitz gains into chatter around e = 0.

    def _drift(self, xs: np.ndarray) -> np.ndarray:
        return np.einsum("kj,ij->ki", xs, self.A)

    def _sensor_rows(self, xs: np.ndarray) -> np.ndarray:
        """Row r of the stacked output, evaluated on the state of its node."""
        return np.einsum("rj,rj->r", self.C_stack, xs[self.row_node])

    def plant_derivative(self, t: float, x: np.ndarray, with_gamma: bool = True) -> np.ndarray:
        dx = self._drift(x[None, :])
        if self.drive is not None:
            dx = dx + (self.drive @ self.pm.u(t))[None, :]
        if with_gamma and not self.pm.gamma.is_zero:
            dx = dx + self.pm.gamma.batch(t, x[None, :])
        dx = dx[0]
        if self.pm.q_x.name != "zero":
            dx = dx + self.pm.q_x(t)
        return dx

    def outputs(self, t: float, x: np.ndarray) -> np.ndarray:
        y = self._sensor_rows(np.repeat(x[None, :], self.N, axis=0))
        for q, s, r in self.q_y_live:
            y[s : s + r] += q(t)
        return y

    def _factor(self, norms: np.ndarray) -> np.ndarray:
        """Average of norms**mu over the degrees, zero where the norm vanishes."""
        live = norms > K.SINGULAR_FLOOR
        safe = np.where(live, norms, 1.0)
        if len(self.degrees) == 1:
            f = safe ** self.degrees[0]
        else:
            f = 0.5 * (safe ** self.degrees[0] + safe ** self.degrees[1])
        return f * live

    def _output_term(self, omega: np.ndarray) -> np.ndarray:
        if self.mode == "linear":
            return self.H_blk @ omega
        r = np.sqrt(self.row_sum @ (omega * omega))
        if self.euler:
            return self.H_blk @ ((self.row_sum.T @ self._factor(r)) * omega)
        out = np.zeros(self.N * self.n)
        for i in range(self.N):
            s, p = self.starts[i], self.rows[i]
            if r[i] <= K.SINGULAR_FLOOR:
                continue
            lr = math.log(r[i])
            g = sum(_output_gain_matrix(mu, self.gs.G0, lr) for mu in self.degrees) / len(self.degrees)
            out[i * self.n : (i + 1) * self.n] = g @ (self.gs.H[i] @ omega[s : s + p])
        return out

    def _consensus_term(self, theta: np.ndarray) -> np.ndarray:
        nu = self.gs.nu
        if self.mode == "linear":
            return nu * theta
        if self.euler:
            # G_d = I, so the canonical norm is the P_a norm itself
            norms = np.sqrt(np.sum((theta @ self.weight) * theta, axis=1))
            return (nu * self._factor(norms))[:, None] * theta
        factor = np.zeros(self.N)
        for i in range(self.N):
            if not np.any(theta[i]):
                continue
            vals = [hom_norm(d, theta[i]).value for d in self.dils]
            if min(vals) <= K.SINGULAR_FLOOR:
                continue
            factor[i] = sum(v**mu for v, mu in zip(vals, self.degrees)) / len(self.degrees)
        return nu * factor[:, None] * theta

    def rhs(self, t: float, xhat: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Stacked observer derivative for stacked estimates ``xhat``."""
        xs = xhat.reshape(self.N, self.n)
        omega = self._sensor_rows(xs) - self.outputs(t, x)
        theta = -(self.L @ xs)
        drift = self._drift(xs)
        if self.drive is not None:
            drift = drift + (self.drive @ self.pm.u(t))[None, :]
        if self.with_gamma:
            drift = drift + self.pm.gamma.batch(t, xs)
        return (drift + self._consensus_term(theta)).ravel() + self._output_term(omega)

    def error_rhs(self, t: float, e: np.ndarray, x: np.ndarray) -> np.ndarray:
        """d/dt of e = xhat - 1 (x) x along the true plant trajectory through x."""
        xhat = e + np.tile(x, self.N)
        return self.rhs(t, xhat, x) - np.tile(self.plant_derivative(t, x), self.N)


def stacked_error_rhs(
    mode: str,
    t: float,
    e,
    x,
    gs: GainSet,
    pm: PlantModel,
    sm: SensorModel,
    topology: Topology,
    plant_matrix=None,
) -> np.ndarray:
    """Stacked error field.

    ``plant_matrix`` replaces A in both plant and observers; passing
    ``A0 = A + L0 C`` gives the field without the ``-(I (x) L0 C) e`` term.
    """
    if mode != gs.mode:
        raise ModelError(f"mode {mode!r} does not match gain set mode {gs.mode!r}")
    net = NetworkObserver(gs, pm, sm, topology, plant_matrix=plant_matrix)
    e = as_vector(e, "e")
    x = as_vector(x, "x")
    if e.size != net.N * net.n:
        raise DimensionError(f"e has length {e.size}, expected {net.N * net.n}")
    return net.error_rhs(t, e, x)


# --------------------------------------------------------------------------
# Hoelder-constant sampling


@dataclass(frozen=True)
class HolderEstimate:
    tau_hat: float
    samples_used: int
    box: float


def holder_ratio(gamma: Callable, xhat, x, mu: float, dil: Dilation, t: float = 0.0) -> float | None:
    """|d(-ln r)(gamma(xhat) - gamma(x))|_P / r^mu with r = |xhat - x|_d; None if xhat = x."""
    xhat = as_vector(xhat)
    x = as_vector(x)
    diff = xhat - x
    if not np.any(diff):
        return None
    r = hom_norm(dil, diff)
    dg = np.asarray(gamma(t, xhat), dtype=float) - np.asarray(gamma(t, x), dtype=float)
    z = dilate(dil, -r.s_x, dg)
    return math.sqrt(max(float(z @ dil.P @ z), 0.0)) / r.value**mu


def estimate_holder_constant(
    gamma: Callable,
    mu: float,
    dil: Dilation,
    samples: int = 1000,
    seed: int = 0,
    box: float = 10.0,
    t: float = 0.0,
) -> HolderEstimate:
    """Largest sampled Hoelder ratio over pairs drawn uniformly from [-box, box]^n.

    This is a sample maximum, not a certified supremum.
    """
    rng = np.random.default_rng(seed)
    tau = 0.0
    used = 0
    for _ in range(samples):
        xhat = rng.uniform(-box, box, dil.dim)
        x = rng.uniform(-box, box, dil.dim)
        ratio = holder_ratio(gamma, xhat, x, mu, dil, t)
        if ratio is None:
            continue
        used += 1
        tau = max(tau, ratio)
    return HolderEstimate(tau, used, box)
