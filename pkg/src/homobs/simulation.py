"""Fixed-step integration of the plant and the observer network, plus metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import constants as K
from .errors import DimensionError, DivergenceError
from .graph import Topology
from .homogeneity import Dilation, hom_norm
from .observer import NetworkObserver, PlantModel, SensorModel
from .synthesis import GainSet

METHODS = ("euler", "rk4")


@dataclass(eq=False)
class SimConfig:
    gains: GainSet
    t_end: float
    h: float = K.DEFAULT_STEP
    x0: np.ndarray = field(default_factory=lambda: np.zeros(0))
    xhat0: list[np.ndarray] | None = None
    method: str = "euler"

    def __post_init__(self):
        if self.h <= 0.0 or self.t_end <= 0.0:
            raise DimensionError("h and t_end must be positive")
        steps = round(self.t_end / self.h)
        if steps < 1 or abs(steps * self.h - self.t_end) > 1e-9 * self.t_end:
            raise DimensionError(f"t_end = {self.t_end} is not a whole number of steps h = {self.h}")
        if self.method not in METHODS:
            raise DimensionError(f"unknown method {self.method!r}")
        self.x0 = np.asarray(self.x0, dtype=float).reshape(-1)

    @property
    def mode(self) -> str:
        return self.gains.mode

    @property
    def steps(self) -> int:
        return int(round(self.t_end / self.h))


@dataclass(eq=False)
class Trajectory:
    times: np.ndarray
    x: np.ndarray  # (steps+1, n)
    xhat: np.ndarray  # (steps+1, N, n)

    @property
    def e(self) -> np.ndarray:
        """Per-node errors, shape (steps+1, N, n)."""
        return self.xhat - self.x[:, None, :]

    @property
    def e_stacked(self) -> np.ndarray:
        return self.e.reshape(self.e.shape[0], -1)

    @property
    def node_norms(self) -> np.ndarray:
        return np.linalg.norm(self.e, axis=2)

    @property
    def e_norm(self) -> np.ndarray:
        return np.linalg.norm(self.e_stacked, axis=1)

    @property
    def h(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0


def integrate(cfg: SimConfig, pm: PlantModel, sm: SensorModel, topology: Topology) -> Trajectory:
    """Integrate plant and observers with a fixed step.

    The state norm is checked every step; above ``DIVERGENCE_NORM`` (or on
    non-finite values) a DivergenceError carries the step index.
    """
    net = NetworkObserver(cfg.gains, pm, sm, topology)
    n, big_n = pm.n, topology.node_count
    if cfg.x0.size != n:
        raise DimensionError(f"x0 has length {cfg.x0.size}, expected {n}")
    if cfg.xhat0 is None:
        xh0 = np.zeros(big_n * n)
    else:
        if len(cfg.xhat0) != big_n:
            raise DimensionError(f"{len(cfg.xhat0)} initial estimates for {big_n} nodes")
        xh0 = np.concatenate([np.asarray(v, dtype=float).reshape(n) for v in cfg.xhat0])

    plant = net.plant_derivative

    steps = cfg.steps
    h = cfg.h
    xs = np.empty((steps + 1, n))
    xhs = np.empty((steps + 1, big_n * n))
    x, xh = cfg.x0.copy(), xh0
    xs[0], xhs[0] = x, xh
    for k in range(steps):
        t = k * h
        if cfg.method == "euler":
            x_next = x + h * plant(t, x)
            xh = xh + h * net.rhs(t, xh, x)
            x = x_next
        else:
            k1x, k1o = plant(t, x), net.rhs(t, xh, x)
            xm, om = x + 0.5 * h * k1x, xh + 0.5 * h * k1o
            k2x, k2o = plant(t + 0.5 * h, xm), net.rhs(t + 0.5 * h, om, xm)
            xm, om = x + 0.5 * h * k2x, xh + 0.5 * h * k2o
            k3x, k3o = plant(t + 0.5 * h, xm), net.rhs(t + 0.5 * h, om, xm)
            xm, om = x + h * k3x, xh + h * k3o
            k4x, k4o = plant(t + h, xm), net.rhs(t + h, om, xm)
            x = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            xh = xh + (h / 6.0) * (k1o + 2.0 * k2o + 2.0 * k3o + k4o)
        size = max(float(np.max(np.abs(xh))), float(np.max(np.abs(x))))
        if not size <= K.DIVERGENCE_NORM:
            raise DivergenceError(f"state norm exceeded {K.DIVERGENCE_NORM:g} at step {k + 1}", step=k + 1)
        xs[k + 1], xhs[k + 1] = x, xh
    times = h * np.arange(steps + 1)
    return Trajectory(times, xs, xhs.reshape(steps + 1, big_n, n))


def settling_time(tr: Trajectory, threshold: float) -> float | None:
    """First sampled time after which |e| stays at or below ``threshold``; None if never."""
    if threshold <= 0.0:
        raise DimensionError("threshold must be positive")
    e = tr.e_norm
    above = np.flatnonzero(~(e <= threshold))
    if above.size == 0:
        return float(tr.times[0])
    last = int(above[-1])
    if last == e.size - 1:
        return None
    return float(tr.times[last + 1])


def tail_sup(tr: Trajectory, window: float) -> float:
    """sup |e| over the final ``window`` seconds."""
    t_end = float(tr.times[-1])
    if not 0.0 < window < t_end - tr.times[0] + 1e-12:
        raise DimensionError(f"window {window} must lie in (0, {t_end}]")
    mask = tr.times >= t_end - window - 1e-12
    return float(np.max(tr.e_norm[mask]))


def lyapunov_samples(
    tr: Trajectory, dil_tilde: Dilation, decimation: int = K.LYAPUNOV_DECIMATION
) -> tuple[np.ndarray, np.ndarray]:
    """(times, |e(t_k)|_d) at every ``decimation``-th step."""
    idx = np.arange(0, tr.times.size, decimation)
    es = tr.e_stacked
    vals = np.array([hom_norm(dil_tilde, es[k]).value for k in idx])
    return tr.times[idx], vals


def first_increase(values: Sequence[float], floor: float, tol: float = 1e-10) -> int | None:
    """Index of the first sample that rises by more than ``tol`` before dropping below ``floor``."""
    vals = np.asarray(values, dtype=float)
    for k in range(1, vals.size):
        if vals[k - 1] < floor:
            return None
        if vals[k] > vals[k - 1] + tol:
            return k
    return None
