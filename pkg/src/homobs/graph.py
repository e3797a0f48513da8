"""Directed sensor-network topology.

Nodes are numbered ``0 .. N-1``.  An edge ``(i, j)`` means node ``j``
sends its estimate to node ``i``; row ``i`` of the adjacency matrix marks
the senders heard by ``i``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import constants as K
from .errors import DecompositionError, NotStronglyConnectedError, TopologyError
from .linalg import as_matrix


@dataclass(frozen=True)
class Topology:
    node_count: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if int(self.node_count) < 1:
            raise TopologyError("node_count must be a positive integer")
        object.__setattr__(self, "node_count", int(self.node_count))
        edges = frozenset((int(i), int(j)) for i, j in self.edges)
        for i, j in edges:
            if i == j:
                raise TopologyError(f"self-loop ({i}, {j}) is not allowed")
            if not (0 <= i < self.node_count and 0 <= j < self.node_count):
                raise TopologyError(f"edge ({i}, {j}) references a missing node")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable) -> "Topology":
        return cls(node_count, frozenset(tuple(e) for e in edges))

    @classmethod
    def ring(cls, node_count: int) -> "Topology":
        """Directed cycle 0 -> 1 -> ... -> N-1 -> 0 (node i hears node i-1)."""
        n = node_count
        return cls(n, frozenset(((i + 1) % n, i) for i in range(n)) if n > 1 else frozenset())

    @property
    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.node_count, self.node_count))
        for i, j in self.edges:
            a[i, j] = 1.0
        return a

    def neighbors(self, i: int) -> list[int]:
        """Senders heard by node ``i``, ascending."""
        return sorted(j for (r, j) in self.edges if r == i)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def laplacian(topology: Topology) -> np.ndarray:
    a = topology.adjacency
    return np.diag(a.sum(axis=1)) - a


def _reachable(adj: np.ndarray, start: int) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in np.flatnonzero(adj[u]):
            v = int(v)
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def is_strongly_connected(topology: Topology) -> bool:
    # forward/backward search from node 0 (Kosaraju with a single root)
    flow = topology.adjacency.T  # flow[j, i] = 1 iff j sends to i
    n = topology.node_count
    return len(_reachable(flow, 0)) == n and len(_reachable(flow.T, 0)) == n


def left_null_vector(lap) -> np.ndarray:
    """Left 0-eigenvector zeta of a Laplacian, normalized to sum 1."""
    lap = as_matrix(lap, "L")
    n = lap.shape[0]
    if n == 1:
        return np.ones(1)
    _, sv, vh = np.linalg.svd(lap.T)
    scale = max(float(sv[0]), 1.0)
    null_dim = int(np.sum(sv <= K.NULLSPACE_REL_TOL * scale))
    if null_dim != 1:
        raise NotStronglyConnectedError(
            f"left null space of L has dimension {null_dim}, expected 1"
        )
    zeta = vh[-1]
    zeta = zeta / zeta.sum()
    if np.any(zeta <= 0.0):
        raise NotStronglyConnectedError("left null vector has non-positive entries")
    residual = np.linalg.norm(zeta @ lap)
    if residual > K.ZETA_TOL * scale:
        raise NotStronglyConnectedError(f"zeta^T L residual {residual:.2e} too large")
    return zeta


@dataclass(frozen=True, eq=False)
class LaplacianDecomposition:
    L: np.ndarray
    zeta: np.ndarray
    T: np.ndarray
    T_inv: np.ndarray
    Delta: np.ndarray

    @property
    def Y1(self) -> np.ndarray:
        return self.T[:, 1:]

    @property
    def Y2(self) -> np.ndarray:
        return self.T_inv[1:, :].T


def _complement_basis(zeta: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``zeta`` (modified Gram-Schmidt)."""
    n = zeta.size
    basis = [zeta / np.linalg.norm(zeta)]
    for k in range(n):
        v = np.zeros(n)
        v[k] = 1.0
        for b in basis:
            v = v - (b @ v) * b
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            basis.append(v / norm)
        if len(basis) == n:
            break
    return np.column_stack(basis[1:]) if n > 1 else np.zeros((n, 0))


def decompose(lap, zeta) -> LaplacianDecomposition:
    """Similarity T^{-1} L T = blockdiag(0, Delta) with T = (1_N, Y1)."""
    lap = as_matrix(lap, "L")
    zeta = np.asarray(zeta, dtype=float).reshape(-1)
    n = lap.shape[0]
    if n == 1:
        one = np.ones((1, 1))
        return LaplacianDecomposition(lap, zeta, one, one.copy(), np.zeros((0, 0)))
    y1 = _complement_basis(zeta)
    t = np.column_stack([np.ones(n), y1])
    if np.linalg.cond(t) > 1e12:
        raise DecompositionError("transformation T is numerically singular")
    t_inv = np.linalg.inv(t)
    blocks = t_inv @ lap @ t
    delta = blocks[1:, 1:].copy()
    scale = 1.0 + np.linalg.norm(lap)
    off = max(abs(blocks[0, 0]), np.abs(blocks[0, 1:]).max(), np.abs(blocks[1:, 0]).max())
    if off > K.DECOMPOSITION_TOL * scale:
        raise DecompositionError(f"T^-1 L T is not block diagonal (off-block {off:.2e})")
    return LaplacianDecomposition(lap, zeta, t, t_inv, delta)
