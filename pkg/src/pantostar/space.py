"""Continuous piecewise-linear functions on the star graph.

A :class:`Mesh` stores one sorted node array per edge.  The global node vector
concatenates the edges in order, so the vertex appears once at the end of
edge 1 and once at the start of every outgoing edge; :class:`DofMap` ties
those copies to a single unknown.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .delay import EdgePoint


def mandatory_nodes(system, j: int) -> list[float]:
    if j == 1:
        return [system.T1 / system.q]
    return [(system.q - 1.0) * system.T1, system.l(j)]


def _insert_exact(nodes: np.ndarray, points: Sequence[float], length: float) -> np.ndarray:
    tol = 1e-14 * length
    nodes = nodes.copy()
    for p in points:
        k = int(np.argmin(np.abs(nodes - p)))
        if abs(nodes[k] - p) <= tol:
            nodes[k] = p
        else:
            nodes = np.insert(nodes, np.searchsorted(nodes, p), p)
    return nodes


@dataclass(frozen=True, eq=False)
class Mesh:
    nodes: tuple[np.ndarray, ...]

    def __post_init__(self):
        for x in self.nodes:
            if x.size < 2 or np.any(np.diff(x) <= 0.0):
                raise ValueError("mesh nodes must be strictly increasing with at least one cell")
            x.setflags(write=False)

    @classmethod
    def from_nodes(cls, system, nodes: Sequence[Sequence[float]]) -> "Mesh":
        """Build a mesh from explicit node lists, checking endpoints and mandatory nodes."""
        arrays = []
        for j, x in zip(system.edges, nodes):
            x = np.asarray(x, dtype=float)
            Tj = system.horizon(j)
            if x[0] != 0.0 or abs(x[-1] - Tj) > 1e-14 * Tj:
                raise ValueError(f"edge {j} nodes must span [0, {Tj}]")
            for p in mandatory_nodes(system, j):
                if not np.any(x == p):
                    raise ValueError(f"edge {j} lacks mandatory node {p}")
            arrays.append(x.copy())
        if len(arrays) != system.m:
            raise ValueError(f"expected {system.m} node lists, got {len(nodes)}")
        return cls(tuple(arrays))

    def edge(self, j: int) -> np.ndarray:
        return self.nodes[j - 1]

    @property
    def m(self) -> int:
        return len(self.nodes)

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum([x.size for x in self.nodes])])

    def offset(self, j: int) -> int:
        return int(self.offsets[j - 1])

    @property
    def n_nodes(self) -> int:
        return int(sum(x.size for x in self.nodes))

    def h_max(self) -> float:
        return max(float(np.diff(x).max()) for x in self.nodes)


def build_mesh(system, n: int) -> Mesh:
    """Uniform ``n``-cell grid on every edge, plus the mandatory breakpoints."""
    if n < 2:
        raise ValueError("resolution n must be at least 2")
    nodes = []
    for j in system.edges:
        Tj = system.horizon(j)
        grid = np.linspace(0.0, Tj, n + 1)
        grid[-1] = Tj
        nodes.append(_insert_exact(grid, mandatory_nodes(system, j), Tj))
    return Mesh(tuple(nodes))


def refine(mesh: Mesh) -> Mesh:
    """Bisect every cell."""
    out = []
    for x in mesh.nodes:
        y = np.empty(2 * x.size - 1)
        y[0::2] = x
        y[1::2] = 0.5 * (x[:-1] + x[1:])
        out.append(y)
    return Mesh(tuple(out))


def locate(nodes: np.ndarray, t, side: str = "right") -> np.ndarray:
    """Index of the cell holding ``t``; at a node, ``side`` picks the neighbour."""
    i = np.searchsorted(nodes, t, side=side) - 1
    return np.clip(i, 0, nodes.size - 2)


@dataclass(frozen=True, eq=False)
class GraphFunction:
    mesh: Mesh
    values: tuple[np.ndarray, ...]

    @classmethod
    def from_global(cls, mesh: Mesh, vec: np.ndarray) -> "GraphFunction":
        off = mesh.offsets
        vec = np.asarray(vec, dtype=float)
        return cls(mesh, tuple(vec[off[k]:off[k + 1]].copy() for k in range(mesh.m)))

    @classmethod
    def zeros(cls, mesh: Mesh) -> "GraphFunction":
        return cls(mesh, tuple(np.zeros(x.size) for x in mesh.nodes))

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate(self.values)

    def edge_values(self, j: int) -> np.ndarray:
        return self.values[j - 1]

    def vertex_defect(self) -> float:
        if self.mesh.m == 1:
            return 0.0
        v = self.values[0][-1]
        return max(abs(self.values[k][0] - v) for k in range(1, self.mesh.m))

    def eval(self, point: EdgePoint | int, t=None):
        """Linear interpolation on an edge; accepts an :class:`EdgePoint` or (edge, t)."""
        if isinstance(point, EdgePoint):
            j, t = point.edge, point.t
        else:
            j = point
        x, v = self.mesh.edge(j), self.values[j - 1]
        i = locate(x, t)
        theta = (np.asarray(t) - x[i]) / (x[i + 1] - x[i])
        out = v[i] + theta * (v[i + 1] - v[i])
        # exact at nodes
        at_right = np.asarray(t) == x[i + 1]
        out = np.where(at_right, v[i + 1], out)
        return float(out) if np.ndim(out) == 0 else out

    def eval_deriv(self, point: EdgePoint | int, t=None, side: str = "right"):
        """One-sided derivative; constant on each cell."""
        if isinstance(point, EdgePoint):
            j, t = point.edge, point.t
        else:
            j = point
        x, v = self.mesh.edge(j), self.values[j - 1]
        i = locate(x, t, side=side)
        out = (v[i + 1] - v[i]) / (x[i + 1] - x[i])
        return float(out) if np.ndim(out) == 0 else out

    def on(self, mesh: Mesh) -> "GraphFunction":
        """Interpolate onto another mesh (exact when ``mesh`` refines ours)."""
        return GraphFunction(mesh, tuple(
            np.asarray(self.eval(j, mesh.edge(j)), dtype=float) for j in range(1, mesh.m + 1)
        ))

    def __add__(self, other: "GraphFunction") -> "GraphFunction":
        return GraphFunction(self.mesh, tuple(u + v for u, v in zip(self.values, other.values)))

    def __sub__(self, other: "GraphFunction") -> "GraphFunction":
        return GraphFunction(self.mesh, tuple(u - v for u, v in zip(self.values, other.values)))

    def __mul__(self, s: float) -> "GraphFunction":
        return GraphFunction(self.mesh, tuple(s * u for u in self.values))

    __rmul__ = __mul__

    def rows(self):
        for j, (x, v) in enumerate(zip(self.mesh.nodes, self.values), start=1):
            for t, y in zip(x, v):
                yield j, float(t), float(y)


def w21_norm(y: GraphFunction) -> float:
    """Direct-sum W_2^1 norm over all edges, integrated exactly."""
    total = 0.0
    for x, v in zip(y.mesh.nodes, y.values):
        h = np.diff(x)
        vl, vr = v[:-1], v[1:]
        total += float(np.sum(h * (vl * vl + vl * vr + vr * vr) / 3.0))
        total += float(np.sum((vr - vl) ** 2 / h))
    return float(np.sqrt(total))


@dataclass(frozen=True, eq=False)
class DofMap:
    """Which nodal values are unknowns.

    ``free_index[j-1][i]`` is the unknown attached to node ``i`` of edge ``j``,
    or -1 when the node is fixed; ``fixed_value`` holds the prescribed value
    of fixed nodes (``y0`` at the start of edge 1, zero on the rest bands).
    """

    mesh: Mesh
    free_index: tuple[np.ndarray, ...]
    fixed_value: tuple[np.ndarray, ...]
    n_free: int
    vertex_index: int | None

    def is_free(self, j: int) -> np.ndarray:
        return self.free_index[j - 1] >= 0

    @property
    def prolongation(self) -> sp.csr_matrix:
        """Sparse (n_nodes x n_free) map from unknowns to nodal values."""
        idx = np.concatenate(self.free_index)
        rows = np.nonzero(idx >= 0)[0]
        return sp.csr_matrix(
            (np.ones(rows.size), (rows, idx[rows])), shape=(idx.size, self.n_free)
        )

    def expand(self, x: np.ndarray, lift: GraphFunction) -> GraphFunction:
        """``lift + sum_k x_k phi_k`` as a graph function."""
        return GraphFunction.from_global(self.mesh, lift.vector + self.prolongation @ x)

    def basis(self, k: int) -> GraphFunction:
        e = np.zeros(self.n_free)
        e[k] = 1.0
        return GraphFunction.from_global(self.mesh, self.prolongation @ e)


def build_dof_map(system, mesh: Mesh) -> DofMap:
    free_index = []
    fixed_value = []
    counter = 0
    vertex_index = None
    for j in system.edges:
        x = mesh.edge(j)
        idx = np.full(x.size, -1, dtype=int)
        fixed = np.zeros(x.size)
        band = system.band_start(j)
        is_fixed = np.zeros(x.size, dtype=bool)
        if band is not None:
            is_fixed |= x >= band
        if j == 1:
            is_fixed[0] = True
            fixed[0] = system.y0
        elif vertex_index is not None:
            idx[0] = vertex_index
            is_fixed[0] = True  # already numbered through edge 1
        for i in range(x.size):
            if not is_fixed[i]:
                idx[i] = counter
                counter += 1
        if j == 1 and system.m > 1:
            vertex_index = int(idx[-1])
        free_index.append(idx)
        fixed_value.append(fixed)
    return DofMap(mesh, tuple(free_index), tuple(fixed_value), counter, vertex_index)


def boundary_lift(system, mesh: Mesh) -> GraphFunction:
    """Graph function carrying ``y(0) = y0``: linear down to zero at ``T1/q`` on edge 1."""
    values = []
    for j in system.edges:
        x = mesh.edge(j)
        if j == 1:
            ramp_end = system.T1 / system.q
            v = np.where(x < ramp_end, system.y0 * (1.0 - system.q * x / system.T1), 0.0)
            v[0] = system.y0
        else:
            v = np.zeros(x.size)
        values.append(v)
    return GraphFunction(mesh, tuple(values))
