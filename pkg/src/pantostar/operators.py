"""The control operators applied exactly to P1 graph functions, and the energy form.

For a P1 function ``y`` the image ``l_j y`` is affine between consecutive
points of the edge's own mesh and the pulled-back source breakpoints, so it is
represented exactly as a :class:`BreakpointFunction`.  Everything here is
linear in the nodal values, which is how the Gram matrix is built: each edge
gets a sparse map from the global node vector to the one-sided limits of
``l_j y`` on every cell.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .delay import dedup, delay_arg, pullback_breakpoints, resolve_many
from .piecewise import BreakpointFunction
from .space import DofMap, GraphFunction, Mesh, boundary_lift, locate

#: principal part (derivatives), lower-order part, or the full operator
PARTS = ("full", "principal", "lower")

_G1 = 0.5 - 0.5 / np.sqrt(3.0)
_G2 = 0.5 + 0.5 / np.sqrt(3.0)


def _merge_keep(base: np.ndarray, extra: np.ndarray, length: float) -> np.ndarray:
    """Union of ``base`` and ``extra``; ``base`` points survive exactly."""
    tol = 1e-14 * length
    if extra.size:
        k = np.clip(np.searchsorted(base, extra), 1, base.size - 1)
        near = np.minimum(np.abs(base[k] - extra), np.abs(base[k - 1] - extra))
        extra = dedup(extra[near > tol], length)
    return np.sort(np.concatenate([base, extra]))


def ell_breakpoints(system, mesh: Mesh, j: int) -> np.ndarray:
    x = mesh.edge(j)
    return _merge_keep(x, pullback_breakpoints(system, j, mesh.nodes), system.horizon(j))


@dataclass(frozen=True, eq=False)
class EdgeOperator:
    """Sparse maps from nodal values to the one-sided limits of ``l_j y`` per cell."""

    breakpoints: np.ndarray
    to_left: sp.csr_matrix
    to_right: sp.csr_matrix

    def apply(self, vec: np.ndarray) -> BreakpointFunction:
        return BreakpointFunction(self.breakpoints, self.to_left @ vec, self.to_right @ vec)

    def gauss(self) -> tuple[sp.csr_matrix, sp.csr_matrix]:
        return (
            (1.0 - _G1) * self.to_left + _G1 * self.to_right,
            (1.0 - _G2) * self.to_left + _G2 * self.to_right,
        )


def _interp(nodes: np.ndarray, cell: np.ndarray, t: np.ndarray, offset: int):
    h = nodes[cell + 1] - nodes[cell]
    theta = (t - nodes[cell]) / h
    cols = np.stack([offset + cell, offset + cell + 1], axis=1)
    val = np.stack([1.0 - theta, theta], axis=1)
    der = np.stack([-1.0 / h, 1.0 / h], axis=1)
    return cols, val, der


@lru_cache(maxsize=128)
def edge_operator(system, mesh: Mesh, j: int, part: str = "full") -> EdgeOperator:
    if part not in PARTS:
        raise ValueError(f"part must be one of {PARTS}")
    a, b, c = system.coefficients(j)
    if part == "principal":
        b = c = 0.0
    elif part == "lower":
        a = 0.0
    own_d = 0.0 if part == "lower" else 1.0

    bps = ell_breakpoints(system, mesh, j)
    x_j = mesh.edge(j)
    mid = 0.5 * (bps[:-1] + bps[1:])
    own_cell = locate(x_j, mid)
    src_edge, r_mid = resolve_many(system, j, delay_arg(system, j, mid))

    off = mesh.offsets
    mats = []
    for t in (bps[:-1], bps[1:]):
        cols_o, val_o, der_o = _interp(x_j, own_cell, t, off[j - 1])
        s = delay_arg(system, j, t)
        r = np.where(src_edge == j, s, s + system.T1)
        cols_s = np.empty_like(cols_o)
        val_s = np.empty_like(val_o)
        der_s = np.empty_like(der_o)
        for k in np.unique(src_edge):
            sel = src_edge == k
            x_k = mesh.edge(int(k))
            cell = locate(x_k, r_mid[sel])
            cols_s[sel], val_s[sel], der_s[sel] = _interp(x_k, cell, r[sel], off[k - 1])
        data = np.concatenate([own_d * der_o + b * val_o, a * der_s + c * val_s], axis=1)
        cols = np.concatenate([cols_o, cols_s], axis=1)
        rows = np.repeat(np.arange(mid.size), 4)
        mats.append(sp.csr_matrix(
            (data.ravel(), (rows, cols.ravel())), shape=(mid.size, mesh.n_nodes)
        ))
    return EdgeOperator(bps, mats[0], mats[1])


def apply_ell(system, y: GraphFunction, j: int) -> BreakpointFunction:
    """``l_j y`` on ``(0, T_j)``; delayed arguments are routed through the vertex."""
    return edge_operator(system, y.mesh, j).apply(y.vector)


def apply_ell_split(system, y: GraphFunction, j: int, nu: int) -> BreakpointFunction:
    """``nu = 0``: derivative part of ``l_j y``; ``nu = 1``: the remaining lower-order part."""
    part = {0: "principal", 1: "lower"}[nu]
    return edge_operator(system, y.mesh, j, part).apply(y.vector)


def _theta(system, j: int, nu: int) -> float:
    a, _, c = system.coefficients(j)
    return a if nu == 1 else c


def apply_ell_tilde(system, y: GraphFunction, j: int, nu: int) -> BreakpointFunction:
    """Adjoint-side terms produced by moving the delay from the test function onto ``l y``.

    Edge 1: ``q alpha_1 theta_1 l_1 y(qt)`` on ``(0, T1/q)`` and
    ``q sum_k alpha_k theta_k l_k y(qt - T1)`` on ``(T1/q, T1)``.
    Edge j >= 2: ``q alpha_j theta_j l_j y(qt + (q-1)T1)`` on ``(0, l_j)``, zero after.
    The coefficient ``theta`` is ``a`` for ``nu = 1`` and ``c`` for ``nu = 0``.
    """
    q, T1 = system.q, system.T1
    if j == 1:
        ell1 = apply_ell(system, y, 1)
        first = (q * system.weight(1) * _theta(system, 1, nu)) * ell1.compose_affine(q, 0.0, 0.0, T1 / q)
        if system.is_interval:
            return first.concat(BreakpointFunction.zero(T1 / q, T1))
        second = BreakpointFunction.zero(T1 / q, T1)
        for k in range(2, system.m + 1):
            ellk = apply_ell(system, y, k)
            coef = q * system.weight(k) * _theta(system, k, nu)
            second = second + coef * ellk.compose_affine(q, -T1, T1 / q, T1)
        return first.concat(second)
    lj, Tj = system.l(j), system.horizon(j)
    ellj = apply_ell(system, y, j)
    coef = q * system.weight(j) * _theta(system, j, nu)
    head = coef * ellj.compose_affine(q, (q - 1.0) * T1, 0.0, lj)
    return head.concat(BreakpointFunction.zero(lj, Tj))


def apply_ell_hat(system, y: GraphFunction, j: int) -> BreakpointFunction:
    """Flux ``alpha_j l_j y + tilde-l_{1,j} y`` whose balance at the vertex is the Kirchhoff condition."""
    return system.weight(j) * apply_ell(system, y, j) + apply_ell_tilde(system, y, j, 1)


def bilinear(system, y: GraphFunction, w: GraphFunction) -> float:
    """Weighted sum over edges of the L2 products of ``l_j y`` and ``l_j w``."""
    return float(sum(
        system.weight(j) * apply_ell(system, y, j).inner(apply_ell(system, w, j))
        for j in system.edges
    ))


def energies(system, y: GraphFunction) -> tuple[float, float, float]:
    """Weighted energy and the unweighted principal / lower-order energies."""
    J = sum(system.weight(j) * apply_ell(system, y, j).norm2() for j in system.edges)
    J0 = sum(apply_ell_split(system, y, j, 0).norm2() for j in system.edges)
    J1 = sum(apply_ell_split(system, y, j, 1).norm2() for j in system.edges)
    return float(J), float(J0), float(J1)


def energy(system, y: GraphFunction) -> float:
    return float(sum(system.weight(j) * apply_ell(system, y, j).norm2() for j in system.edges))


def nodal_gram(system, mesh: Mesh) -> sp.csr_matrix:
    """Energy form on the full nodal vector (no constraints applied)."""
    n = mesh.n_nodes
    A = sp.csr_matrix((n, n))
    for j in system.edges:
        op = edge_operator(system, mesh, j)
        w = sp.diags(0.5 * system.weight(j) * np.diff(op.breakpoints))
        for G in op.gauss():
            A = A + G.T @ w @ G
    return A.tocsr()


@dataclass(frozen=True, eq=False)
class SparseSymmetricForm:
    A: sp.csr_matrix
    b: np.ndarray

    @property
    def n_free(self) -> int:
        return self.b.size

    def dump(self, path: str | Path) -> None:
        """Coordinate-format text: one ``row col value`` line per stored entry."""
        coo = self.A.tocoo()
        order = np.lexsort((coo.col, coo.row))
        with open(path, "w") as fh:
            for k in order:
                fh.write(f"{coo.row[k]} {coo.col[k]} {coo.data[k]:.17g}\n")


def assemble(system, mesh: Mesh, dofmap: DofMap, lift: GraphFunction | None = None) -> SparseSymmetricForm:
    """Gram matrix of the free hat functions and the load from the boundary lift."""
    if lift is None:
        lift = boundary_lift(system, mesh)
    full = nodal_gram(system, mesh)
    P = dofmap.prolongation
    A = (P.T @ full @ P).tocsr()
    A = ((A + A.T) * 0.5).tocsr()
    A.sort_indices()
    b = -(P.T @ (full @ lift.vector))
    return SparseSymmetricForm(A, np.asarray(b).ravel())
