"""Independent reference solutions used to check the main solver.

``dense_oracle`` deliberately avoids the operator module: it evaluates the
control operators pointwise with its own delay routing, integrates with a
composite midpoint rule, and recovers the quadratic form by finite
differences of the energy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import IndefiniteForm, WrongRegime
from .solver import solve, solve_interval
from .space import Mesh, boundary_lift, build_dof_map, build_mesh
from .system import validate

OVERSAMPLE = 4


@dataclass(frozen=True)
class OracleResult:
    samples: tuple[tuple[int, float, float], ...]
    energy: float
    provenance: str
    vertex_value: float | None = None
    quadrature_energy: float | None = None

    def edge_samples(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        pts = [(t, y) for e, t, y in self.samples if e == j]
        t, y = zip(*pts)
        return np.array(t), np.array(y)

    def evaluate(self, j: int, t):
        """Piecewise-linear interpolation between the stored samples."""
        ts, ys = self.edge_samples(j)
        return np.interp(t, ts, ys)


def harmonic_oracle(system) -> OracleResult:
    """Closed-form minimizer when every coefficient vanishes.

    Then the energy is ``sum_j alpha_j int (y_j')^2``: edge 1 is affine from
    ``y0`` to the vertex value ``v`` and every outgoing edge is affine from
    ``v`` down to zero at ``l_j``.  Setting the derivative in ``v`` to zero
    gives ``v = (alpha_1 y0 / T1) / (alpha_1 / T1 + sum_j alpha_j / l_j)``.
    """
    if any(v != 0.0 for v in (*system.a, *system.b, *system.c)):
        raise WrongRegime("WrongRegime: harmonic oracle needs a = b = c = 0")
    T1, y0 = system.T1, system.y0
    stiff_in = system.weight(1) / T1
    stiff_out = sum(system.weight(j) / system.l(j) for j in range(2, system.m + 1))
    v = stiff_in * y0 / (stiff_in + stiff_out)
    energy = stiff_in * (y0 - v) ** 2 + stiff_out * v ** 2
    samples = [(1, 0.0, y0), (1, T1, v)]
    for j in range(2, system.m + 1):
        samples += [(j, 0.0, v), (j, system.l(j), 0.0), (j, system.horizon(j), 0.0)]
    return OracleResult(tuple(samples), float(energy), "closed-form", vertex_value=float(v))


def interval_reduction_check(T1, T2, q, a, b, c, y0, n, matched_mesh: bool = False) -> float:
    """Max deviation between the two-edge star (unit weights) and the glued interval.

    With ``matched_mesh`` the interval uses exactly the glued star nodes, so the
    two discrete problems coincide; otherwise it uses its own uniform
    ``2n``-cell mesh on ``[0, T1 + T2]``.
    """
    star = validate({"m": 2, "q": q, "T": [T1, T2], "a": [a, a], "b": [b, b],
                     "c": [c, c], "alpha": [1.0, 1.0], "y0": y0})
    s = solve(star, n)
    x1, x2 = s.mesh.edge(1), s.mesh.edge(2)
    glued = np.concatenate([x1, T1 + x2[1:]])
    if matched_mesh:
        inter = solve_interval(T1 + T2, q, a, b, c, y0, n, nodes=glued)
    else:
        inter = solve_interval(T1 + T2, q, a, b, c, y0, 2 * n)
    xi = inter.mesh.edge(1)
    pts = np.unique(np.concatenate([glued, xi]))
    pts = pts[pts <= T1 + T2]
    on1 = pts <= T1
    y_star = np.where(on1, s.y.eval(1, np.minimum(pts, T1)), s.y.eval(2, np.maximum(pts - T1, 0.0)))
    y_int = inter.y.eval(1, pts)
    return float(np.max(np.abs(y_star - y_int)))


# --- dense oracle -----------------------------------------------------------

def _values_and_slopes(x: np.ndarray, V: np.ndarray, t: np.ndarray):
    i = np.clip(np.searchsorted(x, t, side="right") - 1, 0, x.size - 2)
    h = x[i + 1] - x[i]
    w = ((t - x[i]) / h)[:, None]
    slope = (V[i + 1] - V[i]) / h[:, None]
    return V[i] + w * (V[i + 1] - V[i]), slope


def _ell_samples(system, nodes, blocks, j: int, t: np.ndarray) -> np.ndarray:
    """``l_j y`` at points ``t`` of edge ``j`` for a batch of functions (columns)."""
    q, T1 = system.q, system.T1
    a, b, c = system.coefficients(j)
    y, dy = _values_and_slopes(nodes[j - 1], blocks[j - 1], t)
    s = t / q if j == 1 else (t - (q - 1.0) * T1) / q
    yd = np.empty_like(y)
    dyd = np.empty_like(y)
    back = s < 0.0
    fwd = ~back
    yd[fwd], dyd[fwd] = _values_and_slopes(nodes[j - 1], blocks[j - 1], s[fwd])
    if back.any():
        yd[back], dyd[back] = _values_and_slopes(nodes[0], blocks[0], s[back] + T1)
    return dy + a * dyd + b * y + c * yd


def _split(mesh: Mesh, Y: np.ndarray):
    off = np.concatenate([[0], np.cumsum([x.size for x in mesh.nodes])])
    return [Y[off[k]:off[k + 1]] for k in range(mesh.m)]


def _midpoint_rule(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h = np.diff(x) / OVERSAMPLE
    frac = (np.arange(OVERSAMPLE) + 0.5) / OVERSAMPLE
    pts = (x[:-1, None] + np.diff(x)[:, None] * frac[None, :]).ravel()
    return pts, np.repeat(h, OVERSAMPLE)


def _adaptive_energy(system, mesh: Mesh, vec: np.ndarray) -> float:
    """Energy of one function by adaptive Gauss-Kronrod quadrature on each mesh cell."""
    nodes = mesh.nodes
    blocks = [b[:, None] for b in _split(mesh, vec)]
    total = 0.0
    for j in system.edges:
        def f(t, j=j):
            return float(_ell_samples(system, nodes, blocks, j, np.array([t]))[0, 0]) ** 2
        x = nodes[j - 1]
        part = 0.0
        for lo, hi in zip(x[:-1], x[1:]):
            val, _ = integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=400)
            part += val
        total += system.weight(j) * part
    return total


def dense_oracle(system, n: int, exact_energy: bool = True) -> OracleResult:
    """Minimizer over the same P1 space, computed without the exact assembler.

    ``quadrature_energy`` is the minimum of the midpoint-rule energy; ``energy``
    re-integrates that minimizer's true energy adaptively, so it is a genuine
    upper bound for the exact discrete minimum.
    """
    if n > 64:
        raise ValueError("dense oracle is limited to n <= 64")
    mesh = build_mesh(system, n)
    dof = build_dof_map(system, mesh)
    lift = boundary_lift(system, mesh).vector
    P = dof.prolongation.toarray()
    nf = dof.n_free
    rules = [_midpoint_rule(mesh.edge(j)) for j in system.edges]

    def J(X: np.ndarray) -> np.ndarray:
        blocks = _split(mesh, lift[:, None] + P @ X)
        total = np.zeros(X.shape[1])
        for j, (pts, w) in zip(system.edges, rules):
            r = _ell_samples(system, mesh.nodes, blocks, j, pts)
            total += system.weight(j) * (w[:, None] * r * r).sum(axis=0)
        return total

    eye = np.eye(nf)
    iu, ju = np.triu_indices(nf, k=1)
    J0 = J(np.zeros((nf, 1)))[0]
    Jp = J(eye)
    Jm = J(-eye)
    diag = 0.5 * (Jp + Jm - 2.0 * J0)
    grad = 0.25 * (Jp - Jm)
    H = np.diag(diag)
    chunk = 4096
    for start in range(0, iu.size, chunk):
        k, l = iu[start:start + chunk], ju[start:start + chunk]
        X = eye[:, k] + eye[:, l]
        H[k, l] = 0.5 * (J(X) - Jp[k] - Jp[l] + J0)
    H = np.triu(H) + np.triu(H, 1).T
    try:
        L = np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        raise IndefiniteForm("IndefiniteForm: dense oracle form is not positive definite") from None
    x = -np.linalg.solve(L.T, np.linalg.solve(L, grad))
    vec = lift + P @ x
    quad_energy = float(J(x[:, None])[0])
    energy = _adaptive_energy(system, mesh, vec) if exact_energy else quad_energy
    samples = []
    for j, block in zip(system.edges, _split(mesh, vec)):
        samples += [(j, float(t), float(v)) for t, v in zip(mesh.edge(j), block)]
    vertex = float(vec[mesh.edge(1).size - 1]) if system.m > 1 else None
    return OracleResult(tuple(samples), energy, "dense", vertex_value=vertex, quadrature_energy=quad_energy)
