"""Minimum-energy quieting control on the discrete trial space."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import IndefiniteForm, SolverDiverged
from .operators import SparseSymmetricForm, apply_ell, assemble
from .piecewise import BreakpointFunction
from .space import DofMap, GraphFunction, Mesh, boundary_lift, build_dof_map, build_mesh, w21_norm
from .system import HypothesisReport, IntervalProblem, StarSystem, classify_hypotheses

log = logging.getLogger(__name__)

#: above this many unknowns the dense Cholesky is replaced by conjugate gradients
DENSE_LIMIT = 4000


@dataclass(frozen=True, eq=False)
class Solution:
    system: StarSystem | IntervalProblem
    mesh: Mesh
    dofmap: DofMap
    y: GraphFunction
    u: tuple[BreakpointFunction, ...]
    energy: float
    free_values: np.ndarray
    hypothesis: HypothesisReport
    n: int
    form: SparseSymmetricForm
    method: str
    warnings: tuple[str, ...] = field(default=())

    @property
    def vertex_value(self) -> float:
        return float(self.y.values[0][-1])

    def w21_norm(self) -> float:
        return w21_norm(self.y)

    def control_energy(self) -> float:
        """Energy recomputed from the stored controls."""
        return float(sum(self.system.weight(j) * uj.norm2() for j, uj in zip(self.system.edges, self.u)))


def conjugate_gradient(A, b: np.ndarray, rtol: float = 1e-12, maxiter: int | None = None) -> np.ndarray:
    """Jacobi-preconditioned CG; raises on non-positive curvature or stagnation."""
    n = b.size
    maxiter = maxiter or 10 * n
    d = A.diagonal()
    if np.any(d <= 0.0):
        raise IndefiniteForm("IndefiniteForm: non-positive diagonal entry")
    x = np.zeros(n)
    r = b.copy()
    z = r / d
    p = z.copy()
    rz = r @ z
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return x
    for _ in range(maxiter):
        Ap = A @ p
        curv = p @ Ap
        if curv <= 0.0:
            raise IndefiniteForm("IndefiniteForm: non-positive curvature in CG")
        step = rz / curv
        x += step * p
        r -= step * Ap
        if np.linalg.norm(r) <= rtol * bnorm:
            return x
        z = r / d
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverDiverged(f"SolverDiverged: CG did not reach rtol={rtol} in {maxiter} iterations")


def solve_form(form: SparseSymmetricForm) -> tuple[np.ndarray, str]:
    if form.n_free == 0:
        return np.zeros(0), "none"
    if form.n_free <= DENSE_LIMIT:
        dense = form.A.toarray()
        try:
            factor = sla.cho_factor(dense, lower=True, check_finite=True)
        except sla.LinAlgError as exc:
            raise IndefiniteForm(f"IndefiniteForm: Cholesky found a non-positive pivot ({exc})") from None
        return sla.cho_solve(factor, form.b), "cholesky"
    return conjugate_gradient(sp.csr_matrix(form.A), form.b), "cg"


def _hypothesis_warnings(report: HypothesisReport, interval: bool) -> list[str]:
    if report.guaranteed:
        return []
    if interval:
        return ["solvability not guaranteed: |a| equals q**-0.5"]
    return [
        "solvability not guaranteed: need |a_1| != q**-0.5 with some a_j != 0 (j >= 2), "
        "or all a_j = 0"
    ]


def solve_on_mesh(system, mesh: Mesh, n: int | None = None) -> Solution:
    hyp = classify_hypotheses(system)
    warnings = _hypothesis_warnings(hyp, system.is_interval)
    for w in warnings:
        log.info(w)
    dofmap = build_dof_map(system, mesh)
    lift = boundary_lift(system, mesh)
    form = assemble(system, mesh, dofmap, lift)
    x, method = solve_form(form)
    y = dofmap.expand(x, lift)
    u = tuple(apply_ell(system, y, j) for j in system.edges)
    J = float(sum(system.weight(j) * uj.norm2() for j, uj in zip(system.edges, u)))
    return Solution(
        system=system, mesh=mesh, dofmap=dofmap, y=y, u=u, energy=J, free_values=x,
        hypothesis=hyp, n=n if n is not None else 0, form=form, method=method,
        warnings=tuple(warnings),
    )


def solve(system: StarSystem, n: int) -> Solution:
    """Minimize the weighted control energy over P1 functions on the ``n``-cell mesh."""
    return solve_on_mesh(system, build_mesh(system, n), n)


def solve_interval(T: float, q: float, a: float, b: float, c: float, y0: float, n: int,
                   nodes=None) -> Solution:
    """Single-interval version: ``y(0) = y0`` and ``y = 0`` on ``[T/q, T]``.

    ``nodes`` optionally replaces the uniform mesh (it must contain ``T/q``).
    """
    problem = IntervalProblem(T, q, a, b, c, y0)
    mesh = build_mesh(problem, n) if nodes is None else Mesh.from_nodes(problem, [nodes])
    return solve_on_mesh(problem, mesh, n)
