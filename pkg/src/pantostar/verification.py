"""Residual checks on computed solutions and mesh-refinement studies."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import SolveError
from .operators import apply_ell_hat, nodal_gram
from .solver import Solution, solve
from .space import build_dof_map, refine


@dataclass(frozen=True)
class ResidualReport:
    kirchhoff: float
    el_weak: float
    hat_jump: float
    band_max: float
    galerkin: float

    def to_dict(self) -> dict:
        return asdict(self)


def kirchhoff_residual(system, solution: Solution) -> float:
    """Flux imbalance at the vertex, using averages over the mesh cells touching it."""
    if system.m == 1:
        return 0.0
    mesh = solution.mesh
    x1 = mesh.edge(1)
    inflow = apply_ell_hat(system, solution.y, 1).average(x1[-2], x1[-1])
    outflow = 0.0
    for j in range(2, system.m + 1):
        xj = mesh.edge(j)
        outflow += apply_ell_hat(system, solution.y, j).average(xj[0], xj[1])
    return abs(inflow - outflow)


def _hat_norms(dofmap) -> np.ndarray:
    """W_2^1 norms of the free hat functions."""
    sq = np.zeros(dofmap.n_free)
    for x, idx in zip(dofmap.mesh.nodes, dofmap.free_index):
        h = np.diff(x)
        cell = h / 3.0 + 1.0 / h
        per_node = np.zeros(x.size)
        per_node[:-1] += cell
        per_node[1:] += cell
        free = idx >= 0
        np.add.at(sq, idx[free], per_node[free])
    return np.sqrt(sq)


def euler_lagrange_residual(system, solution: Solution) -> float:
    """Largest normalized weak residual against the hat functions of the bisected mesh."""
    fine = refine(solution.mesh)
    dof = build_dof_map(system, fine)
    if dof.n_free == 0:
        return 0.0
    y = solution.y.on(fine)
    r = dof.prolongation.T @ (nodal_gram(system, fine) @ y.vector)
    return float(np.max(np.abs(r) / _hat_norms(dof)))


def hat_smoothness_defect(system, solution: Solution) -> float:
    """Largest jump of the flux inside ``(0, l_j)`` over all edges."""
    worst = 0.0
    for j in system.edges:
        flux = apply_ell_hat(system, solution.y, j).restrict(0.0, system.l(j))
        if flux.x.size > 2:
            worst = max(worst, float(flux.jumps().max()))
    return worst


def band_max(system, solution: Solution) -> float:
    worst = 0.0
    for j in system.edges:
        start = system.band_start(j)
        if start is None:
            continue
        x = solution.mesh.edge(j)
        v = solution.y.edge_values(j)[x >= start]
        if v.size:
            worst = max(worst, float(np.max(np.abs(v))))
    return worst


def galerkin_defect(solution: Solution) -> float:
    """``max_k |B(y, phi_k)|`` over the trial basis."""
    form = solution.form
    if form.n_free == 0:
        return 0.0
    return float(np.max(np.abs(form.A @ solution.free_values - form.b)))


def residual_report(system, solution: Solution) -> ResidualReport:
    return ResidualReport(
        kirchhoff=kirchhoff_residual(system, solution),
        el_weak=euler_lagrange_residual(system, solution),
        hat_jump=hat_smoothness_defect(system, solution),
        band_max=band_max(system, solution),
        galerkin=galerkin_defect(solution),
    )


STUDY_COLUMNS = ("n", "energy", "kirchhoff", "el_weak", "hat_jump", "norm_ratio", "status")


@dataclass
class StudyTable:
    rows: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows], dtype=float)

    def ratios(self, name: str) -> list[float]:
        """Successive reduction factors ``value(n) / value(2n)``."""
        v = self.column(name)
        out = []
        for a, b in zip(v[:-1], v[1:]):
            out.append(a / b if b != 0.0 else math.inf)
        return out

    def energy_monotone(self, slack: float = 1e-12) -> bool:
        e = self.column("energy")
        e = e[np.isfinite(e)]
        return bool(np.all(np.diff(e) <= slack))

    def verdict(self) -> dict:
        ok_rows = [r for r in self.rows if r["status"] == "ok"]
        return {
            "energy_monotone": {"pass": self.energy_monotone(), "energies": self.column("energy").tolist()},
            "band_zero": {"pass": all(r["band_max"] == 0.0 for r in ok_rows),
                          "band_max": [r["band_max"] for r in ok_rows]},
            "galerkin_orthogonality": {
                "pass": all(r["galerkin"] <= 1e-10 * (1.0 + r["energy"]) for r in ok_rows),
                "defects": [r["galerkin"] for r in ok_rows],
            },
            "rates": {name: self.ratios(name) for name in ("kirchhoff", "el_weak", "hat_jump")},
            "warnings": list(self.warnings),
        }


def convergence_study(system, n_list) -> StudyTable:
    """Solve on each resolution and tabulate energy, residuals and the norm ratio."""
    table = StudyTable()
    for n in n_list:
        try:
            sol = solve(system, n)
        except SolveError as exc:
            table.rows.append({
                "n": n, "energy": math.nan, "kirchhoff": math.nan, "el_weak": math.nan,
                "hat_jump": math.nan, "norm_ratio": math.nan, "band_max": math.nan,
                "galerkin": math.nan, "status": type(exc).__name__,
            })
            table.warnings.append(f"n={n}: {exc}")
            continue
        for w in sol.warnings:
            if w not in table.warnings:
                table.warnings.append(w)
        rep = residual_report(system, sol)
        ratio = sol.w21_norm() / abs(system.y0) if system.y0 != 0.0 else 0.0
        table.rows.append({
            "n": n, "energy": sol.energy, "kirchhoff": rep.kirchhoff, "el_weak": rep.el_weak,
            "hat_jump": rep.hat_jump, "norm_ratio": ratio, "band_max": rep.band_max,
            "galerkin": rep.galerkin, "status": "ok",
        })
    return table
