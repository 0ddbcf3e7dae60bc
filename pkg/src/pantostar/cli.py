"""Command-line interface: ``pantostar {solve,verify,converge,oracle}``.

Exit codes: 0 success, 2 invalid problem or arguments, 3 indefinite form or
(with ``--strict-hypotheses``) unguaranteed solvability, 4 solver stagnation,
1 anything else.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import IndefiniteForm, ProblemError, SolverDiverged
from .oracles import dense_oracle, harmonic_oracle
from .output import write_control, write_csv, write_json, write_trajectory
from .solver import solve
from .system import classify_hypotheses, load_problem
from .verification import STUDY_COLUMNS, convergence_study, residual_report

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_HYPOTHESIS, EXIT_DIVERGED = 0, 1, 2, 3, 4

log = logging.getLogger("pantostar")


def _n_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from None
    if not values or any(v < 2 for v in values):
        raise argparse.ArgumentTypeError("resolutions must be integers >= 2")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--problem", required=True, help="problem JSON file")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--emit-matrix", action="store_true", help="also write matrix.txt")
    common.add_argument("--strict-hypotheses", action="store_true",
                        help="fail (exit 3) when solvability is not guaranteed")

    parser = argparse.ArgumentParser(prog="pantostar", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, default, help_ in (
        ("solve", "16", "solve on one mesh"),
        ("verify", "16", "solve and write the residual report"),
        ("converge", "8,16,32,64,128", "dyadic refinement study"),
        ("oracle", "32", "compare with the independent oracles"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--n", type=_n_list, default=_n_list(default),
                       help=f"resolution or comma-separated list (default {default})")
    return parser


def _base_report(command: str, system, n) -> dict:
    return {
        "command": command,
        "problem": system.to_dict(),
        "n": n,
        "hypothesis": classify_hypotheses(system).to_dict(),
        "warnings": [],
        "status": "ok",
    }


def _solution_fields(sol) -> dict:
    return {
        "energy": sol.energy,
        "vertex_value": sol.vertex_value,
        "w21_norm": sol.w21_norm(),
        "n_free": sol.form.n_free,
        "method": sol.method,
    }


def _cmd_solve(args, system, out: Path, report: dict) -> None:
    n = args.n[0]
    report["n"] = n
    sol = solve(system, n)
    report["warnings"] = list(sol.warnings)
    report.update(_solution_fields(sol))
    write_trajectory(out / "trajectory.csv", sol.y)
    write_control(out / "control.csv", sol.u)
    if args.emit_matrix:
        sol.form.dump(out / "matrix.txt")
    if args.command == "verify":
        residuals = residual_report(system, sol).to_dict()
        report["residuals"] = residuals
        write_json(out / "residuals.json", residuals)


def _cmd_converge(args, system, out: Path, report: dict) -> None:
    table = convergence_study(system, args.n)
    write_csv(out / "study.csv", STUDY_COLUMNS, ([row[c] for c in STUDY_COLUMNS] for row in table.rows))
    report["verdict"] = table.verdict()
    report["warnings"] = list(table.warnings)
    report["rows"] = table.rows
    failed = [r["status"] for r in table.rows if r["status"] != "ok"]
    if failed:
        report["status"] = failed[0]


def _cmd_oracle(args, system, out: Path, report: dict) -> None:
    n = args.n[0]
    report["n"] = n
    sol = solve(system, n)
    report["warnings"] = list(sol.warnings)
    report.update(_solution_fields(sol))
    dense = dense_oracle(system, n)
    rows = []
    worst = 0.0
    for j, t, y_oracle in dense.samples:
        y_solver = float(sol.y.eval(j, t))
        worst = max(worst, abs(y_solver - y_oracle))
        rows.append((j, t, y_solver, y_oracle, abs(y_solver - y_oracle)))
    write_csv(out / "oracle.csv", ("edge", "t", "y_solver", "y_oracle", "deviation"), rows)
    write_csv(out / "oracle_trajectory.csv", ("edge", "t", "y"), dense.samples)
    report["oracles"] = {
        "dense": {
            "energy": dense.energy,
            "quadrature_energy": dense.quadrature_energy,
            "relative_energy_gap": (dense.energy - sol.energy) / sol.energy if sol.energy else 0.0,
            "max_deviation": worst,
        }
    }
    if not any((*system.a, *system.b, *system.c)):
        closed = harmonic_oracle(system)
        dev = max(abs(float(sol.y.eval(j, t)) - float(closed.evaluate(j, t)))
                  for j in system.edges for t in sol.mesh.edge(j))
        report["oracles"]["closed_form"] = {
            "energy": closed.energy, "vertex_value": closed.vertex_value, "max_deviation": dev,
        }


def run(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command in ("solve", "verify", "oracle") and len(args.n) != 1:
        print(f"error: {args.command} takes a single --n", file=sys.stderr)
        return EXIT_INVALID
    try:
        system = load_problem(args.problem)
    except ProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: cannot read problem file: {exc}", file=sys.stderr)
        return EXIT_INVALID

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = _base_report(args.command, system, args.n)
    code = EXIT_OK
    handler = {"solve": _cmd_solve, "verify": _cmd_solve,
               "converge": _cmd_converge, "oracle": _cmd_oracle}[args.command]
    try:
        handler(args, system, out, report)
    except IndefiniteForm as exc:
        report["status"] = "IndefiniteForm"
        report["error"] = str(exc)
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_HYPOTHESIS
    except SolverDiverged as exc:
        report["status"] = "SolverDiverged"
        report["error"] = str(exc)
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_DIVERGED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    for w in report["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    if code == EXIT_OK and report["status"] == "IndefiniteForm":
        code = EXIT_HYPOTHESIS
    if args.strict_hypotheses and not report["hypothesis"]["guaranteed"]:
        report["status"] = report["status"] if report["status"] != "ok" else "HypothesisViolated"
        print("error: solvability hypotheses not satisfied (--strict-hypotheses)", file=sys.stderr)
        code = EXIT_HYPOTHESIS
    write_json(out / "report.json", report)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
