"""Minimum-energy quieting of a neutral pantograph control system on a star time-graph."""

__version__ = "0.1.0"

from .errors import (
    HorizonTooShort,
    IndefiniteForm,
    NonpositiveWeight,
    OutOfHistory,
    ProblemError,
    QOutOfRange,
    SolverDiverged,
    TooFewEdges,
    WrongRegime,
)
from .system import HypothesisReport, IntervalProblem, StarSystem, classify_hypotheses, load_problem, validate
from .space import DofMap, GraphFunction, Mesh, boundary_lift, build_dof_map, build_mesh, refine
from .piecewise import BreakpointFunction
from .operators import (
    apply_ell,
    apply_ell_hat,
    apply_ell_split,
    apply_ell_tilde,
    assemble,
    bilinear,
    energies,
    energy,
)
from .solver import Solution, solve, solve_interval
from .verification import (
    ResidualReport,
    StudyTable,
    band_max,
    convergence_study,
    euler_lagrange_residual,
    galerkin_defect,
    hat_smoothness_defect,
    kirchhoff_residual,
    residual_report,
)
from .oracles import OracleResult, dense_oracle, harmonic_oracle, interval_reduction_check
