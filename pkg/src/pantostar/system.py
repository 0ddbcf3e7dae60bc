"""Problem definition: star-graph and single-interval pantograph control systems.

Edges are numbered from 1 and edge 1 is always the incoming (root) edge.  On
edge ``j`` the controlled operator is

    l_j y(t) = y_j'(t) + a_j y_j'(s) + b_j y_j(t) + c_j y_j(s),

with ``s = t/q`` on edge 1 and ``s = (t - (q-1) T_1)/q`` on the outgoing
edges; negative ``s`` on an outgoing edge is read from the tail of edge 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from .errors import (
    HorizonTooShort,
    NonpositiveWeight,
    ProblemError,
    QOutOfRange,
    TooFewEdges,
)

#: relative tolerance for the |a_1| == q**-0.5 test
CRITICAL_RTOL = 1e-12


@dataclass(frozen=True)
class StarSystem:
    """Validated star-graph problem.  Build with :func:`validate`."""

    m: int
    q: float
    T: tuple[float, ...]
    a: tuple[float, ...]
    b: tuple[float, ...]
    c: tuple[float, ...]
    alpha: tuple[float, ...]
    y0: float

    is_interval = False

    @property
    def T1(self) -> float:
        return self.T[0]

    @property
    def edges(self) -> range:
        return range(1, self.m + 1)

    def horizon(self, j: int) -> float:
        return self.T[j - 1]

    def coefficients(self, j: int) -> tuple[float, float, float]:
        return self.a[j - 1], self.b[j - 1], self.c[j - 1]

    def weight(self, j: int) -> float:
        return self.alpha[j - 1]

    def l(self, j: int) -> float:
        """Length of the part of edge ``j`` on which the second-order equation lives."""
        if j == 1:
            return self.T1
        return (self.T[j - 1] - (self.q - 1.0) * self.T1) / self.q

    def band_start(self, j: int) -> float | None:
        """Left end of the terminal rest band on edge ``j`` (None if the edge has none)."""
        if j == 1:
            return None
        return self.l(j)

    def with_y0(self, y0: float) -> "StarSystem":
        return StarSystem(self.m, self.q, self.T, self.a, self.b, self.c, self.alpha, float(y0))

    def with_alpha(self, alpha: Sequence[float]) -> "StarSystem":
        return validate({**self.to_dict(), "alpha": list(alpha)})

    def to_dict(self) -> dict[str, Any]:
        return {
            "m": self.m,
            "q": self.q,
            "T": list(self.T),
            "a": list(self.a),
            "b": list(self.b),
            "c": list(self.c),
            "alpha": list(self.alpha),
            "y0": self.y0,
        }


@dataclass(frozen=True)
class IntervalProblem:
    """Quieting problem on a single interval ``[0, T]`` with rest band ``[T/q, T]``.

    Exposes the same edge interface as :class:`StarSystem` with ``m = 1`` and
    unit weight, so the discretization machinery runs on it unchanged.
    """

    horizon_T: float
    q: float
    a1: float
    b1: float
    c1: float
    y0: float
    m: int = field(default=1, init=False)

    is_interval = True

    def __post_init__(self):
        if not self.q > 1.0:
            raise QOutOfRange(f"QOutOfRange: q must exceed 1, got {self.q}")
        if not self.horizon_T > 0.0:
            raise HorizonTooShort(f"HorizonTooShort: T must be positive, got {self.horizon_T}")

    @property
    def T(self) -> tuple[float, ...]:
        return (self.horizon_T,)

    @property
    def T1(self) -> float:
        return self.horizon_T

    @property
    def a(self) -> tuple[float, ...]:
        return (self.a1,)

    @property
    def b(self) -> tuple[float, ...]:
        return (self.b1,)

    @property
    def c(self) -> tuple[float, ...]:
        return (self.c1,)

    @property
    def alpha(self) -> tuple[float, ...]:
        return (1.0,)

    @property
    def edges(self) -> range:
        return range(1, 2)

    def horizon(self, j: int) -> float:
        return self.horizon_T

    def coefficients(self, j: int) -> tuple[float, float, float]:
        return self.a1, self.b1, self.c1

    def weight(self, j: int) -> float:
        return 1.0

    def l(self, j: int) -> float:
        return self.horizon_T / self.q

    def band_start(self, j: int) -> float | None:
        return self.horizon_T / self.q

    def with_y0(self, y0: float) -> "IntervalProblem":
        return IntervalProblem(self.horizon_T, self.q, self.a1, self.b1, self.c1, float(y0))


@dataclass(frozen=True)
class HypothesisReport:
    neutral_ok: bool
    retarded: bool
    margin: float

    @property
    def guaranteed(self) -> bool:
        return self.neutral_ok or self.retarded

    def to_dict(self) -> dict[str, Any]:
        return {
            "neutral_ok": self.neutral_ok,
            "retarded": self.retarded,
            "margin": self.margin,
            "guaranteed": self.guaranteed,
        }


def _float_list(raw: Mapping[str, Any], key: str, m: int, default=None) -> tuple[float, ...]:
    value = raw.get(key, default)
    if value is None:
        raise ProblemError(f"missing key {key!r}")
    try:
        out = tuple(float(v) for v in value)
    except TypeError as exc:
        raise ProblemError(f"{key!r} must be an array of numbers") from exc
    if len(out) != m:
        raise ProblemError(f"{key!r} has length {len(out)}, expected m={m}")
    if not all(math.isfinite(v) for v in out):
        raise ProblemError(f"{key!r} contains non-finite values")
    return out


def validate(raw: Mapping[str, Any]) -> StarSystem:
    """Check a raw problem description and return a :class:`StarSystem`.

    ``a``, ``b``, ``c`` default to zeros; ``alpha`` defaults to the scenario
    weights ``[1, 1/(m-1), ..., 1/(m-1)]``.
    """
    if "T" not in raw:
        raise ProblemError("missing key 'T'")
    m = int(raw.get("m", len(raw["T"])))
    if m < 2:
        raise TooFewEdges(f"TooFewEdges: a star needs m >= 2 edges, got {m}")
    try:
        q = float(raw["q"])
        y0 = float(raw["y0"])
    except KeyError as exc:
        raise ProblemError(f"missing key {exc.args[0]!r}") from None
    if not q > 1.0:
        raise QOutOfRange(f"QOutOfRange: q must exceed 1, got {q}")
    T = _float_list(raw, "T", m)
    zeros = [0.0] * m
    a = _float_list(raw, "a", m, zeros)
    b = _float_list(raw, "b", m, zeros)
    c = _float_list(raw, "c", m, zeros)
    alpha = _float_list(raw, "alpha", m, [1.0] + [1.0 / (m - 1)] * (m - 1))
    if not T[0] > 0.0:
        raise HorizonTooShort(f"HorizonTooShort: T_1 must be positive, got {T[0]}")
    for j in range(2, m + 1):
        if not T[j - 1] > (q - 1.0) * T[0]:
            raise HorizonTooShort(
                f"HorizonTooShort: T_{j}={T[j - 1]} must exceed (q-1)T_1={(q - 1.0) * T[0]}"
            )
    for j, w in enumerate(alpha, start=1):
        if not w > 0.0:
            raise NonpositiveWeight(f"NonpositiveWeight: alpha_{j}={w}")
    return StarSystem(m=m, q=q, T=T, a=a, b=b, c=c, alpha=alpha, y0=y0)


def load_problem(path: str | Path) -> StarSystem:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ProblemError(f"problem file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ProblemError("problem file must hold a JSON object")
    return validate(raw)


def classify_hypotheses(system: StarSystem | IntervalProblem) -> HypothesisReport:
    """Report which solvability regime covers ``system``.

    A star is covered when ``|a_1| != q**-0.5`` and some outgoing ``a_j`` is
    nonzero, or when it is of retarded type (all ``a_j = 0``).  A single
    interval only needs ``|a| != q**-0.5``.
    """
    critical = system.q ** -0.5
    a1 = abs(system.a[0])
    margin = abs(a1 - critical)
    off_critical = margin > CRITICAL_RTOL * critical
    if system.m == 1:
        neutral_ok = off_critical
    else:
        neutral_ok = off_critical and sum(abs(v) for v in system.a[1:]) > 0.0
    retarded = all(v == 0.0 for v in system.a)
    return HypothesisReport(neutral_ok=neutral_ok, retarded=retarded, margin=margin)
