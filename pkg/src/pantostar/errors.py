"""Exception hierarchy.

Validation problems derive from ``ProblemError`` (a ``ValueError``); numerical
failures of the solve derive from ``SolveError``.
"""


class ProblemError(ValueError):
    """Malformed or inadmissible problem description."""


class QOutOfRange(ProblemError):
    pass


class HorizonTooShort(ProblemError):
    pass


class NonpositiveWeight(ProblemError):
    pass


class TooFewEdges(ProblemError):
    pass


class OutOfHistory(ValueError):
    """Delayed argument falls before the start of the recorded history."""


class WrongRegime(ValueError):
    """An oracle was asked for a system it does not cover."""


class SolveError(RuntimeError):
    pass


class IndefiniteForm(SolveError):
    """The discrete energy form is not positive definite."""


class SolverDiverged(SolveError):
    pass
