"""Proportional-delay argument maps and their routing through the vertex."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import OutOfHistory


@dataclass(frozen=True)
class EdgePoint:
    edge: int
    t: float


def delay_arg(system, j: int, t):
    """Delayed argument on edge ``j``; negative values on outgoing edges are history."""
    t = float(t) if np.isscalar(t) else np.asarray(t, dtype=float)
    shift = 0.0 if j == 1 else (system.q - 1.0) * system.T1
    return (t - shift) / system.q


def history_start(system, j: int) -> float:
    """Smallest admissible delayed argument on edge ``j``."""
    return 0.0 if j == 1 else (1.0 / system.q - 1.0) * system.T1


def resolve_global(system, j: int, s: float) -> EdgePoint:
    """Map a (possibly negative) local time on edge ``j`` to a point of the graph."""
    lo = history_start(system, j)
    if s < lo - 1e-14 * system.T1:
        raise OutOfHistory(f"OutOfHistory: s={s} below {lo} on edge {j}")
    if s >= 0.0 or j == 1:
        return EdgePoint(j, max(s, 0.0))
    return EdgePoint(1, s + system.T1)


def resolve_many(system, j: int, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`resolve_global`; returns (edge, local time) arrays.

    At ``s == 0`` the edge-``j`` branch is taken; continuity at the vertex makes
    both branches agree there.
    """
    s = np.asarray(s, dtype=float)
    edge = np.full(s.shape, j, dtype=int)
    r = s.copy()
    if j != 1:
        hist = s < 0.0
        edge[hist] = 1
        r[hist] = s[hist] + system.T1
    return edge, r


def _source(source_breakpoints: Mapping[int, Sequence[float]] | Sequence[Sequence[float]], k: int):
    if isinstance(source_breakpoints, Mapping):
        return np.asarray(source_breakpoints.get(k, ()), dtype=float)
    if k - 1 < len(source_breakpoints):
        return np.asarray(source_breakpoints[k - 1], dtype=float)
    return np.empty(0)


def dedup(points: np.ndarray, length: float) -> np.ndarray:
    """Sort and merge points closer than ``1e-14 * length`` (first one wins)."""
    points = np.sort(np.asarray(points, dtype=float))
    if points.size == 0:
        return points
    keep = np.ones(points.size, dtype=bool)
    tol = 1e-14 * length
    last = points[0]
    for i in range(1, points.size):
        if points[i] - last <= tol:
            keep[i] = False
        else:
            last = points[i]
    return points[keep]


def pullback_breakpoints(system, j: int, source_breakpoints) -> np.ndarray:
    """Times in ``(0, T_j)`` where the delayed part of ``l_j`` switches affine piece.

    ``source_breakpoints`` holds per-edge breakpoint lists, either as a mapping
    ``{edge: points}`` or as a sequence indexed by ``edge - 1``.
    """
    q, T1 = system.q, system.T1
    Tj = system.horizon(j)
    if j == 1:
        cand = [q * _source(source_breakpoints, 1)]
    else:
        shift = (q - 1.0) * T1
        own = _source(source_breakpoints, j)
        hist = _source(source_breakpoints, 1)
        hist = hist[hist > T1 / q]
        cand = [q * own + shift, q * hist - T1, np.array([shift])]
    pts = np.concatenate(cand)
    pts = pts[(pts > 0.0) & (pts < Tj)]
    pts = dedup(pts, Tj)
    tol = 1e-14 * Tj
    return pts[(pts > tol) & (pts < Tj - tol)]
