"""Piecewise-affine functions that may jump at their breakpoints."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .delay import dedup

_GAUSS = 0.5 / np.sqrt(3.0)  # 2-point Gauss nodes at mid -/+ h * _GAUSS


@dataclass(frozen=True, eq=False)
class BreakpointFunction:
    """Affine on each cell ``[x[i], x[i+1]]`` with one-sided limits ``left[i]`` and ``right[i]``.

    Values *at* a breakpoint are never implied; use ``side`` to pick a limit.
    """

    x: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        if self.x.size < 2 or np.any(np.diff(self.x) <= 0.0):
            raise ValueError("breakpoints must be strictly increasing")
        if self.left.shape != (self.x.size - 1,) or self.right.shape != self.left.shape:
            raise ValueError("need one affine piece per cell")

    @classmethod
    def from_mid_slope(cls, x, mid, slope) -> "BreakpointFunction":
        half = 0.5 * np.diff(x)
        return cls(np.asarray(x, float), mid - slope * half, mid + slope * half)

    @classmethod
    def zero(cls, a: float, b: float) -> "BreakpointFunction":
        return cls(np.array([a, b]), np.zeros(1), np.zeros(1))

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.x)

    @property
    def slopes(self) -> np.ndarray:
        return (self.right - self.left) / self.widths

    def __call__(self, t, side: str = "right"):
        """Evaluate; at a breakpoint ``side='left'`` gives the limit from below."""
        i = np.clip(np.searchsorted(self.x, t, side=side) - 1, 0, self.x.size - 2)
        theta = (np.asarray(t, float) - self.x[i]) / (self.x[i + 1] - self.x[i])
        out = self.left[i] + theta * (self.right[i] - self.left[i])
        return float(out) if np.ndim(out) == 0 else out

    def refine(self, points) -> "BreakpointFunction":
        """Same function on the union of the current breakpoints and ``points``."""
        a, b = self.domain
        pts = np.asarray(points, float)
        pts = pts[(pts > a) & (pts < b)]
        x = dedup(np.concatenate([self.x, pts]), b - a)
        if x.size == self.x.size:
            return self
        mid = 0.5 * (x[:-1] + x[1:])
        i = np.clip(np.searchsorted(self.x, mid, side="right") - 1, 0, self.x.size - 2)
        h = self.x[i + 1] - self.x[i]
        dl = self.right[i] - self.left[i]
        left = self.left[i] + (x[:-1] - self.x[i]) / h * dl
        right = self.left[i] + (x[1:] - self.x[i]) / h * dl
        return BreakpointFunction(x, left, right)

    def _common(self, other: "BreakpointFunction"):
        if abs(self.x[0] - other.x[0]) > 1e-12 or abs(self.x[-1] - other.x[-1]) > 1e-12 * max(1.0, abs(self.x[-1])):
            raise ValueError("domains differ")
        return self.refine(other.x), other.refine(self.x)

    def __add__(self, other):
        if np.isscalar(other):
            return BreakpointFunction(self.x, self.left + other, self.right + other)
        f, g = self._common(other)
        return BreakpointFunction(f.x, f.left + g.left, f.right + g.right)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, s: float) -> "BreakpointFunction":
        return BreakpointFunction(self.x, s * self.left, s * self.right)

    __rmul__ = __mul__

    def gauss_values(self) -> tuple[np.ndarray, np.ndarray]:
        """Values at the two Gauss points of every cell."""
        mid = 0.5 * (self.left + self.right)
        d = (self.right - self.left) * (2.0 * _GAUSS)
        return mid - 0.5 * d, mid + 0.5 * d

    def inner(self, other: "BreakpointFunction") -> float:
        """Exact L2 product over the common domain (2-point Gauss on merged cells)."""
        f, g = self._common(other)
        f1, f2 = f.gauss_values()
        g1, g2 = g.gauss_values()
        return float(np.sum(0.5 * f.widths * (f1 * g1 + f2 * g2)))

    def norm2(self) -> float:
        return self.inner(self)

    def integral(self) -> float:
        return float(np.sum(0.5 * self.widths * (self.left + self.right)))

    def average(self, a: float, b: float) -> float:
        return self.restrict(a, b).integral() / (b - a)

    def restrict(self, a: float, b: float) -> "BreakpointFunction":
        f = self.refine([a, b])
        tol = 1e-14 * (f.x[-1] - f.x[0])
        lo = int(np.argmin(np.abs(f.x - a)))
        hi = int(np.argmin(np.abs(f.x - b)))
        if abs(f.x[lo] - a) > tol or abs(f.x[hi] - b) > tol or hi <= lo:
            raise ValueError(f"[{a}, {b}] not inside the domain")
        return BreakpointFunction(f.x[lo:hi + 1].copy(), f.left[lo:hi].copy(), f.right[lo:hi].copy())

    def jumps(self) -> np.ndarray:
        """Absolute jumps at interior breakpoints."""
        return np.abs(self.left[1:] - self.right[:-1])

    def compose_affine(self, scale: float, shift: float, a: float, b: float) -> "BreakpointFunction":
        """``t -> f(scale * t + shift)`` on ``[a, b]`` (``scale > 0``)."""
        lo, hi = scale * a + shift, scale * b + shift
        f = self.restrict(lo, hi)
        x = (f.x - shift) / scale
        x[0], x[-1] = a, b
        return BreakpointFunction(x, f.left.copy(), f.right.copy())

    def concat(self, other: "BreakpointFunction") -> "BreakpointFunction":
        if abs(other.x[0] - self.x[-1]) > 1e-14 * max(1.0, abs(self.x[-1])):
            raise ValueError("pieces must abut")
        return BreakpointFunction(
            np.concatenate([self.x, other.x[1:]]),
            np.concatenate([self.left, other.left]),
            np.concatenate([self.right, other.right]),
        )
