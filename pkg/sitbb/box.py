# sitbb/box.py - Rectangles over the nonconvex variables (gamma_p, s, alpha) and their bisection.
#
# Dimension order, also used for tie-breaking: gamma_p,1 .. gamma_p,K, s, alpha_2 .. alpha_K.
# Without a common stream the box is over gamma_p only.

import math
from dataclasses import dataclass

import numpy as np

from errors import MalformedBox
from models.problem import ProblemSpec, SchemeKind

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class Box:
    lo: np.ndarray
    hi: np.ndarray
    K: int
    common: bool

    def __post_init__(self):
        lo = np.array(self.lo, dtype=float)
        hi = np.array(self.hi, dtype=float)
        expected = self.K + (self.K if self.common else 0)
        if lo.shape != (expected,) or hi.shape != (expected,):
            raise MalformedBox(f"box needs {expected} dimensions, got {lo.shape} / {hi.shape}")
        if np.any(lo > hi):
            raise MalformedBox("box has lo > hi")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def from_parts(cls, gamma_lo, gamma_hi, s_lo=0.0, s_hi=0.0, alpha_lo=(), alpha_hi=(), common=True) -> "Box":
        gamma_lo = np.asarray(gamma_lo, dtype=float)
        K = gamma_lo.size
        if not common:
            return cls(gamma_lo, np.asarray(gamma_hi, dtype=float), K, False)
        lo = np.concatenate([gamma_lo, [s_lo], np.asarray(alpha_lo, dtype=float)])
        hi = np.concatenate([np.asarray(gamma_hi, dtype=float), [s_hi], np.asarray(alpha_hi, dtype=float)])
        return cls(lo, hi, K, True)

    # -----------------------------
    # Named views
    # -----------------------------

    @property
    def gamma_lo(self) -> np.ndarray:
        return self.lo[: self.K]

    @property
    def gamma_hi(self) -> np.ndarray:
        return self.hi[: self.K]

    @property
    def s_lo(self) -> float:
        return float(self.lo[self.K]) if self.common else 0.0

    @property
    def s_hi(self) -> float:
        return float(self.hi[self.K]) if self.common else 0.0

    @property
    def alpha_lo(self) -> np.ndarray:
        return self.lo[self.K + 1 :] if self.common else np.zeros(0)

    @property
    def alpha_hi(self) -> np.ndarray:
        return self.hi[self.K + 1 :] if self.common else np.zeros(0)

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    def replace_bounds(self, gamma_lo=None, gamma_hi=None, s_lo=None, s_hi=None) -> "Box":
        lo, hi = self.lo.copy(), self.hi.copy()
        if gamma_lo is not None:
            lo[: self.K] = gamma_lo
        if gamma_hi is not None:
            hi[: self.K] = gamma_hi
        if self.common:
            if s_lo is not None:
                lo[self.K] = s_lo
            if s_hi is not None:
                hi[self.K] = s_hi
        return Box(lo, hi, self.K, self.common)

    def contains(self, point, tol: float = 0.0) -> bool:
        point = np.asarray(point, dtype=float)
        return bool(np.all(point >= self.lo - tol) and np.all(point <= self.hi + tol))

    def is_subset(self, other: "Box", tol: float = 0.0) -> bool:
        return bool(np.all(self.lo >= other.lo - tol) and np.all(self.hi <= other.hi + tol))


@dataclass(frozen=True)
class DualPoint:
    """x(M): the point of a box at which the dual objective is evaluated."""

    gamma_p: np.ndarray
    s: float
    alpha: np.ndarray

    def as_vector(self, common: bool) -> np.ndarray:
        if not common:
            return np.asarray(self.gamma_p, dtype=float)
        return np.concatenate([self.gamma_p, [self.s], self.alpha])


def initial_box(problem: ProblemSpec) -> Box:
    """The box that contains every feasible (gamma_p, s, alpha)."""
    K = problem.K
    caps = problem.P * problem.channels.norms_sq
    gamma_hi = caps.copy()
    if not problem.common_enabled:
        gamma_lo = np.maximum(0.0, 2.0 ** problem.R_th - 1.0)
        return Box.from_parts(np.minimum(gamma_lo, gamma_hi), gamma_hi, common=False)

    s_hi = float(caps.min())
    gamma_lo = np.maximum(0.0, 2.0 ** problem.R_th / (1.0 + s_hi) - 1.0)
    if problem.scheme.kind is SchemeKind.NOMA2:
        strong, weak = problem.scheme.noma_order
        # the strong user carries no common share, the weak user has no private stream
        gamma_lo[strong] = max(0.0, 2.0 ** problem.R_th[strong] - 1.0)
        gamma_lo[weak] = gamma_hi[weak] = 0.0
    gamma_lo = np.minimum(gamma_lo, gamma_hi)
    # an unreachable common-rate floor is left to the reduction, which empties the root
    s_lo = min(problem.common_sinr_floor, s_hi)
    return Box.from_parts(gamma_lo, gamma_hi, s_lo, s_hi, np.zeros(K - 1), np.full(K - 1, TWO_PI), common=True)


def branch(box: Box, init_widths: np.ndarray) -> tuple[Box, Box]:
    """Bisects the dimension with the largest width relative to the initial box (lowest index on ties)."""
    init_widths = np.asarray(init_widths, dtype=float)
    widths = box.widths
    normalized = np.divide(widths, init_widths, out=np.zeros_like(widths), where=init_widths > 0)
    j = int(np.argmax(normalized))
    if normalized[j] <= 0:
        raise MalformedBox("cannot bisect a degenerate box")
    mid = 0.5 * (box.lo[j] + box.hi[j])
    lower_hi = box.hi.copy()
    lower_hi[j] = mid
    upper_lo = box.lo.copy()
    upper_lo[j] = mid
    return Box(box.lo, lower_hi, box.K, box.common), Box(upper_lo, box.hi, box.K, box.common)
