# conic/envelope.py - Linear cuts for "d - t <= |e| with arg(e) in [alpha_lo, alpha_hi]".

import math
from dataclasses import dataclass

import numpy as np

from errors import MalformedBox

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TrivialRelaxation:
    """No cut: the arc is wider than pi and the envelope is the whole plane."""

    k: int


@dataclass(frozen=True)
class EnvelopeCut:
    """Three half-spaces  c_re Re e + c_im Im e + c_d d + c_t t >= 0  for user k."""

    k: int
    alpha_lo: float
    alpha_hi: float
    rows: tuple[tuple[float, float, float, float], ...]

    def evaluate(self, e: complex, d_minus_t: float) -> np.ndarray:
        """Values of the three cut expressions at (e, d - t); all >= 0 means the point is kept."""
        values = []
        for c_re, c_im, c_d, c_t in self.rows:
            # c_d == -c_t for every row, so the cut only sees d - t
            values.append(c_re * e.real + c_im * e.imag + c_d * d_minus_t)
        return np.array(values)


def envelope_cuts(alpha_lo: float, alpha_hi: float, k: int) -> EnvelopeCut | TrivialRelaxation:
    if not (0.0 <= alpha_lo <= alpha_hi <= TWO_PI + 1e-12):
        raise MalformedBox(f"argument bounds [{alpha_lo}, {alpha_hi}] outside [0, 2pi]")
    if alpha_hi - alpha_lo > math.pi:
        return TrivialRelaxation(k)
    sl, cl = math.sin(alpha_lo), math.cos(alpha_lo)
    sh, ch = math.sin(alpha_hi), math.cos(alpha_hi)
    a = 0.5 * (cl + ch)
    b = 0.5 * (sl + sh)
    r = a * a + b * b
    rows = (
        (-sl, cl, 0.0, 0.0),  # sin(lo) Re e - cos(lo) Im e <= 0
        (sh, -ch, 0.0, 0.0),  # sin(hi) Re e - cos(hi) Im e >= 0
        (a, b, -r, r),  # a Re e + b Im e >= (a^2 + b^2)(d - t)
    )
    return EnvelopeCut(k, alpha_lo, alpha_hi, rows)
