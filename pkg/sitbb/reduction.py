# sitbb/reduction.py - Bound tightening that removes no point of value >= delta from a box.
#
#   I = {k : R_th,k > log2(1 + gamma_hi,k)}            users that need a common share
#   U = max(u) log2(1 + s_hi) + sum u_k log2(1 + gamma_hi,k)        rate upper bound
#   V = sum_{k in I} (R_th,k - log2(1 + gamma_hi,k)) - log2(1 + s_hi)   common-rate slack
#   W = mu (s_lo max_k ||h_k||^-2 + sum gamma_lo,k ||h_k||^-2) + P_circ  power lower bound
# A box is empty when V > 0, when U < W delta, or when log2(1 + s_hi) misses the minimum common rate.

import logging
from dataclasses import dataclass

import numpy as np

from models.problem import ProblemSpec
from sitbb.box import Box

logger = logging.getLogger(__name__)


class _Infeasible:
    """Marker returned by reduce_box when the box holds no point of value >= delta."""

    def __repr__(self):
        return "Infeasible"


Infeasible = _Infeasible()


@dataclass(frozen=True)
class Certificate:
    U: float
    V: float
    W: float
    need_common: np.ndarray


def _certificate(box: Box, problem: ProblemSpec) -> Certificate:
    inv_norms = 1.0 / problem.channels.norms_sq
    private_caps = np.log2(1.0 + box.gamma_hi)
    common_cap = np.log2(1.0 + box.s_hi)
    need = problem.R_th - private_caps > 0
    U = float(problem.u.max() * common_cap + np.dot(problem.u, private_caps))
    V = float(np.sum((problem.R_th - private_caps)[need]) - common_cap)
    W = float(problem.mu * (box.s_lo * inv_norms.max() + np.dot(box.gamma_lo, inv_norms)) + problem.P_circ)
    return Certificate(U, V, W, need)


def _misses_common_floor(box: Box, problem: ProblemSpec) -> bool:
    return box.common and bool(problem.min_common_rate > np.log2(1.0 + box.s_hi) + 1e-12)


def quick_infeasibility(box: Box, delta: float, problem: ProblemSpec) -> bool:
    cert = _certificate(box, problem)
    return cert.V > 0 or cert.U < cert.W * delta or _misses_common_floor(box, problem)


def _exponent(numer: float, weight: float) -> float:
    # (W delta - U) / u_k with numer <= 0; a zero weight leaves the bound untouched
    if weight <= 0:
        return -np.inf
    return numer / weight


def reduce_box(box: Box, delta: float, problem: ProblemSpec) -> Box | _Infeasible:
    cert = _certificate(box, problem)
    if cert.V > 0 or cert.U < cert.W * delta or _misses_common_floor(box, problem):
        return Infeasible
    gap = cert.W * delta - cert.U
    pinned_private = set(range(problem.K)) - set(problem.private_users)

    gamma_lo = box.gamma_lo.copy()
    for k in range(problem.K):
        if k in pinned_private:
            continue
        expo = _exponent(gap, problem.u[k])
        if cert.need_common[k]:
            candidate = 2.0 ** max(expo, cert.V) * (1.0 + box.gamma_hi[k]) - 1.0
        else:
            candidate = max(2.0**expo * (1.0 + box.gamma_hi[k]), 2.0 ** (cert.V + problem.R_th[k])) - 1.0
        gamma_lo[k] = max(gamma_lo[k], candidate)

    s_lo = box.s_lo
    if box.common:
        expo = _exponent(gap, problem.u.max())
        s_lo = max(s_lo, 2.0 ** max(expo, cert.V) * (1.0 + box.s_hi) - 1.0)

    gamma_hi = box.gamma_hi.copy()
    s_hi = box.s_hi
    if delta * problem.mu > 0:
        norms_sq = problem.channels.norms_sq
        inv_norms = 1.0 / norms_sq
        W_new = problem.mu * (s_lo * inv_norms.max() + np.dot(gamma_lo, inv_norms)) + problem.P_circ
        room = (cert.U - delta * W_new) / (delta * problem.mu)
        for k in range(problem.K):
            if k not in pinned_private:
                gamma_hi[k] = min(gamma_hi[k], gamma_lo[k] + norms_sq[k] * room)
        if box.common:
            s_hi = min(s_hi, s_lo + norms_sq.min() * room)

    # floating-point round-off on degenerate dimensions is not emptiness
    rounding = 1e-12 * (1.0 + np.abs(gamma_hi))
    gamma_lo = np.where((gamma_lo > gamma_hi) & (gamma_lo - gamma_hi <= rounding), gamma_hi, gamma_lo)
    if s_lo > s_hi and s_lo - s_hi <= 1e-12 * (1.0 + abs(s_hi)):
        s_lo = s_hi
    if np.any(gamma_lo > gamma_hi) or s_lo > s_hi:
        logger.debug("reduction emptied the box")
        return Infeasible
    return box.replace_bounds(gamma_lo=gamma_lo, gamma_hi=gamma_hi, s_lo=s_lo, s_hi=s_hi)