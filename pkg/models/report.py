# models/report.py - SINRs, objective values and the feasibility check of a candidate solution.

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from errors import DimensionMismatch
from models.channel import ChannelSet
from models.precoder import PrecoderSet
from models.problem import ProblemSpec, SchemeKind

logger = logging.getLogger(__name__)

FEAS_TOL = 1e-6


@dataclass(frozen=True)
class Violation:
    constraint: str
    magnitude: float


@dataclass(frozen=True, eq=False)
class SolutionReport:
    precoders: PrecoderSet
    C: np.ndarray
    gamma_p: np.ndarray
    gamma_c: np.ndarray
    rates: np.ndarray
    objective: float
    feasible: bool
    violations: tuple[Violation, ...] = field(default_factory=tuple)


def compute_sinrs(channels: ChannelSet, precoders: PrecoderSet) -> tuple[np.ndarray, np.ndarray]:
    """Returns (gamma_c, gamma_p) for unit noise."""
    if precoders.p.shape != channels.h.shape:
        raise DimensionMismatch(
            f"precoders {precoders.p.shape} do not match channels {channels.h.shape}"
        )
    # gains[k, j] = |h_k^H p_j|^2
    gains = np.abs(channels.h.conj() @ precoders.p.T) ** 2
    common = np.abs(channels.h.conj() @ precoders.p_c) ** 2
    total_private = gains.sum(axis=1)
    own = np.diag(gains)
    gamma_c = common / (total_private + 1.0)
    gamma_p = own / (total_private - own + 1.0)
    return gamma_c, np.maximum(gamma_p, 0.0)


def rate_numerator(problem: ProblemSpec, C, gamma_p) -> float:
    C = np.asarray(C, dtype=float)
    return float(np.sum(problem.u * (C + np.log2(1.0 + np.asarray(gamma_p, dtype=float)))))


def objective_value(problem: ProblemSpec, precoders: PrecoderSet, C, gamma_p) -> float:
    """Weighted sum rate in bits/cu, or for EE the ratio in bits/J/Hz."""
    numerator = rate_numerator(problem, C, gamma_p)
    if not problem.is_ee:
        return numerator
    return numerator / (problem.mu * precoders.total_power() + problem.P_circ)


def check_feasibility(problem: ProblemSpec, report: SolutionReport, feas_tol: float = FEAS_TOL) -> SolutionReport:
    """Recomputes SINRs, rates and the objective from the precoders and lists every violated constraint."""
    precoders = report.precoders
    C = np.asarray(report.C, dtype=float)
    gamma_c, gamma_p = compute_sinrs(problem.channels, precoders)
    rates = C + np.log2(1.0 + gamma_p)
    violations = []

    def flag(name, excess):
        if excess > feas_tol:
            violations.append(Violation(name, float(excess)))

    flag("power", precoders.total_power() - problem.P)
    for k in range(problem.K):
        flag(f"common-share-nonneg[{k}]", -C[k])
        flag(f"qos[{k}]", problem.R_th[k] - rates[k])
    flag("common-rate", C.sum() - np.log2(1.0 + gamma_c.min()))
    if problem.min_common_rate > 0:
        flag("common-rate-floor", problem.min_common_rate - np.log2(1.0 + gamma_c.min()))

    kind = problem.scheme.kind
    if kind is SchemeKind.MULP:
        flag("mulp-common-precoder", np.linalg.norm(precoders.p_c))
        flag("mulp-common-share", np.abs(C).max())
    elif kind is SchemeKind.NOMA2 and problem.scheme.noma_order is not None:
        strong, weak = problem.scheme.noma_order
        flag("noma-weak-private", np.linalg.norm(precoders.p[weak]))
        flag("noma-strong-share", abs(C[strong]))

    objective = objective_value(problem, precoders, np.maximum(C, 0.0), gamma_p)
    if violations:
        logger.debug("candidate infeasible: %s", ", ".join(v.constraint for v in violations))
    return replace(
        report,
        gamma_p=gamma_p,
        gamma_c=gamma_c,
        rates=rates,
        objective=objective,
        feasible=not violations,
        violations=tuple(violations),
    )


def make_report(problem: ProblemSpec, precoders: PrecoderSet, C=None, feas_tol: float = FEAS_TOL) -> SolutionReport:
    """Builds and checks a report for `precoders` with common shares C (zeros if omitted)."""
    C = np.zeros(problem.K) if C is None else np.asarray(C, dtype=float)
    empty = np.zeros(problem.K)
    draft = SolutionReport(precoders, C, empty, empty, empty, 0.0, False)
    return check_feasibility(problem, draft, feas_tol)
