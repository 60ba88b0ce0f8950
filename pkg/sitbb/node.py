# sitbb/node.py - Bounding a box, extracting its dual point and probing for a feasible solution.

import logging
import math
from dataclasses import dataclass

import numpy as np

from conic.builders import build_bounding_socp, build_common_rate_lp, build_gtilde_program
from conic.solver import ConicSolution, SolverSettings, SolveStatus, solve
from models.precoder import PrecoderSet
from models.problem import ProblemSpec
from models.report import FEAS_TOL, SolutionReport, compute_sinrs, make_report
from sitbb.box import TWO_PI, Box, DualPoint
from sitbb.reduction import quick_infeasibility

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class NodeRecord:
    box: Box
    beta: float
    dual_point: DualPoint | None
    depth: int = 0
    id: int = 0
    parent: int | None = None
    force_branch: bool = False
    # "certificate", "infeasible", "optimal", "retry", "inherited"
    how: str = "optimal"


def nearest_corner(theta: float, lo: float, hi: float) -> float:
    """The end of [lo, hi] closer to the angle theta on the circle; lo wins ties."""

    def gap(a: float) -> float:
        d = abs(a - theta) % TWO_PI
        return min(d, TWO_PI - d)

    return lo if gap(lo) <= gap(hi) else hi


def extract_dual_point(bounding_solution: ConicSolution, box: Box) -> DualPoint:
    """Undoes the log substitution and snaps each argument to the nearer corner of its interval."""
    gamma = 2.0 ** bounding_solution.value("gp") - 1.0
    gamma = np.clip(gamma, box.gamma_lo, box.gamma_hi)
    if not box.common:
        return DualPoint(gamma, 0.0, np.zeros(0))
    s = float(np.clip(2.0 ** bounding_solution.scalar("sp") - 1.0, box.s_lo, box.s_hi))
    alpha = np.zeros(box.K - 1)
    if box.K > 1:
        angles = np.mod(np.angle(bounding_solution.complex_value("e")), TWO_PI)
        for i, theta in enumerate(angles):
            alpha[i] = nearest_corner(theta, box.alpha_lo[i], box.alpha_hi[i])
    return DualPoint(gamma, s, alpha)


def bound(
    box: Box,
    delta: float,
    problem: ProblemSpec,
    settings: SolverSettings | None = None,
    *,
    parent_beta: float = -math.inf,
    node_id: int = 0,
    parent: int | None = None,
    depth: int = 0,
) -> NodeRecord:
    """beta(M): +inf for empty boxes, else the bounding SOCP value; on solver failure the parent's bound."""
    meta = dict(depth=depth, id=node_id, parent=parent)
    if quick_infeasibility(box, delta, problem):
        return NodeRecord(box, math.inf, None, how="certificate", **meta)

    program = build_bounding_socp(box, delta, problem)
    solution = solve(program, settings)
    how = "optimal"
    if solution.status is SolveStatus.NUMERICAL_FAILURE:
        logger.warning("node %d: bounding failed, retrying on the normalized program", node_id)
        solution = solve(program.normalized(), settings)
        how = "retry"

    if solution.status is SolveStatus.INFEASIBLE:
        return NodeRecord(box, math.inf, None, how="infeasible", **meta)
    if solution.status is SolveStatus.OPTIMAL:
        return NodeRecord(box, solution.objective, extract_dual_point(solution, box), how=how, **meta)
    # unbounded cannot happen for a well-posed box; treat it like a failure
    logger.warning("node %d: bounding failed twice (%s), inheriting parent bound", node_id, solution.status.value)
    return NodeRecord(box, parent_beta, None, force_branch=True, how="inherited", **meta)


def split_common_rate(
    problem: ProblemSpec,
    precoders: PrecoderSet,
    delta: float = 0.0,
    settings: SolverSettings | None = None,
    feas_tol: float = FEAS_TOL,
) -> SolutionReport | None:
    """Best common-rate split for fixed precoders; None when QoS (or delta) cannot be met."""
    if precoders.total_power() > problem.P:
        precoders = precoders.scaled(math.sqrt(problem.P / precoders.total_power()))
    gamma_c, gamma_p = compute_sinrs(problem.channels, precoders)
    s_star = float(gamma_c.min()) if problem.common_enabled else 0.0
    program = build_common_rate_lp(gamma_p, s_star, precoders, delta, problem, slack=feas_tol)
    solution = solve(program, settings)
    if not solution.optimal:
        return None
    C = np.maximum(solution.value("C"), 0.0)
    C[list(problem.pinned_common)] = 0.0
    report = make_report(problem, precoders, C, feas_tol)
    return report if report.feasible else None


def probe_feasible(
    x_point: DualPoint,
    delta: float,
    problem: ProblemSpec,
    settings: SolverSettings | None = None,
    feas_tol: float = FEAS_TOL,
) -> SolutionReport | None:
    """Evaluates the dual objective at x_point; t* <= 0 yields a primal feasible point."""
    solution = solve(build_gtilde_program(x_point, delta, problem), settings)
    if not solution.optimal or solution.objective > 0:
        return None
    p_c = solution.complex_value("p_c") if problem.common_enabled else np.zeros(problem.M, dtype=complex)
    p = np.zeros((problem.K, problem.M), dtype=complex)
    for k in problem.private_users:
        p[k] = solution.complex_value(f"p{k}")
    report = split_common_rate(problem, PrecoderSet(p_c, p), delta, settings, feas_tol)
    if report is None:
        logger.debug("g-tilde point with t* = %.3g rejected by the common-rate split", solution.objective)
    return report
