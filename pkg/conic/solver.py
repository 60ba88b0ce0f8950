# conic/solver.py - Hands a ConicProgram to cvxpy and maps whatever comes back to a SolveStatus.

import enum
import logging
import os
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np

from conic.program import ConeKind, ConicProgram, Sense, unlift

logger = logging.getLogger(__name__)

# solver-specific names of the absolute gap, relative gap and feasibility tolerances
_TOLERANCE_OPTIONS = {
    "CLARABEL": ("tol_gap_abs", "tol_gap_rel", "tol_feas"),
    "ECOS": ("abstol", "reltol", "feastol"),
    "SCS": ("eps_abs", "eps_rel", None),
}


class SolveStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass(frozen=True)
class SolverSettings:
    backend: str = field(default_factory=lambda: os.getenv("RSMA_GLOBOPT_SOLVER", "CLARABEL").upper())
    tol: float = 1e-8
    residual_tol: float = 1e-6

    def __post_init__(self):
        if self.tol <= 0 or self.residual_tol <= 0:
            raise ValueError("solver tolerances must be positive")

    def options(self) -> dict:
        names = _TOLERANCE_OPTIONS.get(self.backend)
        if names is None:
            return {}
        return {name: self.tol for name in names if name is not None}


@dataclass(frozen=True, eq=False)
class ConicSolution:
    status: SolveStatus
    objective: float
    x: np.ndarray | None
    residual: float
    program: ConicProgram
    residuals: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL

    def value(self, name: str) -> np.ndarray:
        block = self.program.block(name)
        return self.x[block.slice]

    def complex_value(self, name: str) -> np.ndarray:
        return unlift(self.value(name))

    def scalar(self, name: str) -> float:
        return float(self.value(name)[0])


def _cvxpy_constraint(kind: ConeKind, expr):
    if kind is ConeKind.ZERO:
        return expr == 0
    if kind is ConeKind.NONNEG:
        return expr >= 0
    if kind is ConeKind.SOC:
        return cp.SOC(expr[0], expr[1:])
    # z0 z1 >= |w|^2  <=>  ||(z0 - z1, 2w)|| <= z0 + z1
    return cp.SOC(expr[0] + expr[1], cp.hstack([expr[0] - expr[1], 2 * expr[2:]]))


def _failure(program: ConicProgram, reason: str) -> ConicSolution:
    logger.warning("%s: numerical failure (%s)", program.name, reason)
    return ConicSolution(SolveStatus.NUMERICAL_FAILURE, float("nan"), None, float("inf"), program)


def solve(program: ConicProgram, settings: SolverSettings | None = None) -> ConicSolution:
    """Solves `program`. Optimal is only reported when the recomputed residuals are small."""
    settings = settings or SolverSettings()
    x = cp.Variable(program.n)
    constraints = []
    for con in program.constraints:
        expr = con.A @ x + con.b
        constraints.append(_cvxpy_constraint(con.kind, expr))
    objective_expr = program.c @ x + program.c0
    objective = cp.Minimize(objective_expr) if program.sense is Sense.MIN else cp.Maximize(objective_expr)
    problem = cp.Problem(objective, constraints)

    try:
        problem.solve(solver=settings.backend, **settings.options())
    except (cp.error.SolverError, ValueError, ArithmeticError) as err:
        return _failure(program, str(err))

    status = problem.status
    if status == cp.INFEASIBLE:
        return ConicSolution(SolveStatus.INFEASIBLE, float("inf") if program.sense is Sense.MIN else float("-inf"), None, 0.0, program)
    if status == cp.UNBOUNDED:
        return ConicSolution(SolveStatus.UNBOUNDED, float("-inf") if program.sense is Sense.MIN else float("inf"), None, 0.0, program)
    if status != cp.OPTIMAL or x.value is None:
        return _failure(program, f"solver status {status}")

    xv = np.asarray(x.value, dtype=float)
    residuals = {}
    worst = 0.0
    for con in program.constraints:
        rel = con.violation(xv) / (1.0 + con.scale(xv))
        residuals[con.tag] = max(residuals.get(con.tag, 0.0), rel)
        worst = max(worst, rel)
    if worst > settings.residual_tol:
        return _failure(program, f"residual {worst:.2e} above {settings.residual_tol:.0e}")
    value = float(program.c @ xv + program.c0)
    return ConicSolution(SolveStatus.OPTIMAL, value, xv, worst, program, residuals)
