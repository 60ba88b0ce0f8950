# conic/__init__.py - Second-order-cone subproblems: data model, builders and the cvxpy bridge.

from conic.builders import (
    build_bounding_socp,
    build_common_rate_lp,
    build_gtilde_program,
    build_power_feasibility,
)
from conic.envelope import EnvelopeCut, TrivialRelaxation, envelope_cuts
from conic.program import Affine, ConeKind, ConicProgram, ProgramBuilder, Sense, lift, unlift
from conic.solver import ConicSolution, SolverSettings, SolveStatus, solve
