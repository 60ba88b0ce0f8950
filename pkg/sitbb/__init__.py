# sitbb/__init__.py - The global branch-and-bound solver.

from sitbb.box import Box, DualPoint, branch, initial_box
from sitbb.engine import OutcomeStatus, SolverConfig, SolverOutcome, TraceEvent, solve
from sitbb.node import NodeRecord, bound, extract_dual_point, probe_feasible, split_common_rate
from sitbb.reduction import Infeasible, quick_infeasibility, reduce_box
