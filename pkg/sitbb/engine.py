# sitbb/engine.py - Successive incumbent transcending branch-and-bound.
#
# Each iteration expands the live box with the smallest bound, bisects it, reduces and bounds the
# two children, probes the promising ones for a feasible point and raises delta to
# (best value found) + eta. Boxes whose bound exceeds -epsilon hold no point of value >= delta and
# are dropped. When nothing is left the incumbent is (epsilon, eta)-optimal.

import enum
import heapq
import itertools
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from conic.solver import SolverSettings
from errors import MalformedBox
from models.precoder import PrecoderSet
from models.problem import ProblemSpec, scheme_variants
from models.report import SolutionReport, make_report
from sitbb.box import Box, branch, initial_box
from sitbb.node import NodeRecord, bound, probe_feasible, split_common_rate
from sitbb.reduction import Infeasible, reduce_box

logger = logging.getLogger(__name__)
trace_logger = logging.getLogger("sitbb.trace")


class OutcomeStatus(str, enum.Enum):
    OPTIMAL_CERTIFIED = "OptimalCertified"
    EPSILON_ESSENTIAL_INFEASIBLE = "EpsilonEssentialInfeasible"
    BUDGET_EXHAUSTED = "BudgetExhausted"
    # the incumbent no longer checks out once mapped back to the caller's channels
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass(frozen=True)
class SolverConfig:
    eta: float = 0.02
    epsilon: float = 1e-7
    feas_tol: float = 1e-6
    solver_tol: float = 1e-8
    max_iter: int = 10**6
    max_wall_time: float = 600.0
    warm_start: PrecoderSet | None = None
    sca_warm_start: bool = True
    child_workers: int = 1
    trace: bool = True
    backend: str | None = None

    def __post_init__(self):
        if not (self.eta > 0 and self.epsilon > 0):
            raise ValueError("eta and epsilon must be positive")
        if self.child_workers not in (1, 2):
            raise ValueError("child_workers must be 1 or 2")
        if self.max_iter < 0 or self.max_wall_time <= 0:
            raise ValueError("budgets must be positive")

    def solver_settings(self) -> SolverSettings:
        if self.backend:
            return SolverSettings(backend=self.backend.upper(), tol=self.solver_tol)
        return SolverSettings(tol=self.solver_tol)


@dataclass(frozen=True)
class TraceEvent:
    iter: int
    node: int
    event: str  # expand | reduce | bound | incumbent | prune | fail
    beta: float | None
    delta: float
    parent: int | None = None
    parent_beta: float | None = None
    live_min: float | None = None
    detail: str = ""


@dataclass(frozen=True, eq=False)
class SolverOutcome:
    status: OutcomeStatus
    incumbent: SolutionReport | None
    delta_final: float
    iterations: int
    nodes_explored: int
    wall_time: float
    trace: list = field(default_factory=list)
    incumbents: list = field(default_factory=list)
    eta: float = 0.0
    epsilon: float = 0.0

    @property
    def certified(self) -> bool:
        return self.status is OutcomeStatus.OPTIMAL_CERTIFIED

    @property
    def objective(self) -> float | None:
        return None if self.incumbent is None else self.incumbent.objective


class _NodeQueue:
    """Best-first: smallest beta, then lowest node id."""

    def __init__(self):
        self._heap = []

    def push(self, record: NodeRecord) -> None:
        heapq.heappush(self._heap, (record.beta, record.id, record))

    def pop(self) -> NodeRecord:
        return heapq.heappop(self._heap)[2]

    def peek_beta(self) -> float:
        return self._heap[0][0]

    def __len__(self):
        return len(self._heap)


class _Trace:
    def __init__(self, keep: bool):
        self.keep = keep
        self.events: list[TraceEvent] = []
        self._schema = None

    def emit(self, event: TraceEvent) -> None:
        if self.keep:
            self.events.append(event)
        if trace_logger.isEnabledFor(logging.DEBUG):
            if self._schema is None:
                from schemas import TraceEventSchema

                self._schema = TraceEventSchema()
            trace_logger.debug(json.dumps(self._schema.dump(event), sort_keys=True))


class _Search:
    """State of one branch-and-bound run on a fixed-scheme, already rescaled problem."""

    def __init__(self, problem: ProblemSpec, config: SolverConfig):
        self.problem = problem
        self.config = config
        self.settings = config.solver_settings()
        self.trace = _Trace(config.trace)
        self.queue = _NodeQueue()
        self.ids = itertools.count()
        self.delta = 0.0
        self.incumbent: SolutionReport | None = None
        self.incumbents: list[SolutionReport] = []
        self.iteration = 0
        self.nodes = 0
        self.pool = ThreadPoolExecutor(max_workers=2) if config.child_workers == 2 else None

    def _take_incumbent(self, report: SolutionReport, node: int, how: str) -> None:
        self.incumbent = report
        self.incumbents.append(report)
        self.delta = report.objective + self.config.eta
        logger.info("incumbent %.6f (%s), delta -> %.6f", report.objective, how, self.delta)
        self.trace.emit(TraceEvent(self.iteration, node, "incumbent", None, self.delta, detail=how))

    def _evaluate(self, box: Box, node_id: int, parent: NodeRecord | None) -> tuple[NodeRecord, Box | None]:
        parent_beta = -math.inf if parent is None else parent.beta
        meta = dict(node_id=node_id, parent=None if parent is None else parent.id, depth=0 if parent is None else parent.depth + 1)
        reduced = reduce_box(box, self.delta, self.problem)
        if reduced is Infeasible:
            return NodeRecord(box, math.inf, None, depth=meta["depth"], id=node_id, parent=meta["parent"], how="reduced-empty"), None
        return bound(reduced, self.delta, self.problem, self.settings, parent_beta=parent_beta, **meta), reduced

    def process(self, boxes: list[Box], parent: NodeRecord | None) -> None:
        node_ids = [next(self.ids) for _ in boxes]
        if self.pool is not None and len(boxes) == 2:
            results = list(self.pool.map(self._evaluate, boxes, node_ids, [parent, parent]))
        else:
            results = [self._evaluate(box, node_id, parent) for box, node_id in zip(boxes, node_ids)]
        self.nodes += len(results)

        parent_id = None if parent is None else parent.id
        parent_beta = None if parent is None else parent.beta
        for (record, reduced), box in zip(results, boxes):
            detail = "empty" if reduced is None else ("shrunk" if not _same_box(reduced, box) else "unchanged")
            self.trace.emit(TraceEvent(self.iteration, record.id, "reduce", None, self.delta, parent_id, parent_beta, detail=detail))
            event = "fail" if record.force_branch else "bound"
            self.trace.emit(TraceEvent(self.iteration, record.id, event, record.beta, self.delta, parent_id, parent_beta, detail=record.how))

        best = None
        for record, _ in results:
            if record.dual_point is None or record.beta > 0:
                continue
            report = probe_feasible(record.dual_point, self.delta, self.problem, self.settings, self.config.feas_tol)
            if report is not None and (best is None or report.objective > best[0].objective):
                best = (report, record.id)
        if best is not None and best[0].objective > self.delta - self.config.eta:
            self._take_incumbent(best[0], best[1], "probe")

        for record, _ in results:
            if record.beta > -self.config.epsilon:
                self.trace.emit(TraceEvent(self.iteration, record.id, "prune", record.beta, self.delta, parent_id, parent_beta))
            else:
                self.queue.push(record)

    def run(self) -> OutcomeStatus:
        start = time.perf_counter()
        root = initial_box(self.problem)
        self.init_widths = root.widths
        self.process([root], None)
        try:
            while len(self.queue):
                if self.iteration >= self.config.max_iter or time.perf_counter() - start > self.config.max_wall_time:
                    logger.info("budget exhausted after %d iterations", self.iteration)
                    return OutcomeStatus.BUDGET_EXHAUSTED
                self.iteration += 1
                live_min = self.queue.peek_beta()
                node = self.queue.pop()
                self.trace.emit(TraceEvent(self.iteration, node.id, "expand", node.beta, self.delta, node.parent, live_min=live_min))
                try:
                    children = branch(node.box, self.init_widths)
                except MalformedBox:
                    logger.warning("node %d is a single point and cannot be split; dropping it", node.id)
                    self.trace.emit(TraceEvent(self.iteration, node.id, "prune", node.beta, self.delta, detail="degenerate"))
                    continue
                self.process(list(children), node)
        finally:
            if self.pool is not None:
                self.pool.shutdown()
        if self.incumbent is None:
            return OutcomeStatus.EPSILON_ESSENTIAL_INFEASIBLE
        return OutcomeStatus.OPTIMAL_CERTIFIED


def _same_box(a: Box, b: Box) -> bool:
    return bool((a.lo == b.lo).all() and (a.hi == b.hi).all())


def _warm_start(problem: ProblemSpec, config: SolverConfig, scale: float, settings: SolverSettings) -> SolutionReport | None:
    if config.warm_start is not None:
        precoders = config.warm_start.scaled(1.0 / scale).rotated(problem.h)
        report = split_common_rate(problem, precoders, 0.0, settings, config.feas_tol)
        if report is None:
            logger.info("user-provided warm start is infeasible; starting from delta = 0")
        return report
    if not config.sca_warm_start:
        return None
    # imported here: the baseline reuses sitbb.node
    from baseline.sca import ScaConfig, sca_solve

    report = sca_solve(problem, ScaConfig(feas_tol=config.feas_tol, backend=config.backend))
    if not report.feasible:
        return None
    rotated = report.precoders.rotated(problem.h)
    return make_report(problem, rotated, report.C, config.feas_tol)


def _solve_fixed_scheme(problem: ProblemSpec, config: SolverConfig) -> SolverOutcome:
    started = time.perf_counter()
    scaled, scale = problem.rescaled()
    search = _Search(scaled, config)
    warm = _warm_start(scaled, config, scale, search.settings)
    if warm is not None:
        search._take_incumbent(warm, -1, "warm-start")
    status = search.run()

    def restore(report: SolutionReport) -> SolutionReport:
        if scale == 1.0:
            return report
        return make_report(problem, report.precoders.scaled(scale), report.C, config.feas_tol)

    incumbents = [restore(report) for report in search.incumbents]
    if incumbents and not incumbents[-1].feasible:
        logger.warning(
            "incumbent fails the feasibility check after undoing the channel scaling (c = %.3g): %s",
            scale,
            ", ".join(v.constraint for v in incumbents[-1].violations),
        )
        if status is OutcomeStatus.OPTIMAL_CERTIFIED:
            status = OutcomeStatus.NUMERICAL_FAILURE
    outcome = SolverOutcome(
        status=status,
        incumbent=incumbents[-1] if incumbents else None,
        delta_final=search.delta,
        iterations=search.iteration,
        nodes_explored=search.nodes,
        wall_time=time.perf_counter() - started,
        trace=search.trace.events,
        incumbents=incumbents,
        eta=config.eta,
        epsilon=config.epsilon,
    )
    logger.info(
        "%s: %s after %d iterations (%d nodes, %.2fs), objective %s",
        problem.scheme.kind.value,
        status.value,
        outcome.iterations,
        outcome.nodes_explored,
        outcome.wall_time,
        "n/a" if outcome.objective is None else f"{outcome.objective:.6f}",
    )
    return outcome


def solve(problem: ProblemSpec, config: SolverConfig | None = None) -> SolverOutcome:
    """Globally solves `problem`; an unset NOMA2 order runs both orders and keeps the better one."""
    config = config or SolverConfig()
    outcomes = [_solve_fixed_scheme(variant, config) for variant in scheme_variants(problem)]
    if len(outcomes) == 1:
        return outcomes[0]
    return _merge(outcomes)


def _merge(outcomes: list[SolverOutcome]) -> SolverOutcome:
    found = [o for o in outcomes if o.incumbent is not None]
    best = max(found, key=lambda o: o.incumbent.objective) if found else outcomes[0]
    failed = [o.status for o in outcomes if o.status in (OutcomeStatus.BUDGET_EXHAUSTED, OutcomeStatus.NUMERICAL_FAILURE)]
    if failed:
        status = failed[0]
    elif found:
        status = OutcomeStatus.OPTIMAL_CERTIFIED
    else:
        status = OutcomeStatus.EPSILON_ESSENTIAL_INFEASIBLE
    return SolverOutcome(
        status=status,
        incumbent=best.incumbent,
        delta_final=best.delta_final,
        iterations=sum(o.iterations for o in outcomes),
        nodes_explored=sum(o.nodes_explored for o in outcomes),
        wall_time=sum(o.wall_time for o in outcomes),
        trace=best.trace,
        incumbents=best.incumbents,
        eta=best.eta,
        epsilon=best.epsilon,
    )
