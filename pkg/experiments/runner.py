# experiments/runner.py - Runs experiment plans: one task per (grid point, seed, scheme, solver).
#
# Tasks are independent, so they can go to a process pool; results are always put back in plan
# order before anything is written. wall_ms is measured for every task but written to the CSV only
# on request, so default CSVs are byte-reproducible.

import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np
import pandas as pd
from sqlalchemy import select
from sqlalchemy.exc import SQLAlchemyError
from tqdm import tqdm

from baseline.sca import ScaConfig, sca_run
from errors import PlanError
from experiments.channels import gen_channels
from experiments.hull import convex_hull
from experiments.plans import ExperimentPlan, PlanKind
from models.problem import ProblemSpec, SchemeConfig
from sitbb.engine import OutcomeStatus, SolverConfig, solve

logger = logging.getLogger(__name__)

CERTIFIED = OutcomeStatus.OPTIMAL_CERTIFIED.value


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class Task:
    plan: str
    kind: str
    index: int  # position on the grid
    grid_x: float
    seed: int
    scheme: str
    solver: str

    @property
    def key(self) -> tuple:
        return (self.plan, self.seed, self.scheme, float(self.grid_x), self.solver)


@dataclass(frozen=True)
class ResultRow:
    plan: str
    kind: str
    seed: int
    scheme: str
    grid_x: float
    solver: str
    objective: float | None
    rates: tuple
    common: tuple
    status: str
    wall_ms: float = 0.0

    @property
    def key(self) -> tuple:
        return (self.plan, self.seed, self.scheme, float(self.grid_x), self.solver)

    @property
    def usable(self) -> bool:
        """Certified BB rows and feasible SCA rows enter the averages; everything else is counted as skipped."""
        if self.objective is None or not math.isfinite(self.objective):
            return False
        return self.solver != "bb" or self.status == CERTIFIED


# ------------------------------
# Tasks
# ------------------------------


def plan_tasks(plan: ExperimentPlan, seeds=None) -> list[Task]:
    if plan.kind is PlanKind.RATE_REGION and plan.K != 2:
        raise PlanError(f"plan {plan.name}: rate regions are drawn for two users")
    seeds = plan.seeds if seeds is None else list(seeds)
    return [
        Task(plan.name, plan.kind.value, index, float(x), int(seed), scheme, solver)
        for index, x in enumerate(plan.grid)
        for seed in seeds
        for scheme in plan.schemes
        for solver in plan.solvers
    ]


def build_problem(plan: ExperimentPlan, task: Task) -> ProblemSpec:
    """The problem a task solves; all dB and dBm conversions happen here."""
    channels = gen_channels(task.seed, plan.K, plan.M, plan.channel_variances)
    scheme = SchemeConfig(task.scheme)
    if plan.kind is PlanKind.RATE_REGION:
        u = np.array([1.0, 10.0**task.grid_x])
        return ProblemSpec.wsr(channels, db_to_linear(plan.snr_db), u=u, scheme=scheme)
    R_th = np.full(plan.K, plan.qos_at(task.index))
    if plan.kind is PlanKind.SUM_RATE:
        return ProblemSpec.wsr(channels, db_to_linear(task.grid_x), R_th=R_th, scheme=scheme)
    # EE: physical units, so the channels are divided by the noise standard deviation
    P_circ = plan.M * dbm_to_watt(plan.p_dyn_dbm) + plan.p_sta_mw * 1e-3
    return ProblemSpec.ee(
        channels.noise_normalized(plan.noise_var), dbm_to_watt(task.grid_x), plan.mu, P_circ, R_th=R_th, scheme=scheme
    )


def run_task(plan: ExperimentPlan, task: Task) -> ResultRow:
    problem = build_problem(plan, task)
    started = time.perf_counter()
    if task.solver == "bb":
        config = SolverConfig(
            eta=plan.eta, epsilon=plan.epsilon, max_wall_time=plan.max_time, sca_warm_start=plan.warm_start, trace=False
        )
        outcome = solve(problem, config)
        report, status = outcome.incumbent, outcome.status.value
    else:
        run = sca_run(problem, ScaConfig(seed=task.seed))
        report = run.report if run.report.feasible else None
        status = run.status.value
    wall_ms = (time.perf_counter() - started) * 1e3

    if report is None:
        nan = (math.nan,) * plan.K
        return ResultRow(task.plan, task.kind, task.seed, task.scheme, task.grid_x, task.solver, None, nan, nan, status, wall_ms)
    return ResultRow(
        task.plan,
        task.kind,
        task.seed,
        task.scheme,
        task.grid_x,
        task.solver,
        float(report.objective),
        tuple(float(r) for r in report.rates),
        tuple(float(c) for c in report.C),
        status,
        wall_ms,
    )


def _run_indexed(plan: ExperimentPlan, position: int, task: Task) -> tuple[int, ResultRow]:
    return position, run_task(plan, task)


# ------------------------------
# Result store
# ------------------------------


def _row_from_model(model) -> ResultRow:
    def floats(text):
        return tuple(float(v) for v in json.loads(text))

    return ResultRow(
        model.plan,
        model.kind,
        model.seed,
        model.scheme,
        model.grid_x,
        model.solver,
        model.objective,
        floats(model.rates),
        floats(model.common),
        model.status,
        model.wall_ms,
    )


def stored_rows(session_factory, plan_name: str) -> dict[tuple, ResultRow]:
    from models.result import ResultRowModel

    with session_factory() as session:
        models = session.scalars(select(ResultRowModel).where(ResultRowModel.plan == plan_name)).all()
        return {row.key: row for row in map(_row_from_model, models)}


def store_row(session_factory, row: ResultRow) -> None:
    from models.result import ResultRowModel
    from schemas import ResultRowSchema

    with session_factory() as session:
        try:
            session.add(ResultRowModel(**ResultRowSchema().dump(row)))
            session.commit()
        except SQLAlchemyError as err:
            session.rollback()
            logger.warning("could not store %s: %s", row.key, err)


# ------------------------------
# Running a plan
# ------------------------------


def run_plan(plan: ExperimentPlan, jobs: int = 1, seeds=None, session_factory=None, progress: bool = True) -> list[ResultRow]:
    """Every row of `plan`, in plan order. With a store, tasks already stored are not run again."""
    tasks = plan_tasks(plan, seeds)
    done = stored_rows(session_factory, plan.name) if session_factory is not None else {}
    rows: list[ResultRow | None] = [done.get(task.key) for task in tasks]
    pending = [(i, task) for i, task in enumerate(tasks) if rows[i] is None]
    if done:
        logger.info("plan %s: %d of %d tasks already in the store", plan.name, len(tasks) - len(pending), len(tasks))
    logger.info("plan %s: running %d tasks with %d worker(s)", plan.name, len(pending), jobs)

    def collect(position, row):
        rows[position] = row
        if session_factory is not None:
            store_row(session_factory, row)

    with tqdm(total=len(pending), desc=plan.name, disable=not progress, leave=False) as bar:
        if jobs <= 1:
            for position, task in pending:
                collect(*_run_indexed(plan, position, task))
                bar.update()
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(_run_indexed, plan, position, task) for position, task in pending]
                for future in as_completed(futures):
                    collect(*future.result())
                    bar.update()
    return rows


# ------------------------------
# CSV and aggregation
# ------------------------------


def rows_frame(rows, K: int, timing: bool = False) -> pd.DataFrame:
    records = []
    for row in rows:
        record = {
            "seed": row.seed,
            "scheme": row.scheme,
            "grid_x": row.grid_x,
            "solver": row.solver,
            "objective": np.nan if row.objective is None else row.objective,
        }
        record.update({f"R{k + 1}": row.rates[k] for k in range(K)})
        record.update({f"C{k + 1}": row.common[k] for k in range(K)})
        record["status"] = row.status
        record["wall_ms"] = round(row.wall_ms, 3) if timing else 0.0
        records.append(record)
    columns = ["seed", "scheme", "grid_x", "solver", "objective"]
    columns += [f"R{k + 1}" for k in range(K)] + [f"C{k + 1}" for k in range(K)] + ["status", "wall_ms"]
    return pd.DataFrame.from_records(records, columns=columns)


def write_csv(rows, path, K: int, timing: bool = False) -> pd.DataFrame:
    frame = rows_frame(rows, K, timing)
    frame.to_csv(path, index=False, lineterminator="\n", float_format="%.10g")
    logger.info("wrote %d rows to %s", len(frame), path)
    return frame


def read_csv(path) -> pd.DataFrame:
    return pd.read_csv(path)


def _usable_mask(frame: pd.DataFrame) -> pd.Series:
    finite = frame["objective"].notna()
    return finite & ((frame["solver"] != "bb") | (frame["status"] == CERTIFIED))


def aggregate(frame: pd.DataFrame) -> pd.DataFrame:
    """Mean objective per (scheme, solver, grid point) over usable rows, with the number of rows skipped."""
    usable = _usable_mask(frame)
    frame = frame.assign(usable=usable, kept=frame["objective"].where(usable))
    summary = (
        frame.groupby(["scheme", "solver", "grid_x"], sort=False)
        .agg(mean_objective=("kept", "mean"), used=("usable", "sum"), rows=("usable", "size"))
        .reset_index()
    )
    summary["used"] = summary["used"].astype(int)
    summary["skipped"] = summary.pop("rows") - summary["used"]
    skipped = int(summary["skipped"].sum())
    if skipped:
        logger.info("%d rows were not certified or infeasible and left out of the means", skipped)
    return summary


def region_points(frame: pd.DataFrame) -> pd.DataFrame:
    """(R1, R2) averaged across seeds per scheme, solver and weight exponent."""
    usable = frame[_usable_mask(frame)]
    return usable.groupby(["scheme", "solver", "grid_x"], sort=False)[["R1", "R2"]].mean().reset_index()


def region_hulls(frame: pd.DataFrame) -> dict[tuple[str, str], list[tuple[float, float]]]:
    points = region_points(frame)
    return {
        (scheme, solver): convex_hull(group[["R1", "R2"]].to_numpy())
        for (scheme, solver), group in points.groupby(["scheme", "solver"], sort=False)
    }


# ------------------------------
# Experiments
# ------------------------------


def _expect(plan: ExperimentPlan, kind: PlanKind) -> None:
    if plan.kind is not kind:
        raise PlanError(f"plan {plan.name!r} is a {plan.kind.value} plan, not {kind.value}")


def rate_region(plan: ExperimentPlan, **run_options) -> tuple[list[ResultRow], dict[tuple[str, str], list[tuple[float, float]]]]:
    """Rows of a rate-region plan and the hull of the seed-averaged rate pairs per scheme and solver."""
    _expect(plan, PlanKind.RATE_REGION)
    rows = run_plan(plan, **run_options)
    return rows, region_hulls(rows_frame(rows, plan.K))


def sweep_sum_rate(plan: ExperimentPlan, **run_options) -> list[ResultRow]:
    _expect(plan, PlanKind.SUM_RATE)
    return run_plan(plan, **run_options)


def sweep_ee(plan: ExperimentPlan, **run_options) -> list[ResultRow]:
    _expect(plan, PlanKind.EE)
    return run_plan(plan, **run_options)
