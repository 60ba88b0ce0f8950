# experiments/__init__.py - Channel generation, plans, the sweep runner and the audit suites.
# Plots live in experiments.plots and are imported on demand (matplotlib is slow to load).

from experiments.audit import (
    AuditFinding,
    GridOracle,
    audit_trace,
    bb_sca_sandwich,
    monotone_in_grid,
    mulp_grid_oracle,
    reduction_no_loss,
    sample_feasible_points,
    scheme_nesting,
    single_user_capacity,
)
from experiments.channels import DISPARATE_VARIANCES, gen_channels
from experiments.hull import convex_hull, hull_contains
from experiments.plans import ExperimentPlan, PlanKind, dumps_plans, load_plans, parse_plans
from experiments.runner import (
    ResultRow,
    Task,
    aggregate,
    build_problem,
    rate_region,
    region_hulls,
    run_plan,
    sweep_ee,
    sweep_sum_rate,
    write_csv,
)
