# Resources/sweep.py - The experiment commands: rate-region, sweep-snr and sweep-ee.
#
# Each command runs the matching sections of a plan file (or one plan built from the flags), writes
# one CSV per plan and, with --svg, a plot drawn from that CSV.

import logging
from pathlib import Path

import click

from experiments.channels import DISPARATE_VARIANCES
from experiments.plans import EE_POWER_DBM, RATE_REGION_EXPONENTS, SUM_RATE_QOS, SUM_RATE_SNR_DB, load_plans
from experiments.runner import CERTIFIED, aggregate, read_csv, region_hulls, run_plan, write_csv
from Resources.common import FLOATS, handles_errors, read_seed_file, session_factory_for
from schemas import ExperimentPlanSchema

logger = logging.getLogger(__name__)

blup = click.Group("sweep-commands", help="Experiment sweeps")

DEFAULT_GRID = {"rate-region": RATE_REGION_EXPONENTS, "sum-rate": SUM_RATE_SNR_DB, "ee": EE_POWER_DBM}
DEFAULT_QOS = {"rate-region": (), "sum-rate": SUM_RATE_QOS, "ee": (1.0,)}


def sweep_options(func):
    """Options shared by the three sweep commands."""
    options = [
        click.option("--plan", "plan_file", type=click.Path(exists=True, dir_okay=False), help="Plan file; runs its sections of this kind."),
        click.option("--seeds", "seed_file", type=click.Path(exists=True, dir_okay=False), help="File with one seed per line."),
        click.option("--count", type=click.IntRange(min=1), default=None, help="Number of seeds (plan default 20)."),
        click.option("--K", "K", type=click.IntRange(min=1), default=None),
        click.option("--M", "M", type=click.IntRange(min=1), default=None),
        click.option("--var", type=FLOATS, default=None, help="Channel variances, one per user."),
        click.option("--disparate", is_flag=True, help="Use channel variances (1, 0.09)."),
        click.option("--scheme", "schemes", type=click.Choice(["rsma", "mulp", "noma"]), multiple=True, help="Repeat to run several."),
        click.option("--solver", "solvers", type=click.Choice(["bb", "sca"]), multiple=True, help="Repeat to run several."),
        click.option("--eta", type=float, default=None, help="BB tolerance (plan default 0.05)."),
        click.option("--epsilon", type=float, default=None),
        click.option("--max-time", type=float, default=None, help="Wall-clock budget per BB run in seconds."),
        click.option("--no-warm-start", is_flag=True),
        click.option("--full-scale", is_flag=True, help="eta = 0.02 and 100 seeds."),
        click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True, help="Worker processes; 1 keeps CSVs byte-identical."),
        click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory (plan default results/)."),
        click.option("--svg", is_flag=True, help="Also write an SVG plot per plan."),
        click.option("--db", "db_url", default=None, help="SQLAlchemy URL of a result store (default $DATABASE_URL)."),
        click.option("--timing", is_flag=True, help="Write real wall times into the CSV."),
        click.option("--quiet", is_flag=True, help="No progress bar."),
        click.option("--strict", is_flag=True, help="Exit with code 3 unless every BB row is certified."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _default_plan(kind: str, grid, qos, extra=None):
    data = {
        "name": kind,
        "kind": kind,
        "grid": list(grid) if grid else list(DEFAULT_GRID[kind]),
        "qos": list(qos) if qos else list(DEFAULT_QOS[kind]),
    }
    data.update(extra or {})
    return ExperimentPlanSchema().load(data)


def _apply_flags(plan, opts):
    changes = {key: opts[key] for key in ("count", "K", "M", "eta", "epsilon", "max_time", "out") if opts[key] is not None}
    variances = opts["var"] or (list(DISPARATE_VARIANCES) if opts["disparate"] else None)
    if variances:
        changes["variances"] = list(variances)
    if opts["schemes"]:
        changes["schemes"] = list(opts["schemes"])
    if opts["solvers"]:
        changes["solvers"] = list(opts["solvers"])
    if opts["no_warm_start"]:
        changes["warm_start"] = False
    if opts["full_scale"]:
        changes.update(eta=0.02, count=100)
    if not changes:
        return plan
    # back through the schema so overridden plans are validated like plan files
    schema = ExperimentPlanSchema()
    data = schema.dump(plan)
    data.update(changes)
    return schema.load(data)


def _run(kind: str, ctx, opts, plans):
    seeds = read_seed_file(opts["seed_file"]) if opts["seed_file"] else None
    session_factory = session_factory_for(opts["db_url"])
    not_certified = 0
    for plan in plans:
        plan = _apply_flags(plan, opts)
        out = Path(plan.out)
        out.mkdir(parents=True, exist_ok=True)
        rows = run_plan(plan, jobs=opts["jobs"], seeds=seeds, session_factory=session_factory, progress=not opts["quiet"])
        csv_path = out / f"{plan.name}.csv"
        write_csv(rows, csv_path, plan.K, timing=opts["timing"])
        not_certified += sum(1 for row in rows if row.solver == "bb" and row.status != CERTIFIED)

        frame = read_csv(csv_path)
        click.echo(f"== {plan.name} ({kind}) -> {csv_path}")
        if kind == "rate-region":
            for (scheme, solver), hull in sorted(region_hulls(frame).items()):
                click.echo(f"{scheme:5s} {solver:3s} " + " ".join(f"({x:.3f}, {y:.3f})" for x, y in hull))
        else:
            click.echo(aggregate(frame).to_string(index=False))
        if opts["svg"]:
            from experiments.plots import plot_csv

            svg_path = out / f"{plan.name}.svg"
            plot_csv(frame, svg_path, kind, title=plan.name)
            click.echo(f"plot -> {svg_path}")

    if not_certified:
        click.echo(f"{not_certified} BB rows were not certified and are left out of the means")
        if opts["strict"]:
            ctx.exit(3)


def _plans(kind: str, opts, default):
    if opts["plan_file"] is None:
        return [default()]
    plans = [plan for plan in load_plans(opts["plan_file"]) if plan.kind.value == kind]
    if not plans:
        raise click.UsageError(f"{opts['plan_file']} has no {kind} sections")
    return plans


@blup.command("rate-region")
@sweep_options
@click.option("--snr-db", type=float, default=None, help="Transmit SNR (plan default 20 dB).")
@click.option("--weights", type=FLOATS, default=None, help="Exponents x of the weight u2 = 10^x.")
@click.pass_context
@handles_errors
def rate_region_command(ctx, snr_db, weights, **opts):
    """Two-user rate regions: weighted sum rates over a grid of weights, then the convex hull."""
    extra = {"snr_db": snr_db} if snr_db is not None else {}
    _run("rate-region", ctx, opts, _plans("rate-region", opts, lambda: _default_plan("rate-region", weights, None, extra)))


@blup.command("sweep-snr")
@sweep_options
@click.option("--snr-db", type=FLOATS, default=None, help="SNR grid in dB (default 5,10,..,30).")
@click.option("--qos", type=FLOATS, default=None, help="QoS ladder paired with the grid, or one value.")
@click.pass_context
@handles_errors
def sweep_snr_command(ctx, snr_db, qos, **opts):
    """Mean sum rate against transmit SNR."""
    _run("sum-rate", ctx, opts, _plans("sum-rate", opts, lambda: _default_plan("sum-rate", snr_db, qos)))


@blup.command("sweep-ee")
@sweep_options
@click.option("--power-dbm", type=FLOATS, default=None, help="Power grid in dBm (default 4,6,..,30).")
@click.option("--qos", type=FLOATS, default=None, help="QoS threshold (default 1 bit/cu).")
@click.pass_context
@handles_errors
def sweep_ee_command(ctx, power_dbm, qos, **opts):
    """Mean energy efficiency against the power budget."""
    _run("ee", ctx, opts, _plans("ee", opts, lambda: _default_plan("ee", power_dbm, qos)))
