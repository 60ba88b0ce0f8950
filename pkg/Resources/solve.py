# Resources/solve.py - The `solve` command: one instance, globally solved, with the SCA value for comparison.

import json
import logging

import click
import numpy as np

from baseline.sca import ScaConfig, sca_run
from experiments.channels import gen_channels
from experiments.plans import ExperimentPlan
from experiments.runner import db_to_linear, dbm_to_watt
from models.channel import read_channel_file
from models.problem import ProblemSpec, SchemeConfig
from Resources.common import FLOATS, handles_errors, noma_order, per_user
from schemas import SolverOutcomeSchema
from sitbb.engine import SolverConfig, solve

logger = logging.getLogger(__name__)

blup = click.Group("solve-commands", help="Single-instance solving")

# EE constants default to the ones the EE sweeps use
_EE = ExperimentPlan(name="defaults", kind="ee", grid=[0.0])

# common rate --pc-nonzero asks for, in bits/cu
PC_NONZERO_RATE = 0.01


def _channels(seed, channels_file, K, M, variances):
    if channels_file is not None:
        sets = read_channel_file(channels_file)
        if len(sets) > 1:
            logger.warning("%s holds %d channel sets; using the first", channels_file, len(sets))
        return sets[0]
    return gen_channels(seed, K, M, per_user(variances, K, "var", 1.0))


def build_cli_problem(opts) -> ProblemSpec:
    if opts["pc_nonzero"] and opts["scheme"] == "mulp":
        raise click.UsageError("--pc-nonzero asks for a common stream, which MU-LP does not have")
    if opts["noma_order"] is not None and opts["scheme"] != "noma":
        raise click.UsageError("--noma-order only applies to --scheme noma")
    channels = _channels(opts["seed"], opts["channels"], opts["K"], opts["M"], opts["var"])
    K = channels.K
    scheme = SchemeConfig(opts["scheme"], noma_order(opts["noma_order"]))
    R_th = per_user(opts["qos"], K, "qos", 0.0)
    floor = PC_NONZERO_RATE if opts["pc_nonzero"] else 0.0

    if opts["objective"] == "ee":
        if opts["weights"]:
            raise click.UsageError("energy efficiency uses unit weights; drop --weights")
        power_dbm = opts["power_dbm"] if opts["power_dbm"] is not None else 20.0
        P_circ = channels.M * dbm_to_watt(_EE.p_dyn_dbm) + _EE.p_sta_mw * 1e-3
        return ProblemSpec.ee(
            channels.noise_normalized(opts["noise_var"]),
            dbm_to_watt(power_dbm),
            opts["mu"],
            P_circ,
            R_th=R_th,
            scheme=scheme,
            min_common_rate=floor,
        )
    if opts["power_dbm"] is not None:
        raise click.UsageError("--power-dbm applies to --objective ee; use --snr-db for sum rates")
    u = per_user(opts["weights"], K, "weights", 1.0)
    return ProblemSpec.wsr(channels, db_to_linear(opts["snr_db"]), u=u, R_th=R_th, scheme=scheme, min_common_rate=floor)


def _print_report(outcome, sca):
    click.echo(f"status:      {outcome.status.value}")
    if outcome.incumbent is None:
        click.echo("objective:   none (no feasible point found)")
    else:
        report = outcome.incumbent
        click.echo(f"objective:   {report.objective:.6f}")
        click.echo(f"certificate: optimum in [{report.objective:.6f}, {outcome.delta_final:.6f}] (delta - eta = {outcome.delta_final - outcome.eta:.6f})")
        click.echo("rates:       " + " ".join(f"R{k + 1}={r:.6f}" for k, r in enumerate(report.rates)))
        click.echo("common:      " + " ".join(f"C{k + 1}={c:.6f}" for k, c in enumerate(report.C)))
        common_power = float(np.linalg.norm(report.precoders.p_c) ** 2)
        click.echo(f"power:       {report.precoders.total_power():.6g} (common stream {common_power:.6g})")
    click.echo(f"search:      {outcome.iterations} iterations, {outcome.nodes_explored} nodes, {outcome.wall_time:.2f} s")
    if sca is not None:
        value = f"{sca.report.objective:.6f}" if sca.report.feasible else "infeasible"
        click.echo(f"sca:         {value} ({sca.status.value}, {sca.iterations} iterations)")


@blup.command("solve")
@click.option("--seed", type=int, default=0, show_default=True, help="Channel seed.")
@click.option("--channels", type=click.Path(exists=True, dir_okay=False), help="Channel file; overrides --seed/--K/--M.")
@click.option("--K", "K", type=click.IntRange(min=1), default=2, show_default=True)
@click.option("--M", "M", type=click.IntRange(min=1), default=2, show_default=True)
@click.option("--var", type=FLOATS, default=None, help="Channel variance per user (one value or K).")
@click.option("--snr-db", type=float, default=20.0, show_default=True, help="Transmit SNR for sum-rate problems.")
@click.option("--power-dbm", type=float, default=None, help="Power budget for EE problems (default 20 dBm).")
@click.option("--scheme", type=click.Choice(["rsma", "mulp", "noma"]), default="rsma", show_default=True)
@click.option("--objective", type=click.Choice(["wsr", "ee"]), default="wsr", show_default=True)
@click.option("--qos", type=FLOATS, default=None, help="Rate thresholds in bits/cu (one value or K).")
@click.option("--weights", type=FLOATS, default=None, help="Rate weights (one value or K).")
@click.option("--noma-order", type=str, default=None, help="12 or 21: which user is decoded with SIC (strong first).")
@click.option("--pc-nonzero", is_flag=True, help="Require the common stream to carry at least 0.01 bits/cu (contradicts --scheme mulp).")
@click.option("--mu", type=float, default=_EE.mu, show_default=True, help="Amplifier inefficiency (EE).")
@click.option("--noise-var", type=float, default=_EE.noise_var, show_default=True, help="Noise variance (EE).")
@click.option("--eta", type=float, default=0.02, show_default=True)
@click.option("--epsilon", type=float, default=1e-7, show_default=True)
@click.option("--max-time", type=float, default=600.0, show_default=True, help="Wall-clock budget in seconds.")
@click.option("--no-warm-start", is_flag=True, help="Start from delta = 0 instead of an SCA solution.")
@click.option("--no-sca", is_flag=True, help="Skip the SCA comparison run.")
@click.option("--json", "as_json", is_flag=True, help="Print the outcome as JSON.")
@click.option("--strict", is_flag=True, help="Exit with code 3 unless the outcome is certified.")
@click.pass_context
@handles_errors
def solve_command(ctx, **opts):
    """Solve one instance to (epsilon, eta)-optimality."""
    problem = build_cli_problem(opts)
    config = SolverConfig(
        eta=opts["eta"], epsilon=opts["epsilon"], max_wall_time=opts["max_time"], sca_warm_start=not opts["no_warm_start"]
    )
    outcome = solve(problem, config)
    sca = None if opts["no_sca"] else sca_run(problem, ScaConfig(seed=opts["seed"]))

    if opts["as_json"]:
        data = SolverOutcomeSchema().dump(outcome)
        if sca is not None:
            data["sca_objective"] = float(sca.report.objective) if sca.report.feasible else None
        click.echo(json.dumps(data, sort_keys=True))
    else:
        _print_report(outcome, sca)

    if opts["strict"] and not outcome.certified:
        ctx.exit(3)