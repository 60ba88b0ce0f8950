# Resources/audit.py - The `audit` command: property suites and oracle comparisons.
#
# Exit status is 0 only when every finding passes.

import logging

import click
import numpy as np

from experiments.audit import (
    AuditFinding,
    above_capacity_qos,
    audit_trace,
    bb_sca_sandwich,
    monotone_in_grid,
    mulp_grid_oracle,
    reduction_no_loss,
    scheme_nesting,
    single_user_capacity,
)
from experiments.channels import gen_channels
from experiments.runner import db_to_linear, read_csv
from models.problem import ProblemSpec, SchemeConfig
from Resources.common import handles_errors
from sitbb.engine import OutcomeStatus, SolverConfig, solve

logger = logging.getLogger(__name__)

blup = click.Group("audit-commands", help="Audits")

SUITES = ("trace", "reduction", "mulp-grid", "single-user", "infeasible", "csv")


def trace_suite(count: int, eta: float) -> list[AuditFinding]:
    """Every trace property on RSMA, MU-LP and NOMA runs at 20 dB with R_th = 0.4."""
    findings = []
    for seed in range(count):
        for scheme in ("rsma", "mulp", "noma"):
            problem = ProblemSpec.wsr(gen_channels(seed, 2, 2), db_to_linear(20.0), R_th=np.full(2, 0.4), scheme=SchemeConfig(scheme))
            outcome = solve(problem, SolverConfig(eta=eta))
            for finding in audit_trace(outcome, problem):
                findings.append(AuditFinding(f"{finding.name}[{scheme}, seed {seed}]", finding.passed, finding.detail))
    return findings


def reduction_suite(count: int, boxes: int, points: int) -> list[AuditFinding]:
    findings = []
    for seed in range(count):
        rng = np.random.default_rng(seed)
        channels = gen_channels(seed, 2, 2)
        for scheme in ("rsma", "mulp"):
            problem = ProblemSpec.wsr(channels, db_to_linear(10.0), R_th=np.full(2, 0.2), scheme=SchemeConfig(scheme))
            finding = reduction_no_loss(problem, boxes, points, rng)
            findings.append(AuditFinding(f"{finding.name}[{scheme}, seed {seed}]", finding.passed, finding.detail))
        ee = ProblemSpec.ee(channels, 1.0, 0.35, 0.5, R_th=np.full(2, 0.2))
        finding = reduction_no_loss(ee, boxes, points, rng)
        findings.append(AuditFinding(f"{finding.name}[ee, seed {seed}]", finding.passed, finding.detail))
    return findings


def mulp_grid_suite(count: int, n: int, eta: float) -> list[AuditFinding]:
    findings = []
    for seed in range(count):
        problem = ProblemSpec.wsr(gen_channels(seed, 2, 2), db_to_linear(10.0), scheme=SchemeConfig("mulp"))
        oracle = mulp_grid_oracle(problem, n)
        outcome = solve(problem, SolverConfig(eta=eta))
        gap = abs(outcome.objective - oracle.value) if outcome.objective is not None else np.inf
        findings.append(
            AuditFinding(f"mulp-grid[seed {seed}]", gap <= eta + oracle.cell, f"BB {outcome.objective} vs grid {oracle.value:.6f} (cell {oracle.cell:.4f})")
        )
    return findings


def single_user_suite(count: int, eta: float) -> list[AuditFinding]:
    findings = []
    rng = np.random.default_rng(0)
    for seed in range(count):
        M = int(rng.choice([2, 4]))
        P = float(rng.choice([1.0, 10.0]))
        problem = ProblemSpec.wsr(gen_channels(seed, 1, M), P)
        expected = single_user_capacity(problem)
        outcome = solve(problem, SolverConfig(eta=eta))
        ok = outcome.objective is not None and abs(outcome.objective - expected) <= eta
        findings.append(AuditFinding(f"single-user[seed {seed}, M={M}, P={P:g}]", ok, f"BB {outcome.objective} vs {expected:.6f}"))
    return findings


def infeasible_suite(count: int, max_time: float) -> list[AuditFinding]:
    findings = []
    for seed in range(count):
        channels = gen_channels(seed, 2, 2)
        P = db_to_linear(10.0)
        problem = ProblemSpec.wsr(channels, P, R_th=above_capacity_qos(channels, P))
        outcome = solve(problem, SolverConfig(max_wall_time=max_time))
        ok = outcome.status is OutcomeStatus.EPSILON_ESSENTIAL_INFEASIBLE
        findings.append(AuditFinding(f"infeasible[seed {seed}]", ok, outcome.status.value))
    return findings


def csv_suite(path, eta: float) -> list[AuditFinding]:
    frame = read_csv(path)
    return [scheme_nesting(frame, eta), bb_sca_sandwich(frame, eta), monotone_in_grid(frame, 2 * eta)]


@blup.command("audit")
@click.option("--suite", "suites", type=click.Choice(SUITES + ("all",)), multiple=True, default=("all",), show_default=True)
@click.option("--count", type=click.IntRange(min=1), default=5, show_default=True, help="Instances per suite.")
@click.option("--eta", type=float, default=0.02, show_default=True)
@click.option("--grid-n", type=click.IntRange(min=2), default=200, show_default=True, help="Grid size of the MU-LP oracle.")
@click.option("--boxes", type=click.IntRange(min=1), default=100, show_default=True, help="Random boxes per reduction instance.")
@click.option("--points", type=click.IntRange(min=1), default=10_000, show_default=True, help="Sampled points per reduction instance.")
@click.option("--max-time", type=float, default=60.0, show_default=True)
@click.option("--csv", "csv_path", type=click.Path(exists=True, dir_okay=False), default=None, help="Sweep CSV for the nesting, sandwich and monotonicity checks.")
@handles_errors
def audit_command(suites, count, eta, grid_n, boxes, points, max_time, csv_path):
    """Run property suites and oracle comparisons; exits nonzero if anything fails."""
    selected = set(SUITES) if "all" in suites else set(suites)
    if "csv" in selected and csv_path is None:
        if "all" not in suites:
            raise click.UsageError("--suite csv needs --csv FILE")
        selected.discard("csv")

    findings: list[AuditFinding] = []
    if "single-user" in selected:
        findings += single_user_suite(count, min(eta, 0.01))
    if "reduction" in selected:
        findings += reduction_suite(count, boxes, points)
    if "trace" in selected:
        findings += trace_suite(count, eta)
    if "mulp-grid" in selected:
        findings += mulp_grid_suite(count, grid_n, eta)
    if "infeasible" in selected:
        findings += infeasible_suite(count, max_time)
    if "csv" in selected:
        findings += csv_suite(csv_path, eta)

    for finding in findings:
        click.echo(str(finding))
    failed = [f for f in findings if not f.passed]
    click.echo(f"{len(findings) - len(failed)} passed, {len(failed)} failed")
    if failed:
        raise click.ClickException(f"{len(failed)} audit finding(s) failed")
