# Resources/bench.py - The `bench` command: run time of the global solver on MU-LP sum-rate instances.

import logging
import time

import click
import pandas as pd
from tqdm import tqdm

from experiments.channels import gen_channels
from experiments.runner import db_to_linear
from models.problem import ProblemSpec, SchemeConfig
from Resources.common import FLOATS, handles_errors
from sitbb.engine import SolverConfig, solve

logger = logging.getLogger(__name__)

blup = click.Group("bench-commands", help="Benchmarks")

BENCH_SNR_DB = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)


def bench_mulp(sizes, snr_grid, count: int, eta: float, max_time: float, progress: bool = True) -> pd.DataFrame:
    """One row per (K = M, SNR, seed) with wall time, iterations and status."""
    records = []
    tasks = [(size, snr, seed) for size in sizes for snr in snr_grid for seed in range(count)]
    for size, snr, seed in tqdm(tasks, desc="bench", disable=not progress, leave=False):
        problem = ProblemSpec.wsr(gen_channels(seed, size, size), db_to_linear(snr), scheme=SchemeConfig("mulp"))
        started = time.perf_counter()
        outcome = solve(problem, SolverConfig(eta=eta, max_wall_time=max_time, trace=False))
        records.append(
            {
                "K": size,
                "snr_db": snr,
                "seed": seed,
                "wall_s": time.perf_counter() - started,
                "iterations": outcome.iterations,
                "certified": outcome.certified,
            }
        )
    return pd.DataFrame.from_records(records)


def summarize(frame: pd.DataFrame) -> pd.DataFrame:
    return (
        frame.groupby(["K", "snr_db"])
        .agg(
            mean_s=("wall_s", "mean"),
            median_s=("wall_s", "median"),
            mean_iterations=("iterations", "mean"),
            failures=("certified", lambda c: int((~c.astype(bool)).sum())),
        )
        .reset_index()
    )


@blup.command("bench")
@click.option("--sizes", type=FLOATS, default="2,3", show_default=True, help="Values of K = M.")
@click.option("--snr-db", type=FLOATS, default=",".join(str(s) for s in BENCH_SNR_DB), show_default=True)
@click.option("--count", type=click.IntRange(min=1), default=10, show_default=True, help="Seeds per point.")
@click.option("--eta", type=float, default=0.02, show_default=True)
@click.option("--max-time", type=float, default=600.0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Also write the raw timings to this CSV.")
@click.option("--quiet", is_flag=True)
@handles_errors
def bench_command(sizes, snr_db, count, eta, max_time, out, quiet):
    """MU-LP run times for K = M users and antennas over a range of SNRs."""
    frame = bench_mulp([int(s) for s in sizes], snr_db, count, eta, max_time, progress=not quiet)
    if out is not None:
        frame.to_csv(out, index=False, lineterminator="\n")
    click.echo(summarize(frame).to_string(index=False))
