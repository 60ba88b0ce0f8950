# experiments/audit.py - Property checks and oracles for the global solver.
#
# Every check returns AuditFinding objects instead of raising, so a suite can report all of its
# results at once. The CLI `audit` command and the slow tests run them.

import logging
import math
from dataclasses import dataclass

import numpy as np

from conic.builders import build_power_feasibility
from conic.solver import SolverSettings, solve
from models.precoder import PrecoderSet
from models.problem import ProblemSpec, SchemeConfig, SchemeKind, apply_scheme, scheme_variants
from models.report import FEAS_TOL, check_feasibility, compute_sinrs
from sitbb.box import Box, DualPoint, initial_box
from sitbb.engine import SolverOutcome
from sitbb.reduction import Infeasible, reduce_box

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AuditFinding:
    name: str
    passed: bool
    detail: str = ""

    def __str__(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}{': ' + self.detail if self.detail else ''}"


# ------------------------------
# Trace audit
# ------------------------------


def audit_trace(outcome: SolverOutcome, problem: ProblemSpec, feas_tol: float = FEAS_TOL, tol: float = 1e-6) -> list[AuditFinding]:
    """Checks a finished run: delta never drops, selection is best-first, child bounds do not fall
    below their parent's, incumbents are feasible and only boxes with beta > -epsilon were pruned."""
    events = outcome.trace
    findings = []

    deltas = [e.delta for e in events]
    drops = [i for i in range(1, len(deltas)) if deltas[i] < deltas[i - 1]]
    findings.append(AuditFinding("delta-monotone", not drops, f"{len(drops)} decreases" if drops else ""))

    expands = [e for e in events if e.event == "expand"]
    out_of_order = [e.node for e in expands if e.live_min is not None and e.beta > e.live_min + tol]
    findings.append(AuditFinding("best-first", not out_of_order, f"nodes {out_of_order[:5]}" if out_of_order else ""))

    bounded = [e for e in events if e.event == "bound" and e.parent_beta is not None]
    falling = [
        e.node
        for e in bounded
        if math.isfinite(e.parent_beta) and math.isfinite(e.beta) and e.beta < e.parent_beta - tol
    ]
    findings.append(AuditFinding("child-bound-monotone", not falling, f"nodes {falling[:5]}" if falling else ""))

    infeasible = [i for i, report in enumerate(outcome.incumbents) if not check_feasibility(problem, report, feas_tol).feasible]
    findings.append(
        AuditFinding("incumbents-feasible", not infeasible, f"incumbents {infeasible}" if infeasible else f"{len(outcome.incumbents)} checked")
    )

    prunes = [e for e in events if e.event == "prune" and e.detail != "degenerate"]
    early = [e.node for e in prunes if e.beta is not None and e.beta <= -outcome.epsilon]
    findings.append(AuditFinding("prune-above-epsilon", not early, f"nodes {early[:5]}" if early else f"{len(prunes)} prunes"))
    return findings


# ------------------------------
# Reduction no-loss
# ------------------------------


def _best_split(problem: ProblemSpec, gamma_p: np.ndarray, s: float) -> np.ndarray | None:
    """Common shares maximizing the weighted sum rate for fixed SINRs; None when QoS cannot be met."""
    need = np.maximum(0.0, problem.R_th - np.log2(1.0 + gamma_p))
    pinned = list(problem.pinned_common)
    if np.any(need[pinned] > 0):
        return None
    budget = math.log2(1.0 + s) - need.sum()
    if budget < 0:
        return None
    free = [k for k in range(problem.K) if k not in pinned]
    if free and budget > 0:
        need[max(free, key=lambda k: (problem.u[k], -k))] += budget
    return need


def _random_precoders(problem: ProblemSpec, rng) -> PrecoderSet:
    K, M = problem.K, problem.M
    streams = (["c"] if problem.common_enabled else []) + list(problem.private_users)
    shares = rng.dirichlet(np.ones(len(streams))) * rng.uniform(0.0, problem.P)

    def draw(power):
        v = rng.standard_normal(M) + 1j * rng.standard_normal(M)
        return math.sqrt(power) * v / np.linalg.norm(v)

    p_c = np.zeros(M, dtype=complex)
    p = np.zeros((K, M), dtype=complex)
    for stream, power in zip(streams, shares):
        if stream == "c":
            p_c = draw(power)
        else:
            p[stream] = draw(power)
    return PrecoderSet(p_c, p).rotated(problem.h)


def _sample(problem: ProblemSpec, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Box coordinates and objective values of up to n random feasible precoders."""
    points, values = [], []
    for _ in range(n):
        precoders = _random_precoders(problem, rng)
        gamma_c, gamma_p = compute_sinrs(problem.channels, precoders)
        s = float(gamma_c.min()) if problem.common_enabled else 0.0
        C = _best_split(problem, gamma_p, s)
        if C is None:
            continue
        numerator = float(np.dot(problem.u, C + np.log2(1.0 + gamma_p)))
        values.append(numerator / (problem.mu * precoders.total_power() + problem.P_circ))
        alpha = np.mod(np.angle(problem.h[1:].conj() @ precoders.p_c), 2.0 * math.pi)
        points.append(DualPoint(gamma_p, s, alpha).as_vector(problem.common_enabled))
    dims = initial_box(problem).lo.size
    return np.asarray(points, dtype=float).reshape(-1, dims), np.asarray(values, dtype=float)


def sample_feasible_points(problem: ProblemSpec, delta: float, n: int, rng=None) -> np.ndarray:
    """Box coordinates (gamma_p, s, alpha) of random feasible points with value >= delta."""
    problem = scheme_variants(problem)[0]
    rng = rng if rng is not None else np.random.default_rng(0)
    points, values = _sample(problem, n, rng)
    return points[values >= delta]


def reduction_no_loss(problem: ProblemSpec, n_boxes: int = 100, n_points: int = 10_000, rng=None) -> AuditFinding:
    """Random sub-boxes around sampled points and random delta: reduce_box must keep every point of
    value >= delta that lies in the box."""
    # an unset NOMA order is checked on the first decoding order
    problem = scheme_variants(problem)[0]
    rng = rng if rng is not None else np.random.default_rng(0)
    root = initial_box(problem)
    points, values = _sample(problem, n_points, rng)
    if len(points) == 0:
        return AuditFinding("reduction-no-loss", True, "no feasible samples")
    lost = checked = 0
    for _ in range(n_boxes):
        anchor = points[rng.integers(len(points))]
        lo = root.lo + rng.uniform(size=anchor.size) * (anchor - root.lo)
        hi = anchor + rng.uniform(size=anchor.size) * (root.hi - anchor)
        box = Box(lo, hi, root.K, root.common)
        delta = float(rng.uniform(0.0, values.max()))
        inside = np.array([box.contains(x) for x in points]) & (values >= delta)
        checked += int(inside.sum())
        reduced = reduce_box(box, delta, problem)
        for x in points[inside]:
            if reduced is Infeasible or not reduced.contains(x, tol=1e-9 * (1.0 + np.abs(x).max())):
                lost += 1
    detail = f"{lost} of {checked} points lost over {n_boxes} boxes"
    return AuditFinding("reduction-no-loss", lost == 0, detail)


# ------------------------------
# Oracles
# ------------------------------


@dataclass(frozen=True)
class GridOracle:
    value: float
    gamma: tuple[float, float] | None
    cell: float  # largest objective change across one grid cell
    solves: int


def mulp_grid_oracle(problem: ProblemSpec, n: int = 200, settings: SolverSettings | None = None) -> GridOracle:
    """Best weighted sum rate of MU-LP over an n x n grid of SINR targets (two users).

    The feasible SINR set is downward closed, so the largest feasible gamma_2 per gamma_1 column is
    a staircase; walking it needs O(n) feasibility solves.
    """
    if problem.K != 2:
        raise ValueError("the grid oracle needs two users")
    problem = apply_scheme(SchemeConfig(SchemeKind.MULP), problem)
    tops = problem.P * problem.channels.norms_sq
    grids = [np.linspace(0.0, tops[k], n) for k in range(2)]
    limit = math.sqrt(problem.P) * (1.0 + 1e-7)
    solves = 0

    def feasible(g1, g2):
        nonlocal solves
        solves += 1
        solution = solve(build_power_feasibility(problem, (g1, g2)), settings)
        return solution.optimal and solution.objective <= limit

    best, best_gamma = -math.inf, None
    j = n - 1
    for i in range(n):
        while j >= 0 and not feasible(grids[0][i], grids[1][j]):
            j -= 1
        if j < 0:
            break
        gamma = np.array([grids[0][i], grids[1][j]])
        rates = np.log2(1.0 + gamma)
        if np.all(rates >= problem.R_th - 1e-12):
            value = float(np.dot(problem.u, rates))
            if value > best:
                best, best_gamma = value, (float(gamma[0]), float(gamma[1]))
    cell = float(max(problem.u[k] * math.log2(1.0 + tops[k] / max(n - 1, 1)) for k in range(2)))
    logger.info("grid oracle: %.6f after %d feasibility solves", best, solves)
    return GridOracle(best, best_gamma, cell, solves)


def single_user_capacity(problem: ProblemSpec) -> float:
    """log2(1 + P ||h||^2): the optimum of any single-user WSR instance with unit weight."""
    if problem.K != 1:
        raise ValueError("closed form only for one user")
    return float(problem.u[0] * math.log2(1.0 + problem.P * problem.channels.norms_sq[0]))


def above_capacity_qos(channels, P: float, margin: float = 0.5) -> np.ndarray:
    """QoS thresholds above every user's single-user capacity, which no scheme can meet."""
    return np.log2(1.0 + P * channels.norms_sq) + margin


# ------------------------------
# Sweep audits (on result frames)
# ------------------------------


def _certified_bb(frame):
    return frame[(frame["solver"] == "bb") & (frame["status"] == "OptimalCertified") & frame["objective"].notna()]


def scheme_nesting(frame, eta: float) -> AuditFinding:
    """RSMA >= max(MU-LP, NOMA) - 2 eta wherever all are certified."""
    table = _certified_bb(frame).pivot_table(index=["seed", "grid_x"], columns="scheme", values="objective")
    if "rsma" not in table:
        return AuditFinding("scheme-nesting", True, "no certified RSMA rows")
    others = [s for s in ("mulp", "noma") if s in table]
    if not others:
        return AuditFinding("scheme-nesting", True, "nothing to compare against")
    worst = table[others].max(axis=1)
    compared = table["rsma"].notna() & worst.notna()
    bad = table.index[compared & (table["rsma"] < worst - 2 * eta)].tolist()
    return AuditFinding("scheme-nesting", not bad, f"{len(bad)} of {int(compared.sum())} points violate" + (f": {bad[:5]}" if bad else ""))


def bb_sca_sandwich(frame, eta: float, share: float = 0.95) -> AuditFinding:
    """The certified global value must not fall below a local one by more than eta."""
    bb = _certified_bb(frame).set_index(["seed", "grid_x", "scheme"])["objective"]
    sca = frame[(frame["solver"] == "sca") & frame["objective"].notna()].set_index(["seed", "grid_x", "scheme"])["objective"]
    joined = bb.to_frame("bb").join(sca.to_frame("sca"), how="inner")
    if joined.empty:
        return AuditFinding("bb-sca-sandwich", True, "no paired rows")
    ok = joined["bb"] >= joined["sca"] - eta - 1e-6
    fraction = float(ok.mean())
    return AuditFinding("bb-sca-sandwich", fraction >= share, f"{int((~ok).sum())} of {len(ok)} rows below SCA ({fraction:.1%} ok)")


def monotone_in_grid(frame, slack: float) -> AuditFinding:
    """Per seed and scheme, the certified objective does not drop by more than `slack` along the grid."""
    drops = []
    for (seed, scheme), group in _certified_bb(frame).groupby(["seed", "scheme"]):
        values = group.sort_values("grid_x")["objective"].to_numpy()
        steps = np.diff(values)
        if np.any(steps < -slack):
            drops.append((int(seed), scheme, float(steps.min())))
    return AuditFinding("monotone-in-grid", not drops, f"{len(drops)} instances drop" + (f": {drops[:5]}" if drops else ""))
