# tests/test_sitbb.py - Boxes, reduction, bounding and full branch-and-bound runs.

import json
import logging
import math
from dataclasses import replace

import numpy as np
import pytest

from errors import MalformedBox
from experiments.audit import audit_trace, single_user_capacity
from experiments.channels import gen_channels
from models.problem import ProblemSpec, SchemeConfig
from models.report import Violation
from sitbb import engine
from sitbb.box import TWO_PI, Box, branch, initial_box
from sitbb.engine import OutcomeStatus, SolverConfig, solve
from sitbb.node import bound, nearest_corner
from sitbb.reduction import Infeasible, quick_infeasibility, reduce_box

FAST = dict(sca_warm_start=False)


# -----------------------------
# Boxes
# -----------------------------


def test_initial_box_mulp(channels):
    problem = ProblemSpec.wsr(channels, 10.0, R_th=[0.5, 1.0], scheme=SchemeConfig("mulp"))
    box = initial_box(problem)
    assert not box.common
    np.testing.assert_allclose(box.gamma_lo, [2**0.5 - 1.0, 1.0])
    np.testing.assert_allclose(box.gamma_hi, 10.0 * channels.norms_sq)


def test_initial_box_rsma(channels):
    problem = ProblemSpec.wsr(channels, 10.0, R_th=[1.0, 0.0])
    box = initial_box(problem)
    caps = 10.0 * channels.norms_sq
    assert box.lo.size == 2 * problem.K
    assert box.s_hi == pytest.approx(caps.min())
    assert box.gamma_lo[0] == pytest.approx(max(0.0, 2.0 / (1.0 + caps.min()) - 1.0))
    np.testing.assert_allclose(box.alpha_lo, [0.0])
    np.testing.assert_allclose(box.alpha_hi, [TWO_PI])


def test_initial_box_carries_the_common_rate_floor(channels):
    problem = ProblemSpec.wsr(channels, 10.0, min_common_rate=0.5)
    assert initial_box(problem).s_lo == pytest.approx(2**0.5 - 1.0)


def test_unreachable_common_rate_floor_empties_the_root(toy_channels):
    # the common SINR can never exceed P min ||h_k||^2 = 0.25
    problem = ProblemSpec.wsr(toy_channels, 1.0, min_common_rate=1.0)
    root = initial_box(problem)
    assert root.s_lo == root.s_hi == pytest.approx(0.25)
    assert quick_infeasibility(root, 0.0, problem)
    assert reduce_box(root, 0.0, problem) is Infeasible


def test_initial_box_noma_pins_the_weak_user(channels):
    problem = ProblemSpec.wsr(channels, 10.0, R_th=[0.5, 0.5], scheme=SchemeConfig("noma", (1, 0)))
    box = initial_box(problem)
    assert box.gamma_lo[0] == box.gamma_hi[0] == 0.0
    assert box.gamma_lo[1] == pytest.approx(2**0.5 - 1.0)


def test_box_checks_its_shape():
    with pytest.raises(MalformedBox):
        Box(np.zeros(3), np.ones(3), 2, True)
    with pytest.raises(MalformedBox):
        Box.from_parts([1.0, 0.0], [0.0, 1.0], common=False)


def test_branch_bisects_the_relatively_widest_side():
    box = Box.from_parts([0.0, 0.0], [1.0, 1.0], common=False)
    lower, upper = branch(box, np.array([1.0, 4.0]))
    np.testing.assert_allclose(lower.hi, [0.5, 1.0])
    np.testing.assert_allclose(upper.lo, [0.5, 0.0])


def test_branch_breaks_ties_on_the_lowest_index():
    box = Box.from_parts([0.0, 0.0], [2.0, 2.0], common=False)
    lower, _ = branch(box, box.widths)
    np.testing.assert_allclose(lower.hi, [1.0, 2.0])


def test_branch_refuses_points():
    box = Box.from_parts([1.0, 1.0], [1.0, 1.0], common=False)
    with pytest.raises(MalformedBox):
        branch(box, np.ones(2))


# -----------------------------
# Reduction
# -----------------------------


def test_quick_infeasibility(channels):
    problem = ProblemSpec.wsr(channels, 10.0)
    root = initial_box(problem)
    assert not quick_infeasibility(root, 0.5, problem)
    # far above the rate upper bound U
    assert quick_infeasibility(root, 100.0, problem)

    # a MU-LP box whose SINR caps miss the QoS cannot borrow from a common stream
    mulp = ProblemSpec.wsr(channels, 10.0, R_th=[1.0, 1.0], scheme=SchemeConfig("mulp"))
    small = Box.from_parts([0.0, 0.0], [0.5, 0.5], common=False)
    assert quick_infeasibility(small, 0.0, mulp)


def test_reduction_only_shrinks(wsr_problem):
    root = initial_box(wsr_problem)
    reduced = reduce_box(root, 1.0, wsr_problem)
    assert reduced is not Infeasible
    assert reduced.is_subset(root)
    assert np.all(reduced.lo >= root.lo)


def test_reduction_tightens_upper_bounds_for_energy_efficiency(channels):
    problem = ProblemSpec.ee(channels, 10.0, 2.0, 0.1)
    root = initial_box(problem)
    reduced = reduce_box(root, 3.0, problem)
    assert reduced is not Infeasible
    assert np.any(reduced.hi < root.hi)


def test_reduction_detects_empty_boxes(wsr_problem):
    assert reduce_box(initial_box(wsr_problem), 100.0, wsr_problem) is Infeasible


def test_bound_skips_certified_empty_boxes(wsr_problem):
    record = bound(initial_box(wsr_problem), 100.0, wsr_problem)
    assert record.beta == math.inf and record.dual_point is None and record.how == "certificate"


@pytest.mark.parametrize(
    "theta, lo, hi, corner",
    [
        (3.0, 0.0, math.pi, math.pi),
        (0.05, 5.5, TWO_PI, TWO_PI),
        (6.2, 0.0, 1.0, 0.0),
        (1.0, 0.5, 1.5, 0.5),
    ],
)
def test_angles_snap_to_the_nearer_corner_on_the_circle(theta, lo, hi, corner):
    assert nearest_corner(theta, lo, hi) == corner


def test_root_bound_is_negative(wsr_problem):
    record = bound(initial_box(wsr_problem), 0.0, wsr_problem)
    assert record.beta < 0
    assert initial_box(wsr_problem).contains(record.dual_point.as_vector(True), tol=1e-9)


# -----------------------------
# Search
# -----------------------------


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(eta=0.0)
    with pytest.raises(ValueError):
        SolverConfig(child_workers=3)
    with pytest.raises(ValueError):
        SolverConfig(max_wall_time=0.0)


def test_single_user_mulp_reaches_capacity():
    problem = ProblemSpec.wsr(gen_channels(2, 1, 2), 10.0, scheme=SchemeConfig("mulp"))
    outcome = solve(problem, SolverConfig(eta=0.01, **FAST))
    assert outcome.certified
    assert outcome.objective == pytest.approx(single_user_capacity(problem), abs=0.01)
    assert outcome.incumbent.feasible


def test_unreachable_qos_is_reported_infeasible(toy_channels):
    problem = ProblemSpec.wsr(toy_channels, 1.0, R_th=np.log2(1.0 + toy_channels.norms_sq) + 2.0)
    outcome = solve(problem, SolverConfig(**FAST))
    assert outcome.status is OutcomeStatus.EPSILON_ESSENTIAL_INFEASIBLE
    assert outcome.incumbent is None and outcome.objective is None


def test_incumbent_that_fails_after_unscaling_is_not_certified(monkeypatch, caplog):
    real = engine.make_report

    def rounded_away(*args, **kwargs):
        report = real(*args, **kwargs)
        return replace(report, feasible=False, violations=(Violation("power", 1e-3),))

    monkeypatch.setattr(engine, "make_report", rounded_away)
    problem = ProblemSpec.wsr(gen_channels(2, 1, 2).scaled(1e-4), 10.0 * 1e8, scheme=SchemeConfig("mulp"))
    assert problem.rescaled()[1] != 1.0
    with caplog.at_level(logging.WARNING, logger="sitbb.engine"):
        outcome = solve(problem, SolverConfig(eta=0.01, **FAST))
    assert outcome.status is OutcomeStatus.NUMERICAL_FAILURE
    assert not outcome.certified
    assert "channel scaling" in caplog.text


def test_iteration_budget(wsr_problem):
    outcome = solve(wsr_problem, SolverConfig(max_iter=0, **FAST))
    assert outcome.status is OutcomeStatus.BUDGET_EXHAUSTED
    assert outcome.iterations == 0
    assert not outcome.certified


def test_trace_is_logged_as_json(wsr_problem, caplog):
    caplog.set_level(logging.DEBUG, logger="sitbb.trace")
    outcome = solve(wsr_problem, SolverConfig(max_iter=0, **FAST))
    lines = [json.loads(r.getMessage()) for r in caplog.records if r.name == "sitbb.trace"]
    assert len(lines) == len(outcome.trace)
    assert lines[0]["event"] == "reduce"
    assert {"iter", "node", "beta", "delta"} <= set(lines[0])


@pytest.mark.slow
def test_single_user_rsma_reaches_capacity():
    problem = ProblemSpec.wsr(gen_channels(4, 1, 2), 10.0)
    outcome = solve(problem, SolverConfig(eta=0.01))
    assert outcome.certified
    assert outcome.objective == pytest.approx(single_user_capacity(problem), abs=0.01)


@pytest.mark.slow
@pytest.mark.parametrize("scheme", ["rsma", "mulp", "noma"])
def test_trace_properties_hold(channels, scheme):
    problem = ProblemSpec.wsr(channels, 10.0, R_th=np.full(2, 0.2), scheme=SchemeConfig(scheme))
    outcome = solve(problem, SolverConfig(eta=0.05))
    assert outcome.certified
    for finding in audit_trace(outcome, problem):
        assert finding.passed, str(finding)


@pytest.mark.slow
def test_rsma_contains_the_other_schemes(channels):
    config = SolverConfig(eta=0.05)
    values = {
        scheme: solve(ProblemSpec.wsr(channels, 100.0, R_th=np.full(2, 0.4), scheme=SchemeConfig(scheme)), config).objective
        for scheme in ("rsma", "mulp", "noma")
    }
    assert values["rsma"] >= max(values["mulp"], values["noma"]) - 2 * 0.05


@pytest.mark.slow
def test_unset_noma_order_keeps_the_better_order(channels):
    config = SolverConfig(eta=0.05)
    both = solve(ProblemSpec.wsr(channels, 10.0, scheme=SchemeConfig("noma")), config)
    fixed = [solve(ProblemSpec.wsr(channels, 10.0, scheme=SchemeConfig("noma", order)), config) for order in ((0, 1), (1, 0))]
    assert both.certified
    assert both.objective >= max(o.objective for o in fixed) - 0.05


@pytest.mark.slow
def test_badly_scaled_channels_give_the_same_optimum(channels):
    config = SolverConfig(eta=0.05)
    plain = solve(ProblemSpec.wsr(channels, 10.0), config)
    scaled = solve(ProblemSpec.wsr(channels.scaled(1e-4), 10.0 * 1e8), config)
    assert scaled.certified
    assert scaled.objective == pytest.approx(plain.objective, abs=0.05)
    assert scaled.incumbent.feasible


@pytest.mark.slow
def test_parallel_children_agree(wsr_problem):
    serial = solve(wsr_problem, SolverConfig(eta=0.05, **FAST))
    paired = solve(wsr_problem, SolverConfig(eta=0.05, child_workers=2, **FAST))
    assert paired.objective == pytest.approx(serial.objective, abs=0.05)


@pytest.mark.slow
def test_common_rate_floor_keeps_the_common_stream(channels):
    problem = ProblemSpec.wsr(channels, 10.0, min_common_rate=0.3)
    outcome = solve(problem, SolverConfig(eta=0.05))
    assert outcome.certified
    report = outcome.incumbent
    assert report.feasible
    assert np.linalg.norm(report.precoders.p_c) ** 2 > 0
    assert np.log2(1.0 + report.gamma_c.min()) >= 0.3 - 1e-6
