# tests/test_conic.py - Program builder, argument cuts and the conic programs on hand-checkable cases.

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conic.builders import build_bounding_socp, build_common_rate_lp, build_gtilde_program, build_power_feasibility
from conic.envelope import EnvelopeCut, TrivialRelaxation, envelope_cuts
from conic.program import Affine, ProgramBuilder, lift, unlift
from conic.solver import SolveStatus, solve
from errors import MalformedBox
from experiments.channels import gen_channels
from models.precoder import PrecoderSet
from models.problem import ProblemSpec, SchemeConfig
from sitbb.box import Box, DualPoint

TWO_PI = 2.0 * math.pi


# -----------------------------
# Builder
# -----------------------------


def test_hprod_is_the_hermitian_product(rng):
    h = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    p = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    builder = ProgramBuilder("hprod")
    builder.add_variable("t", 1)
    builder.add_variable("p", 3, complex_=True)
    z = builder.hprod(h, "p")
    x = np.concatenate([[0.0], lift(p)])
    value = z.A @ x + z.b
    expected = np.vdot(h, p)
    np.testing.assert_allclose(value, [expected.real, expected.imag])
    np.testing.assert_allclose(unlift(lift(p)), p)


def test_affine_arithmetic_with_arrays():
    builder = ProgramBuilder("affine")
    builder.add_variable("x", 2)
    x = builder.var("x")
    expr = np.array([1.0, 2.0]) - x * 2.0
    assert isinstance(expr, Affine)
    np.testing.assert_allclose(expr.A @ np.array([1.0, 1.0]) + expr.b, [-1.0, 0.0])
    np.testing.assert_allclose(x.dot([3.0, 4.0]).A, [[3.0, 4.0]])
    assert Affine.stack(x[0], x, builder.const(5.0)).rows == 4


def test_variables_are_declared_once():
    builder = ProgramBuilder("twice")
    builder.add_variable("x", 1)
    with pytest.raises(ValueError):
        builder.add_variable("x", 2)


# -----------------------------
# Argument cuts
# -----------------------------


def test_wide_arcs_give_no_cut():
    assert isinstance(envelope_cuts(0.0, TWO_PI, 1), TrivialRelaxation)
    assert isinstance(envelope_cuts(0.5, 0.5 + math.pi + 1e-6, 1), TrivialRelaxation)
    assert isinstance(envelope_cuts(0.0, math.pi, 1), EnvelopeCut)


@pytest.mark.parametrize("lo, hi", [(-0.1, 1.0), (1.0, TWO_PI + 0.1), (2.0, 1.0)])
def test_arcs_outside_the_circle_are_rejected(lo, hi):
    with pytest.raises(MalformedBox):
        envelope_cuts(lo, hi, 1)


def test_cut_excludes_arguments_outside_the_arc():
    cut = envelope_cuts(1.0, 1.5, 1)
    assert cut.evaluate(np.exp(0.5j), 0.0).min() < 0
    assert cut.evaluate(np.exp(2.0j), 0.0).min() < 0
    # inside the arc but shorter than d - t
    assert cut.evaluate(0.5 * np.exp(1.25j), 1.0).min() < 0
    assert cut.evaluate(np.exp(1.25j), 1.0).min() >= 0


@settings(max_examples=200, deadline=None)
@given(
    lo=st.floats(0.0, TWO_PI),
    width=st.floats(0.0, math.pi),
    where=st.floats(0.0, 1.0),
    rho=st.floats(0.0, 100.0),
    shrink=st.floats(-2.0, 1.0),
)
def test_cut_keeps_every_point_of_the_arc(lo, width, where, rho, shrink):
    hi = min(lo + width, TWO_PI)
    theta = lo + where * (hi - lo)
    cut = envelope_cuts(lo, hi, 1)
    assert isinstance(cut, EnvelopeCut)
    values = cut.evaluate(rho * np.exp(1j * theta), shrink * rho)
    assert values.min() >= -1e-9 * (1.0 + rho)


# -----------------------------
# Solving
# -----------------------------


def _norm_program(scale=1.0):
    builder = ProgramBuilder("norm")
    builder.add_variable("xy", 2)
    builder.add_variable("t", 1)
    xy = builder.var("xy")
    builder.equal((xy - np.array([3.0, 4.0])) * scale, "fix")
    builder.soc(builder.var("t") * scale, xy * scale, "cone")
    builder.minimize(builder.var("t"))
    return builder.build()


def test_second_order_cone():
    solution = solve(_norm_program())
    assert solution.optimal
    assert solution.objective == pytest.approx(5.0, abs=1e-6)
    np.testing.assert_allclose(solution.value("xy"), [3.0, 4.0], atol=1e-6)
    assert solution.residual <= 1e-6


def test_normalized_program_has_the_same_optimum():
    program = _norm_program(scale=1e4)
    normalized = program.normalized()
    assert max(np.abs(con.A).max() for con in normalized.constraints) == pytest.approx(1.0)
    assert solve(normalized).objective == pytest.approx(5.0, abs=1e-6)


def test_rotated_cone():
    builder = ProgramBuilder("rsoc")
    builder.add_variable("a", 1)
    builder.add_variable("w", 1)
    builder.equal(builder.var("w") - 2.0, "fix")
    builder.rsoc(builder.var("a"), builder.const(1.0), builder.var("w"), "cone")
    builder.minimize(builder.var("a"))
    assert solve(builder.build()).objective == pytest.approx(4.0, abs=1e-6)


def test_infeasible_program():
    builder = ProgramBuilder("empty")
    builder.add_variable("x", 1)
    x = builder.var("x")
    builder.nonneg(x - 1.0, "above")
    builder.nonneg(-x, "below")
    builder.minimize(x)
    solution = solve(builder.build())
    assert solution.status is SolveStatus.INFEASIBLE
    assert not solution.optimal


def test_program_dump_lists_the_blocks():
    text = _norm_program().dump()
    assert "program norm" in text and "[soc] cone" in text and "[zero] fix" in text


# -----------------------------
# Conic programs of the model
# -----------------------------


@pytest.fixture
def one_user_mulp():
    return ProblemSpec.wsr(gen_channels(5, 1, 3), 4.0, scheme=SchemeConfig("mulp"))


def test_power_feasibility_closed_form(one_user_mulp, toy_channels):
    h_norm = math.sqrt(one_user_mulp.channels.norms_sq[0])
    solution = solve(build_power_feasibility(one_user_mulp, [2.0]))
    assert solution.objective == pytest.approx(math.sqrt(2.0) / h_norm, rel=1e-5)

    # orthogonal users do not interfere: tau^2 = gamma_1 / |h_1|^2 + gamma_2 / |h_2|^2
    problem = ProblemSpec.wsr(toy_channels, 10.0, scheme=SchemeConfig("mulp"))
    solution = solve(build_power_feasibility(problem, [1.0, 1.0]))
    assert solution.objective == pytest.approx(math.sqrt(5.0), rel=1e-5)


def test_bounding_program_single_user(one_user_mulp):
    # min t s.t. sqrt(gamma_lo) <= h^H p + t, ||p||^2 <= P  gives  t = sqrt(gamma_lo) - sqrt(P) ||h||
    reach = math.sqrt(one_user_mulp.P * one_user_mulp.channels.norms_sq[0])
    box = Box.from_parts([1.0], [50.0], common=False)
    solution = solve(build_bounding_socp(box, 0.0, one_user_mulp))
    assert solution.objective == pytest.approx(1.0 - reach, abs=1e-5)

    # delta above log2(1 + gamma_hi) leaves nothing in the box
    too_high = solve(build_bounding_socp(box, math.log2(51.0) + 0.1, one_user_mulp))
    assert too_high.status is SolveStatus.INFEASIBLE


def test_gtilde_program_single_user(one_user_mulp):
    reach = math.sqrt(one_user_mulp.P * one_user_mulp.channels.norms_sq[0])
    point = DualPoint(np.array([4.0]), 0.0, np.zeros(0))
    solution = solve(build_gtilde_program(point, 1.0, one_user_mulp))
    assert solution.objective == pytest.approx(2.0 - reach, abs=1e-5)


def test_bounding_program_rejects_foreign_boxes(one_user_mulp):
    with pytest.raises(MalformedBox):
        build_bounding_socp(Box.from_parts([0.0, 0.0], [1.0, 1.0], common=False), 0.0, one_user_mulp)


def test_common_rate_split(toy_channels):
    problem = ProblemSpec.wsr(toy_channels, 10.0, u=[1.0, 2.0], R_th=[1.3, 0.0])
    # private rates 1 and 1, common rate log2(1 + 1) = 1
    program = build_common_rate_lp([1.0, 1.0], 1.0, PrecoderSet.zeros(2, 2), 0.0, problem)
    solution = solve(program)
    assert solution.optimal
    np.testing.assert_allclose(solution.value("C"), [0.3, 0.7], atol=1e-6)
    assert solution.objective == pytest.approx(1.7, abs=1e-6)


def test_common_rate_split_honours_pinned_shares(toy_channels):
    problem = ProblemSpec.wsr(toy_channels, 10.0, R_th=[1.3, 0.0], scheme=SchemeConfig("mulp"))
    program = build_common_rate_lp([1.0, 1.0], 1.0, PrecoderSet.zeros(2, 2), 0.0, problem)
    assert solve(program).status is SolveStatus.INFEASIBLE
