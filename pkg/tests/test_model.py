# tests/test_model.py - SINRs, feasibility reports, problem validation and the channel file format.

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import ChannelFileError, DimensionMismatch, InvalidProblem, SchemeError
from experiments.channels import gen_channels
from models.channel import ChannelSet, format_channels, parse_channels, read_channel_file, write_channel_file
from models.precoder import PrecoderSet
from models.problem import ObjectiveKind, ProblemSpec, SchemeConfig, SchemeKind, scheme_variants
from models.report import compute_sinrs, make_report


def _toy_precoders(p2=(0.0, 2.0)):
    return PrecoderSet(np.array([1.0, 1.0]), np.array([[1.0, 0.0], list(p2)]))


# -----------------------------
# SINRs and objective
# -----------------------------


def test_sinrs_without_interference(toy_channels):
    gamma_c, gamma_p = compute_sinrs(toy_channels, _toy_precoders())
    np.testing.assert_allclose(gamma_p, [1.0, 1.0])
    # |h_k^H p_c|^2 / (all private gains + 1)
    np.testing.assert_allclose(gamma_c, [1.0 / 2.0, 0.25 / 2.0])


def test_private_sinr_excludes_own_stream(toy_channels):
    _, gamma_p = compute_sinrs(toy_channels, _toy_precoders(p2=(1.0, 2.0)))
    assert gamma_p[0] == pytest.approx(1.0 / 2.0)
    assert gamma_p[1] == pytest.approx(1.0)


def test_sinrs_reject_mismatched_shapes(toy_channels):
    with pytest.raises(DimensionMismatch):
        compute_sinrs(toy_channels, PrecoderSet.zeros(2, 3))


def test_weighted_sum_rate_report(toy_channels):
    problem = ProblemSpec.wsr(toy_channels, 10.0, u=[1.0, 2.0])
    report = make_report(problem, _toy_precoders())
    assert report.feasible
    assert report.objective == pytest.approx(3.0)
    np.testing.assert_allclose(report.rates, [1.0, 1.0])


def test_energy_efficiency_divides_by_consumed_power(toy_channels):
    problem = ProblemSpec.ee(toy_channels, 10.0, mu=0.5, P_circ=1.0)
    report = make_report(problem, _toy_precoders())
    # power = |p_c|^2 + |p_1|^2 + |p_2|^2 = 2 + 1 + 4
    assert report.objective == pytest.approx(2.0 / (0.5 * 7.0 + 1.0))


def test_common_shares_count_towards_rates(toy_channels):
    problem = ProblemSpec.wsr(toy_channels, 10.0)
    C = [0.1, 0.05]
    report = make_report(problem, _toy_precoders(), C)
    assert report.feasible
    np.testing.assert_allclose(report.rates, [1.1, 1.05])


@pytest.mark.parametrize(
    "P, R_th, C, violated",
    [
        (1.0, [0.0, 0.0], [0.0, 0.0], "power"),
        (10.0, [1.5, 0.0], [0.0, 0.0], "qos[0]"),
        (10.0, [0.0, 0.0], [0.2, 0.2], "common-rate"),
        (10.0, [0.0, 0.0], [-0.1, 0.0], "common-share-nonneg[0]"),
    ],
)
def test_violations_are_named(toy_channels, P, R_th, C, violated):
    problem = ProblemSpec.wsr(toy_channels, P, R_th=R_th)
    report = make_report(problem, _toy_precoders(), C)
    assert not report.feasible
    assert violated in {v.constraint for v in report.violations}


def test_common_rate_floor(toy_channels):
    # the weaker user decodes the common stream at SINR 0.125, i.e. 0.17 bits
    low = make_report(ProblemSpec.wsr(toy_channels, 10.0, min_common_rate=0.1), _toy_precoders())
    assert low.feasible
    high = make_report(ProblemSpec.wsr(toy_channels, 10.0, min_common_rate=0.5), _toy_precoders())
    assert [v.constraint for v in high.violations] == ["common-rate-floor"]
    assert high.violations[0].magnitude == pytest.approx(0.5 - math.log2(1.125))


def test_mulp_rejects_common_stream(toy_channels):
    problem = ProblemSpec.wsr(toy_channels, 10.0, scheme=SchemeConfig("mulp"))
    report = make_report(problem, _toy_precoders())
    assert "mulp-common-precoder" in {v.constraint for v in report.violations}


def test_noma_weak_user_has_no_private_stream(toy_channels):
    problem = ProblemSpec.wsr(toy_channels, 10.0, scheme=SchemeConfig("noma", (0, 1)))
    report = make_report(problem, _toy_precoders())
    assert "noma-weak-private" in {v.constraint for v in report.violations}


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_rotation_keeps_every_sinr(seed):
    rng = np.random.default_rng(seed)
    channels = gen_channels(seed, 3, 2)
    draw = lambda *shape: rng.standard_normal(shape) + 1j * rng.standard_normal(shape)  # noqa: E731
    precoders = PrecoderSet(draw(2), draw(3, 2))
    rotated = precoders.rotated(channels.h)

    for before, after in zip(compute_sinrs(channels, precoders), compute_sinrs(channels, rotated)):
        np.testing.assert_allclose(before, after, rtol=1e-9, atol=1e-12)
    own = np.einsum("km,km->k", channels.h.conj(), rotated.p)
    assert np.all(np.abs(own.imag) <= 1e-9 * (1.0 + np.abs(own)))
    assert np.all(own.real >= -1e-12)
    assert rotated.total_power() == pytest.approx(precoders.total_power())


# -----------------------------
# ProblemSpec
# -----------------------------


def test_problem_constructors(channels):
    wsr = ProblemSpec.wsr(channels, 2.0)
    assert wsr.objective_kind is ObjectiveKind.WSR and not wsr.is_ee
    np.testing.assert_array_equal(wsr.u, [1.0, 1.0])
    ee = ProblemSpec.ee(channels, 2.0, 0.35, 0.5)
    assert ee.is_ee and ee.mu == 0.35


@pytest.mark.parametrize(
    "kwargs, error",
    [
        (dict(u=[1.0], R_th=[0.0, 0.0], P=1.0), DimensionMismatch),
        (dict(u=[0.0, 0.0], R_th=[0.0, 0.0], P=1.0), InvalidProblem),
        (dict(u=[1.0, 1.0], R_th=[-0.1, 0.0], P=1.0), InvalidProblem),
        (dict(u=[1.0, 1.0], R_th=[0.0, 0.0], P=0.0), InvalidProblem),
        (dict(u=[1.0, 1.0], R_th=[0.0, 0.0], P=1.0, mu=0.3), InvalidProblem),
        (dict(u=[1.0, 2.0], R_th=[0.0, 0.0], P=1.0, mu=0.3, P_circ=0.5, objective_kind="ee"), InvalidProblem),
        (dict(u=[1.0, 1.0], R_th=[0.0, 0.0], P=1.0, min_common_rate=-0.1), InvalidProblem),
        (dict(u=[1.0, 1.0], R_th=[0.0, 0.0], P=1.0, min_common_rate=0.1, scheme=SchemeConfig("mulp")), SchemeError),
    ],
)
def test_invalid_problems(channels, kwargs, error):
    with pytest.raises(error):
        ProblemSpec(channels=channels, **kwargs)


def test_scheme_config_checks_the_order():
    with pytest.raises(SchemeError):
        SchemeConfig("mulp", (0, 1))
    with pytest.raises(SchemeError):
        SchemeConfig("noma", (0, 0))
    assert SchemeConfig("noma", [1, 0]).noma_order == (1, 0)


def test_noma_needs_two_users():
    with pytest.raises(SchemeError):
        ProblemSpec.wsr(gen_channels(0, 3, 2), 1.0, scheme=SchemeConfig("noma"))


def test_scheme_streams(channels):
    rsma = ProblemSpec.wsr(channels, 1.0)
    assert rsma.common_enabled and rsma.private_users == (0, 1) and rsma.pinned_common == ()
    mulp = ProblemSpec.wsr(channels, 1.0, scheme=SchemeConfig("mulp"))
    assert not mulp.common_enabled and mulp.pinned_common == (0, 1)
    noma = ProblemSpec.wsr(channels, 1.0, scheme=SchemeConfig("noma", (1, 0)))
    assert noma.private_users == (1,) and noma.pinned_common == (1,)


def test_unset_noma_order_expands_strongest_first(toy_channels):
    problem = ProblemSpec.wsr(toy_channels.swapped((1, 0)), 1.0, scheme=SchemeConfig("noma"))
    orders = [variant.scheme.noma_order for variant in scheme_variants(problem)]
    assert orders == [(1, 0), (0, 1)]
    with pytest.raises(SchemeError):
        problem.private_users
    rsma = ProblemSpec.wsr(toy_channels, 1.0)
    assert scheme_variants(rsma) == [rsma]


def test_rescaling_keeps_the_objective(rng):
    channels = gen_channels(11, 2, 3).scaled(1e-5)
    problem = ProblemSpec.ee(channels, 1e6, 0.35, 0.5, R_th=[0.1, 0.1])
    scaled, c = problem.rescaled()
    norms = np.sqrt(scaled.channels.norms_sq)
    assert np.all((norms >= 1e-3) & (norms <= 1e3))
    assert scaled.scheme.kind is SchemeKind.RSMA

    draw = lambda *shape: rng.standard_normal(shape) + 1j * rng.standard_normal(shape)  # noqa: E731
    primed = PrecoderSet(draw(3), draw(2, 3)).scaled(0.1)
    original = primed.scaled(c)
    assert make_report(scaled, primed).objective == pytest.approx(make_report(problem, original).objective, rel=1e-9)


def test_well_scaled_problem_is_left_alone(wsr_problem):
    scaled, c = wsr_problem.rescaled()
    assert scaled is wsr_problem and c == 1.0


# -----------------------------
# Channel files
# -----------------------------


def test_channel_file_round_trip(tmp_path):
    sets = [gen_channels(seed, 2, 3) for seed in (1, 2)]
    path = tmp_path / "channels.txt"
    write_channel_file(path, sets)
    loaded = read_channel_file(path)
    assert [ch.seed for ch in loaded] == [1, 2]
    for original, back in zip(sets, loaded):
        np.testing.assert_array_equal(original.h, back.h)
        assert back.meta["variances"] == original.meta["variances"]


def test_channel_file_without_metadata():
    (channels,) = parse_channels("# hand-written\n1 2\n1.0,0.0 0.0,-2.5\n")
    assert channels.seed is None
    np.testing.assert_array_equal(channels.h, [[1.0, -2.5j]])
    assert math.isclose(channels.norms_sq[0], 7.25)


@pytest.mark.parametrize(
    "text, message",
    [
        ("2 2\n1,0 0,1\n", "expected 2 channel rows"),
        ("1 2\n1,0\n", "expected 2 entries"),
        ("1 1\n1;0\n", "re,im"),
        ("x y\n", "expected 'K M'"),
        ("# seed=3\n", "metadata without a channel record"),
        ("\n\n", "no channel records"),
    ],
)
def test_malformed_channel_files(text, message):
    with pytest.raises(ChannelFileError, match=message):
        parse_channels(text)


def test_channel_set_checks_its_entries():
    with pytest.raises(InvalidProblem):
        ChannelSet(np.zeros((2, 2)))
    with pytest.raises(InvalidProblem):
        ChannelSet(np.array([[np.nan, 1.0]]))
    assert ChannelSet(np.array([1.0, 2.0])).K == 1
    assert "seed=" not in format_channels(ChannelSet(np.eye(2)))
