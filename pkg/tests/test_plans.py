# tests/test_plans.py - Plan files: shipped sections, round trips and validation.

import math
from pathlib import Path

import pytest

from errors import PlanError
from experiments.plans import (
    EE_POWER_DBM,
    ExperimentPlan,
    RATE_REGION_EXPONENTS,
    SUM_RATE_QOS,
    SUM_RATE_SNR_DB,
    PlanKind,
    dumps_plans,
    load_plans,
    parse_plans,
)

PLANS = Path(__file__).resolve().parent.parent / "plans"


def test_weight_exponent_grid():
    assert len(RATE_REGION_EXPONENTS) == 43
    assert RATE_REGION_EXPONENTS[:3] == (-3.0, -1.0, -0.95)
    assert RATE_REGION_EXPONENTS[-3:] == (0.95, 1.0, 3.0)
    assert 0.0 in RATE_REGION_EXPONENTS
    assert all(math.copysign(1.0, x) > 0 for x in RATE_REGION_EXPONENTS if x == 0.0)
    assert list(RATE_REGION_EXPONENTS) == sorted(RATE_REGION_EXPONENTS)


def test_default_grids():
    assert SUM_RATE_SNR_DB == (5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    assert len(SUM_RATE_QOS) == len(SUM_RATE_SNR_DB)
    assert EE_POWER_DBM[0] == 4.0 and EE_POWER_DBM[-1] == 30.0 and len(EE_POWER_DBM) == 14


@pytest.mark.parametrize("name", ["rate_region.cfg", "sum_rate.cfg", "energy_efficiency.cfg"])
def test_shipped_plans_load_and_round_trip(name):
    plans = load_plans(PLANS / name)
    assert plans
    again = parse_plans(dumps_plans(plans))
    assert again == plans


def test_shipped_rate_region_plan():
    equal, disparate = load_plans(PLANS / "rate_region.cfg")
    assert equal.kind is PlanKind.RATE_REGION
    assert tuple(equal.grid) == RATE_REGION_EXPONENTS
    assert equal.snr_db == 20.0 and equal.eta == 0.05
    assert disparate.channel_variances == [1.0, 0.09]


def test_shipped_energy_efficiency_plan():
    plan = next(p for p in load_plans(PLANS / "energy_efficiency.cfg") if p.name == "ee")
    assert plan.mu == 0.35 and plan.noise_var == 1e-4 and plan.p_dyn_dbm == 27.0 and plan.p_sta_mw == 1.0
    assert plan.qos_at(5) == 1.0


def test_case_of_keys_is_kept():
    (plan,) = parse_plans("[p]\nkind = sum-rate\nK = 3\nM = 4\ngrid = 10\nschemes = rsma,mulp\n")
    assert (plan.K, plan.M) == (3, 4)
    assert plan.channel_variances == [1.0, 1.0, 1.0]
    assert plan.seeds == list(range(20))
    assert plan.qos_at(0) == 0.0


def test_paired_qos_ladder():
    (plan,) = parse_plans("[p]\nkind = sum-rate\ngrid = 5,10\nqos = 0.1,0.2\n")
    assert [plan.qos_at(i) for i in range(2)] == [0.1, 0.2]


@pytest.mark.parametrize(
    "text",
    [
        "",
        "no section header\n",
        "[p]\nkind = sum-rate\ngrid = 5,10\nqos = 0.1,0.2,0.3\n",
        "[p]\nkind = ee\ngrid = 4,6,8\nqos = 0.1,0.2\n",
        "[p]\nkind = rate-region\ngrid = -1,0,1\nqos = 0.1,0.2\n",
        "[p]\nkind = sum-rate\ngrid = 5\nschemes = rsma,oma\n",
        "[p]\nkind = sum-rate\ngrid = 5\nsolvers = bb,wmmse\n",
        "[p]\nkind = sum-rate\ngrid =\n",
        "[p]\nkind = capacity\ngrid = 5\n",
        "[p]\nkind = sum-rate\ngrid = 5\nK = 3\n",
        "[p]\nkind = sum-rate\ngrid = 5\nvariances = 1.0\n",
        "[p]\nkind = sum-rate\ngrid = 5\ncount = 0\n",
        "[p]\nkind = sum-rate\ngrid = five\n",
    ],
)
def test_invalid_plans(text):
    with pytest.raises(PlanError):
        parse_plans(text)


def test_qos_ladder_must_cover_the_grid_for_every_kind():
    with pytest.raises(PlanError):
        ExperimentPlan("e", PlanKind.EE, [4.0, 6.0, 8.0], qos=[0.1, 0.2])
    plan = ExperimentPlan("e", PlanKind.EE, [4.0, 6.0, 8.0], qos=[0.5])
    assert [plan.qos_at(i) for i in range(3)] == [0.5, 0.5, 0.5]
