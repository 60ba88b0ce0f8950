# tests/conftest.py - Shared fixtures: seeded channels and small problems.

import numpy as np
import pytest

from experiments.channels import gen_channels
from models.channel import ChannelSet
from models.problem import ProblemSpec, SchemeConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def channels():
    return gen_channels(7, 2, 2)


@pytest.fixture
def toy_channels():
    # orthogonal users with different strengths; easy to reason about by hand
    return ChannelSet(np.array([[1.0, 0.0], [0.0, 0.5]]))


@pytest.fixture
def wsr_problem(channels):
    return ProblemSpec.wsr(channels, 10.0, R_th=np.full(2, 0.2))


@pytest.fixture
def mulp_problem(channels):
    return ProblemSpec.wsr(channels, 10.0, scheme=SchemeConfig("mulp"))


@pytest.fixture
def single_user_problem():
    return ProblemSpec.wsr(gen_channels(3, 1, 2), 10.0)
