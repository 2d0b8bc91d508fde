import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from mrlab.algebra import InclusionSpec, random_state

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

SPECS = ("2x2", "2x3", "3x2", "1x2,2x1", "2x2,1x3")

seeds = st.integers(min_value=0, max_value=2**32 - 1)
specs = st.sampled_from(SPECS).map(InclusionSpec.parse)


def random_matrix(n, rng, m=None):
    m = n if m is None else m
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


def random_block_matrix(spec, rng):
    """Random (non-Hermitian) matrix with the block pattern of ``B``."""
    return np.where(spec.block_mask, random_matrix(spec.d_B, rng), 0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def spec22():
    return InclusionSpec.parse("2x2")


@pytest.fixture
def pair22():
    return random_state(4, seed=101), random_state(4, seed=202)


ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    return request.config.stash.setdefault(ACCEPTANCE_LINES, [])


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
