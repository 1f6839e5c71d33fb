import numpy as np
import pytest
from hypothesis import strategies as st

from lorenz5.analytic.heteroclinic import MelnikovSetup
from lorenz5.config import IntegratorConfig, VerifyConfig

finite = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False, allow_infinity=False)
states = st.lists(finite, min_size=5, max_size=5).map(np.array)
couplings = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)


@pytest.fixture
def setup():
    return MelnikovSetup(M=1.0, k=0.5)


@pytest.fixture
def tight():
    return IntegratorConfig(method="dop853", rtol=1e-12, atol=1e-14)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_verify():
    return VerifyConfig(n_antisymmetry=50, n_jacobi=10, n_pushforward=50, n_consistency=20)
