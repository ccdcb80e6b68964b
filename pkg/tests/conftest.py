import numpy as np
import pytest
from hypothesis import settings

from seqgini.population import FAMILIES, PopulationModel, PopulationParams, register_family

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def constant_model():
    """A degenerate 'distribution' that always yields the same income."""
    if "constant" not in FAMILIES:
        register_family(
            "constant",
            ("level",),
            None,
            lambda rng, size, level: np.full(size, level),
        )
    return PopulationModel.of("constant", level=3.0)


@pytest.fixture(scope="session")
def constant_truth():
    return PopulationParams(mu=3.0, sigma2=0.0, delta=0.0, sigma1_2=0.0, tau=0.0, xi2=0.0833, gini=0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
