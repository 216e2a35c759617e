import numpy as np
import pytest

from mcpreamble import SystemConfig, ambiguity, design_prototype


@pytest.fixture(scope="session")
def desk():
    return SystemConfig(M=128, L_h=8, K=4)


@pytest.fixture(scope="session")
def proto(desk):
    return design_prototype(desk.M, desk.K)


@pytest.fixture(scope="session")
def table(desk, proto):
    return ambiguity(proto, desk)


@pytest.fixture(scope="session")
def small():
    return SystemConfig(M=32, L_h=4, K=4)


@pytest.fixture(scope="session")
def small_proto(small):
    return design_prototype(small.M, small.K)


@pytest.fixture(scope="session")
def small_table(small, small_proto):
    return ambiguity(small_proto, small)


def cgauss(rng, *shape):
    """Unit-variance circular complex Gaussian samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
