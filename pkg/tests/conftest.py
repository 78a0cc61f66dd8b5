import numpy as np
import pytest

from zerocond.ensembles import EnsembleSpec


@pytest.fixture(scope="session")
def cp1_n100():
    return EnsembleSpec.projective_line(100)


@pytest.fixture(scope="session")
def cp1_n50():
    return EnsembleSpec.projective_line(50)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
