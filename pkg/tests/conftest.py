import pytest

from movingbed.params import case_study, limit_params
from movingbed.spectrum import dominant_eigenvalue


@pytest.fixture(scope="session")
def cs():
    return case_study()


@pytest.fixture(scope="session")
def lp():
    return limit_params()


@pytest.fixture(scope="session")
def lam0(cs):
    # computed once; every consumer gets the full-precision root
    return dominant_eigenvalue(cs, tol=1e-12)
