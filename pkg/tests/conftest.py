import pytest

from xplab.family import FamilyParams


@pytest.fixture(scope="session")
def params_paper():
    """The worked-example family: kappa=2.5, lambda=2."""
    return FamilyParams("2.5", 2, 1)


@pytest.fixture(scope="session")
def params_tiny():
    return FamilyParams(1, 2, 1)
