import pytest

from stein_pairs import certify_hypotheses, law_from_spec


@pytest.fixture(scope="session")
def gaussian_law():
    return law_from_spec("gaussian")


@pytest.fixture(scope="session")
def quartic_law():
    return law_from_spec("quartic:1")


@pytest.fixture(scope="session")
def exp_law():
    return law_from_spec("exponential:1")


@pytest.fixture(scope="session")
def gennorm_412_law():
    return law_from_spec("gennorm:4:12")


@pytest.fixture(scope="session")
def gaussian_report(gaussian_law):
    return certify_hypotheses(gaussian_law)


@pytest.fixture(scope="session")
def quartic_report(quartic_law):
    return certify_hypotheses(quartic_law)
