import pytest

from earbreath.adaptive import warm_up


@pytest.fixture(scope="session", autouse=True)
def jit_warm():
    # compile the adaptive-filter kernel once so timing tests see steady state
    warm_up()
