import hypothesis
import pytest

from ehaloha.params import build_system_params

hypothesis.settings.register_profile("ci", max_examples=50, deadline=None)
hypothesis.settings.load_profile("ci")


@pytest.fixture(scope="session")
def ref_params():
    """q1 = q2 = 0.4 with the harvest probability pinned to 0.6 exactly."""
    return build_system_params({"p_h1": 0.6})


@pytest.fixture(scope="session")
def default_params():
    """Library defaults: harvest probability derived from the physical link."""
    return build_system_params()
