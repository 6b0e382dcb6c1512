import warnings

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def quiet():
    """Silence regime/approximation warnings inside a test body."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield
