import logging

import pytest
from eqmirror.config import NovikovDefaults
from hypothesis import HealthCheck, settings

settings.register_profile(
    "eqmirror", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=25
)
settings.load_profile("eqmirror")


@pytest.fixture(autouse=True)
def quiet_logging(caplog):
    caplog.set_level(logging.WARNING, logger="eqmirror")


@pytest.fixture
def precision():
    return NovikovDefaults["precision"]
