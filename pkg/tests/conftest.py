import pytest

from geomgates.config import load_config
from geomgates.evolve import PropagatorConfig


@pytest.fixture(scope="session")
def cfg():
    return load_config()


@pytest.fixture(scope="session")
def quick():
    """Cheap fixed-order stepper for unit tests that only need ~1e-6."""
    return PropagatorConfig(steps_per_period=512, method="midpoint", tolerance=1e-7)


@pytest.fixture(scope="session")
def accurate():
    """Extrapolating stepper used wherever a tight tolerance is asserted."""
    return PropagatorConfig(
        steps_per_period=4096, method="richardson", tolerance=1e-10
    )
