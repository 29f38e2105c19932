import numpy as np
import pytest

from porowave.materials import Material, preset


@pytest.fixture(scope="session")
def sandstone():
    return Material(preset("sandstone_ortho"))


@pytest.fixture(scope="session")
def sandstone_inviscid():
    return Material(preset("sandstone_ortho", eta=0.0))


@pytest.fixture(scope="session")
def all_materials():
    from porowave.materials import PRESET_NAMES
    return {name: Material(preset(name)) for name in PRESET_NAMES}


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


def random_states(energy, rng, n):
    """Physically scaled random states: unit-energy-ball samples."""
    white = np.linalg.cholesky(np.linalg.inv(energy))
    return (white @ rng.standard_normal((8, n))).T
