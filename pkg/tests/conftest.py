import numpy as np
import pytest

from affinebody import geometry
from affinebody.frames import polar_orthonormal_frame


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def sphere():
    return geometry.sphere(1.0)


@pytest.fixture
def sphere_frame(sphere):
    return polar_orthonormal_frame(sphere)


@pytest.fixture
def pseudosphere():
    return geometry.pseudosphere(1.0)


@pytest.fixture
def flat():
    return geometry.flat_plane()


@pytest.fixture(params=["sphere", "pseudosphere", "flat"])
def any_model(request, sphere, pseudosphere, flat):
    return {"sphere": sphere, "pseudosphere": pseudosphere, "flat": flat}[request.param]
