import math

import numpy as np
import pytest

from sequential_decoding.ensembles import preset_ensemble
from sequential_decoding.models import Preset


@pytest.fixture
def canonical():
    """|0> and |+> with equal probability; rho has eigenvalues (1 +- 1/sqrt 2)/2."""
    return preset_ensemble(Preset.TWO_PURE_THETA, [math.pi / 4])


@pytest.fixture
def orthogonal():
    return preset_ensemble(Preset.ORTHOGONAL_PAIR)


@pytest.fixture
def depolarized():
    return preset_ensemble(Preset.DEPOLARIZED_PAIR, [math.pi / 4, 0.3])


@pytest.fixture
def diagonal():
    return preset_ensemble(Preset.DIAGONAL_PAIR, [0.9, 0.2])


@pytest.fixture
def identical():
    return preset_ensemble(Preset.IDENTICAL_MIXED, [0.8])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
