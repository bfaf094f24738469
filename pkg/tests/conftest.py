import numpy as np
import pytest

from recollide import fields as fl
from recollide import impact as imp
from recollide import molstruct as ms
from recollide.constants import omega_from_wavelength_nm


@pytest.fixture(scope="session")
def molecular():
    return ms.build_molecular_data()


@pytest.fixture(scope="session")
def model():
    return imp.ImpactModel()


@pytest.fixture(scope="session")
def f800():
    return fl.LaserField(e0=0.065, omega=omega_from_wavelength_nm(800.0),
                         n_cycles=2)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
