import pytest

from components import kellerbox, shooting
from components.model import FlowParameters
from data.properties import IDENTITY_RATIOS, builtin_fluid, mixture_ratios

# Literature -theta'(0) for the clean case, keyed by Prandtl number
CLEAN_NUSSELT = {1.0: 0.9548, 3.0: 1.8691, 5.0: 2.5001, 10.0: 3.6604}
CLEAN_WALL_SHEAR = -1.28181

TABLE_PARAMS = dict(
    prandtl=21.0,
    phi=0.1,
    magnetic_m=2.5,
    forchheimer_fr=0.4,
    porosity_k=0.7,
    radiation_r=10.0,
    suction_s=0.5,
    velocity_slip=0.1,
    thermal_slip=0.1,
)


@pytest.fixture
def clean_params():
    return FlowParameters(prandtl=1.0)


@pytest.fixture
def identity_ratios():
    return IDENTITY_RATIOS


@pytest.fixture
def swcnt_ratios():
    return mixture_ratios(builtin_fluid("kerosene"), builtin_fluid("swcnt"), 0.1)


@pytest.fixture
def table_params():
    return FlowParameters(**TABLE_PARAMS)


@pytest.fixture(scope="module")
def clean_profile():
    return kellerbox.solve(FlowParameters(prandtl=1.0), IDENTITY_RATIOS)


@pytest.fixture(scope="module")
def clean_shooting_profile():
    return shooting.solve_shooting(FlowParameters(prandtl=1.0), IDENTITY_RATIOS)
