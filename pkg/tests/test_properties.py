import logging

import numpy as np
import pytest

from data.properties import (
    IDENTITY_RATIOS,
    FluidProperties,
    builtin_fluid,
    check_volume_fraction,
    mixture_ratios,
    parse_fluid,
)
from utils.errors import InvalidInputError


def test_builtin_lookup_is_case_insensitive():
    assert builtin_fluid("SWCNT") == FluidProperties(2600.0, 425.0, 6600.0)
    assert builtin_fluid(" kerosene ").conductivity == 0.145


def test_unknown_fluid_lists_valid_names():
    with pytest.raises(InvalidInputError, match="kerosene, mwcnt, swcnt"):
        builtin_fluid("graphene")


@pytest.mark.parametrize("spec", ["1000,4180,0.6", (1000, 4180, 0.6), FluidProperties(1000, 4180, 0.6)])
def test_parse_fluid_accepts_custom_triples(spec):
    assert parse_fluid(spec) == FluidProperties(1000.0, 4180.0, 0.6)


@pytest.mark.parametrize("spec", ["1000,4180", "1000,abc,0.6", "1000,-4180,0.6"])
def test_parse_fluid_rejects_bad_triples(spec):
    with pytest.raises(InvalidInputError):
        parse_fluid(spec)


def test_zero_fraction_gives_identity():
    ratios = mixture_ratios(builtin_fluid("kerosene"), builtin_fluid("mwcnt"), 0.0)
    assert ratios == IDENTITY_RATIOS
    assert ratios.kinematic_viscosity_ratio == 1.0


def test_swcnt_ratios_at_ten_percent(swcnt_ratios):
    assert swcnt_ratios.viscosity_ratio == pytest.approx(1.301350, abs=5e-5)
    assert swcnt_ratios.density_ratio == pytest.approx(1.232056, abs=5e-5)
    assert swcnt_ratios.heat_capacity_ratio == pytest.approx(0.967523, abs=5e-5)
    assert swcnt_ratios.conductivity_ratio == pytest.approx(1.333309, abs=5e-5)
    assert swcnt_ratios.slip_factor_a1 == pytest.approx(1.056242, abs=5e-5)
    assert swcnt_ratios.phi == 0.1


@pytest.mark.parametrize("particle", ["swcnt", "mwcnt"])
@pytest.mark.parametrize("phi", [0.02, 0.1, 0.19])
def test_ratios_match_closed_forms(particle, phi):
    base, p = builtin_fluid("kerosene"), builtin_fluid(particle)
    ratios = mixture_ratios(base, p, phi)

    rho = (1 - phi) + phi * p.density / base.density
    rho_c = (1 - phi) + phi * (p.density * p.specific_heat) / (base.density * base.specific_heat)
    kf, kp = base.conductivity, p.conductivity
    k = (kp + 2 * kf - 2 * phi * (kf - kp)) / (kp + 2 * kf + phi * (kf - kp))

    assert ratios.viscosity_ratio == pytest.approx(1 / (1 - phi) ** 2.5, rel=1e-12)
    assert ratios.density_ratio == pytest.approx(rho, rel=1e-12)
    assert ratios.heat_capacity_ratio == pytest.approx(rho_c, rel=1e-12)
    assert ratios.conductivity_ratio == pytest.approx(k, rel=1e-12)
    assert ratios.slip_factor_a1 == pytest.approx(1 / ((1 - phi) ** 2.5 * rho), rel=1e-12)


def test_swcnt_conducts_better_than_mwcnt():
    base = builtin_fluid("kerosene")
    swcnt = mixture_ratios(base, builtin_fluid("swcnt"), 0.1)
    mwcnt = mixture_ratios(base, builtin_fluid("mwcnt"), 0.1)
    assert swcnt.conductivity_ratio > mwcnt.conductivity_ratio
    assert swcnt.density_ratio > mwcnt.density_ratio


@pytest.mark.parametrize("particle", ["swcnt", "mwcnt"])
def test_density_and_heat_capacity_are_affine_in_phi(particle):
    base, p = builtin_fluid("kerosene"), builtin_fluid(particle)
    low, mid, high = (mixture_ratios(base, p, phi) for phi in (0.0, 0.05, 0.1))
    for field in ("density_ratio", "heat_capacity_ratio"):
        a, b, c = getattr(low, field), getattr(mid, field), getattr(high, field)
        assert abs(b - (a + c) / 2) < 1e-12


@pytest.mark.parametrize("particle", ["swcnt", "mwcnt"])
def test_conductivity_grows_with_phi(particle):
    base, p = builtin_fluid("kerosene"), builtin_fluid(particle)
    conductivity = [mixture_ratios(base, p, phi).conductivity_ratio for phi in np.linspace(0.0, 0.2, 21)]
    assert np.all(np.diff(conductivity) > 0)


@pytest.mark.parametrize("phi", [-0.01, 0.3, 0.5, float("nan")])
def test_volume_fraction_out_of_range(phi):
    with pytest.raises(InvalidInputError):
        check_volume_fraction(phi)


def test_high_volume_fraction_warns(caplog):
    with caplog.at_level(logging.WARNING, logger="data.properties"):
        assert check_volume_fraction(0.25) == 0.25
    assert "above 0.2" in caplog.text


def test_moderate_volume_fraction_is_quiet(caplog):
    with caplog.at_level(logging.WARNING, logger="data.properties"):
        check_volume_fraction(0.2)
    assert caplog.text == ""
