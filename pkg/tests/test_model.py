import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from components.model import (
    F,
    M,
    N,
    O,
    THETA,
    DimensionalScenario,
    FlowParameters,
    StateVector,
    boundary_jacobians,
    boundary_residuals,
    energy_coefficients,
    nondimensionalize,
    rhs_first_order,
    rhs_jacobian,
    wall_state,
)
from data.properties import IDENTITY_RATIOS, MixtureRatios, builtin_fluid
from utils.errors import DegenerateCoefficientError, InvalidInputError

RNG_SEED = 20240611


@pytest.mark.parametrize(
    "changes",
    [
        {"prandtl": 0.0},
        {"phi": 0.3},
        {"porosity_k": -0.1},
        {"radiation_r": -1.0},
        {"thermal_slip": float("inf")},
        {"energy_form": "implicit"},
    ],
)
def test_invalid_parameters_are_rejected(changes):
    with pytest.raises(InvalidInputError):
        FlowParameters(**changes)


def test_blowing_is_allowed():
    assert FlowParameters(suction_s=-0.5).suction_s == -0.5


def test_replace_validates_and_rejects_unknown_names():
    params = FlowParameters(prandtl=21.0)
    assert params.replace(magnetic_m=2.0).magnetic_m == 2.0
    assert params.replace(magnetic_m=2.0).prandtl == 21.0
    with pytest.raises(InvalidInputError, match="unknown"):
        params.replace(inclination=0.5)
    with pytest.raises(InvalidInputError):
        params.replace(prandtl=-1.0)


def test_rest_state_has_zero_derivatives():
    params = FlowParameters(porosity_k=1.0, magnetic_m=2.0, prandtl=3.0)
    assert_allclose(rhs_first_order(np.zeros(5), params, IDENTITY_RATIOS), np.zeros(5))


def test_hand_evaluated_clean_derivatives():
    dy = rhs_first_order(StateVector(0.0, 1.0, 0.0, 1.0, 0.0), FlowParameters(), IDENTITY_RATIOS)
    assert dy[N] == pytest.approx(2.0)
    assert dy[O] == pytest.approx(1.0)
    assert dy[F] == 1.0 and dy[M] == 0.0 and dy[THETA] == 0.0


def test_drag_terms_add_to_momentum():
    params = FlowParameters(porosity_k=1.0, forchheimer_fr=0.25, magnetic_m=2.0)
    dy = rhs_first_order(np.array([0.0, 1.0, 0.0, 1.0, 0.0]), params, IDENTITY_RATIOS)
    assert dy[N] == pytest.approx(5.25)


def test_momentum_ignores_temperature(table_params, swcnt_ratios):
    rng = np.random.default_rng(RNG_SEED)
    state = rng.normal(size=5)
    perturbed = state.copy()
    perturbed[[THETA, O]] += rng.normal(size=2)
    a = rhs_first_order(state, table_params, swcnt_ratios)
    b = rhs_first_order(perturbed, table_params, swcnt_ratios)
    assert_allclose(a[:3], b[:3], rtol=0, atol=0)


def test_clean_momentum_reduces_to_closed_form():
    rng = np.random.default_rng(RNG_SEED)
    states = rng.normal(size=(10, 5))
    dy = rhs_first_order(states, FlowParameters(), IDENTITY_RATIOS)
    f, m, n = states[:, F], states[:, M], states[:, N]
    assert_allclose(dy[:, N], 2 * m**2 - f * n, rtol=0, atol=1e-14)


@pytest.mark.parametrize("energy_form", ["diffusive", "convective"])
def test_jacobian_matches_finite_differences(energy_form, table_params, swcnt_ratios):
    params = table_params.replace(energy_form=energy_form)
    rng = np.random.default_rng(RNG_SEED)
    for state in rng.normal(size=(5, 5)):
        analytic = rhs_jacobian(state, params, swcnt_ratios)
        numeric = np.empty((5, 5))
        for k in range(5):
            step = 1e-6 * max(1.0, abs(state[k]))
            up, down = state.copy(), state.copy()
            up[k] += step
            down[k] -= step
            numeric[:, k] = (rhs_first_order(up, params, swcnt_ratios) - rhs_first_order(down, params, swcnt_ratios)) / (2 * step)
        assert_allclose(numeric, analytic, rtol=1e-6, atol=1e-6)


def test_jacobian_is_vectorized():
    states = np.random.default_rng(RNG_SEED).normal(size=(7, 5))
    stacked = rhs_jacobian(states, FlowParameters(prandtl=2.0), IDENTITY_RATIOS)
    assert stacked.shape == (7, 5, 5)
    assert_allclose(stacked[3], rhs_jacobian(states[3], FlowParameters(prandtl=2.0), IDENTITY_RATIOS))


def test_energy_forms_coincide_for_the_clean_case():
    params = FlowParameters(prandtl=5.0)
    a, b = energy_coefficients(params, IDENTITY_RATIOS)
    c, d = energy_coefficients(params.replace(energy_form="convective"), IDENTITY_RATIOS)
    assert b / a == pytest.approx(d / c)


def test_radiation_adds_diffusion():
    a, b = energy_coefficients(FlowParameters(prandtl=2.0, radiation_r=3.0), IDENTITY_RATIOS)
    assert (a, b) == pytest.approx((0.5 + 4.0, 1.0))
    a, b = energy_coefficients(FlowParameters(prandtl=2.0, radiation_r=4.0, energy_form="convective"), IDENTITY_RATIOS)
    assert (a, b) == pytest.approx((1.0, 2.0 + 3.0))


@pytest.mark.parametrize("energy_form", ["diffusive", "convective"])
def test_degenerate_energy_coefficient(energy_form):
    broken = MixtureRatios(1.0, 1.0, 1.0, -1.0, 1.0)
    with pytest.raises(DegenerateCoefficientError):
        energy_coefficients(FlowParameters(energy_form=energy_form), broken)


def test_no_slip_wall_satisfies_wall_conditions():
    params = FlowParameters(suction_s=0.3)
    residuals = boundary_residuals(np.array([0.3, 1.0, 0.0, 1.0, 0.0]), np.zeros(5), params, IDENTITY_RATIOS)
    assert_allclose(residuals, np.zeros(5), atol=0)


def test_constructed_slip_wall_is_a_fixed_point(swcnt_ratios):
    params = FlowParameters(phi=0.1, suction_s=0.1, velocity_slip=0.05, thermal_slip=0.2)
    wall = wall_state(params, swcnt_ratios, -1.3, -0.8)
    assert wall[M] == pytest.approx(1.0 + 0.05 * swcnt_ratios.slip_factor_a1 * -1.3)
    assert_allclose(boundary_residuals(wall, np.zeros(5), params, swcnt_ratios), np.zeros(5), atol=1e-15)


def test_far_field_values_pass_through():
    far = StateVector(0.9, 0.01, -0.003, 0.02, -0.001)
    residuals = boundary_residuals(np.array([0.0, 1.0, 0.0, 1.0, 0.0]), far, FlowParameters(), IDENTITY_RATIOS)
    assert residuals[3:] == pytest.approx([0.01, 0.02])


def test_no_slip_residuals_ignore_wall_derivatives():
    wall = np.array([0.0, 1.0, -1.3, 1.0, -0.9])
    other = wall.copy()
    other[[N, O]] = [5.0, 7.0]
    params = FlowParameters()
    assert_allclose(
        boundary_residuals(wall, np.zeros(5), params, IDENTITY_RATIOS),
        boundary_residuals(other, np.zeros(5), params, IDENTITY_RATIOS),
    )


def test_boundary_jacobians_are_exact(swcnt_ratios):
    params = FlowParameters(phi=0.1, velocity_slip=0.4, thermal_slip=0.15, suction_s=0.2)
    rng = np.random.default_rng(RNG_SEED)
    wall, far, step_wall, step_far = rng.normal(size=(4, 5))
    wall_jac, far_jac = boundary_jacobians(params, swcnt_ratios)
    change = boundary_residuals(wall + step_wall, far + step_far, params, swcnt_ratios) - boundary_residuals(
        wall, far, params, swcnt_ratios
    )
    assert_allclose(change, wall_jac @ step_wall + far_jac @ step_far, atol=1e-12)


def test_state_vector_validation():
    with pytest.raises(InvalidInputError):
        StateVector(0.0, math.nan, 0.0, 0.0, 0.0)
    with pytest.raises(InvalidInputError):
        StateVector.from_array([1.0, 2.0])


def test_nondimensionalize_suction_arithmetic():
    scenario = DimensionalScenario(u0=1.0, length_l=1.0, nu_f=1.0, v0=0.5)
    params = nondimensionalize(scenario, IDENTITY_RATIOS, builtin_fluid("kerosene"))
    assert params.suction_s == pytest.approx(0.5 / math.sqrt(0.5))
    assert params.suction_s == pytest.approx(0.70711, abs=1e-5)


def test_zero_field_and_impermeable_wall():
    params = nondimensionalize(DimensionalScenario(b0=0.0, v0=0.0), IDENTITY_RATIOS, builtin_fluid("kerosene"))
    assert params.magnetic_m == 0.0
    assert params.suction_s == 0.0


def test_nondimensionalize_groups(swcnt_ratios):
    base = builtin_fluid("kerosene")
    scenario = DimensionalScenario(
        u0=0.2,
        length_l=2.0,
        nu_f=2e-6,
        permeability_k1=0.5,
        drag_cb=0.3,
        electrical_conductivity=1e-4,
        b0=0.5,
        station_x=1.0,
        n1=10.0,
        d1=4e-3,
    )
    params = nondimensionalize(scenario, swcnt_ratios, base)
    u_w = 0.2 * math.exp(0.5)
    nu_nf = 2e-6 * swcnt_ratios.viscosity_ratio / swcnt_ratios.density_ratio

    assert params.phi == 0.1
    assert params.porosity_k == pytest.approx(2 * nu_nf * 2.0 / (0.5 * u_w))
    assert params.forchheimer_fr == pytest.approx(0.3 / (2 * math.sqrt(0.5)))
    assert params.magnetic_m == pytest.approx(2 * 1e-4 * (0.5 * math.exp(0.25)) ** 2 * 2.0 / (base.density * u_w))
    assert params.prandtl == pytest.approx(2e-6 * base.heat_capacity / base.conductivity)
    assert params.velocity_slip == pytest.approx(10.0 * math.sqrt(0.2 * 2e-6 / 4.0))
    assert params.thermal_slip == pytest.approx(4e-3 * math.sqrt(0.2 / (2 * 2e-6 * 2.0)))


def test_nondimensionalize_rejects_bad_scenarios():
    with pytest.raises(InvalidInputError):
        DimensionalScenario(u0=0.0)
    with pytest.raises(InvalidInputError):
        DimensionalScenario(permeability_k1=-1.0)
