"""Similarity-reduced boundary-layer equations for the CNT nanofluid sheet flow.

State vector ordering is (f, m, n, theta, o) with m = f', n = f'', o = theta'.

Momentum:  nu_r n' + f n - (2 + Fr) m^2 - (K + M) m = 0
Energy:    a o' + b (f o - m theta) = 0

where nu_r = viscosity_ratio / density_ratio and (a, b) comes from
`energy_coefficients` for the selected energy form.
"""

import math
from dataclasses import dataclass

import numpy as np

from data.properties import PHI_MAX, FluidProperties, MixtureRatios
from utils.errors import DegenerateCoefficientError, InvalidInputError

ENERGY_FORMS = ("diffusive", "convective")

# Field order of a state vector
F, M, N, THETA, O = range(5)
STATE_SIZE = 5


@dataclass(frozen=True)
class FlowParameters:
    """The dimensionless groups governing the reduced equations"""

    phi: float = 0.0
    porosity_k: float = 0.0
    forchheimer_fr: float = 0.0
    magnetic_m: float = 0.0
    radiation_r: float = 0.0
    prandtl: float = 1.0
    suction_s: float = 0.0
    velocity_slip: float = 0.0
    thermal_slip: float = 0.0
    energy_form: str = "diffusive"

    def __post_init__(self):
        for name in PARAMETER_NAMES:
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidInputError(f"{name} must be a finite number, got {value!r}")
        if self.prandtl <= 0:
            raise InvalidInputError(f"prandtl must be positive, got {self.prandtl}")
        if not 0.0 <= self.phi < PHI_MAX:
            raise InvalidInputError(f"phi must lie in [0, {PHI_MAX}), got {self.phi}")
        for name in NONNEGATIVE_PARAMETERS:
            if getattr(self, name) < 0:
                raise InvalidInputError(f"{name} must be non-negative, got {getattr(self, name)}")
        if self.energy_form not in ENERGY_FORMS:
            raise InvalidInputError(
                f"energy_form must be one of {', '.join(ENERGY_FORMS)}, got {self.energy_form!r}"
            )

    def replace(self, **changes) -> "FlowParameters":
        """Copy with some fields changed, validated like a fresh instance"""
        unknown = set(changes) - set(PARAMETER_NAMES) - {"energy_form"}
        if unknown:
            raise InvalidInputError(f"unknown flow parameter(s): {', '.join(sorted(unknown))}")
        values = {name: getattr(self, name) for name in (*PARAMETER_NAMES, "energy_form")}
        values.update(changes)
        return FlowParameters(**values)


PARAMETER_NAMES = (
    "phi",
    "porosity_k",
    "forchheimer_fr",
    "magnetic_m",
    "radiation_r",
    "prandtl",
    "suction_s",
    "velocity_slip",
    "thermal_slip",
)

NONNEGATIVE_PARAMETERS = (
    "porosity_k",
    "forchheimer_fr",
    "magnetic_m",
    "radiation_r",
    "velocity_slip",
    "thermal_slip",
)


@dataclass(frozen=True)
class DimensionalScenario:
    """Dimensional inputs of the sheet problem, evaluated at station x"""

    u0: float = 1.0
    length_l: float = 1.0
    nu_f: float = 1.0
    permeability_k1: float = 1.0
    drag_cb: float = 0.0
    electrical_conductivity: float = 0.0
    b0: float = 0.0
    t0: float = 1.0
    t_inf: float = 300.0
    v0: float = 0.0
    n1: float = 0.0
    d1: float = 0.0
    stefan_boltzmann: float = 5.670374419e-8
    absorption_k: float = 1.0
    station_x: float = 0.0

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidInputError(f"{name} must be finite, got {value!r}")
        for name in ("u0", "length_l", "nu_f", "permeability_k1", "stefan_boltzmann", "absorption_k", "t_inf"):
            if getattr(self, name) <= 0:
                raise InvalidInputError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def wall_velocity(self) -> float:
        """Stretching velocity U_w = U0 exp(x/L)"""
        return self.u0 * math.exp(self.station_x / self.length_l)

    @property
    def half_growth(self) -> float:
        """exp(x / 2L), the growth factor shared by eta, v, psi and T_w"""
        return math.exp(self.station_x / (2.0 * self.length_l))


@dataclass(frozen=True)
class StateVector:
    """One node of the first-order system"""

    f: float
    m: float
    n: float
    theta: float
    o: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.as_array()):
            raise InvalidInputError(f"state components must be finite: {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.f, self.m, self.n, self.theta, self.o], dtype=float)

    @classmethod
    def from_array(cls, values) -> "StateVector":
        values = np.asarray(values, dtype=float)
        if values.shape != (STATE_SIZE,):
            raise InvalidInputError(f"a state vector has 5 components, got shape {values.shape}")
        return cls(*(float(v) for v in values))


def nondimensionalize(
    scenario: DimensionalScenario, ratios: MixtureRatios, base: FluidProperties
) -> FlowParameters:
    """Map a dimensional scenario onto the dimensionless groups (local similarity at x)

    Parameters:
    scenario (DimensionalScenario): dimensional inputs, including the station x
    ratios (MixtureRatios): nanofluid property ratios
    base (FluidProperties): base-fluid properties (needed for Pr and R)

    Returns:
    FlowParameters: dimensionless groups with the default energy form
    """
    u_w = scenario.wall_velocity
    b_field = scenario.b0 * scenario.half_growth
    nu_nf = scenario.nu_f * ratios.kinematic_viscosity_ratio
    k_nf = base.conductivity * ratios.conductivity_ratio
    reference_rate = scenario.u0 * scenario.nu_f / (2.0 * scenario.length_l)

    denominators = {
        "K1 * U_w": scenario.permeability_k1 * u_w,
        "rho_f * U_w": base.density * u_w,
        "K_nf * K*": k_nf * scenario.absorption_k,
        "K_f": base.conductivity,
        "U0 nu_f / 2L": reference_rate,
        "2 nu_f L": 2.0 * scenario.nu_f * scenario.length_l,
    }
    for label, value in denominators.items():
        if not (math.isfinite(value) and value > 0):
            raise InvalidInputError(f"non-positive denominator {label} = {value!r}")

    return FlowParameters(
        phi=ratios.phi,
        porosity_k=2.0 * nu_nf * scenario.length_l / (scenario.permeability_k1 * u_w),
        forchheimer_fr=scenario.drag_cb / (2.0 * math.sqrt(scenario.permeability_k1)),
        magnetic_m=2.0 * scenario.electrical_conductivity * b_field**2 * scenario.length_l / (base.density * u_w),
        radiation_r=4.0 * scenario.stefan_boltzmann * scenario.t_inf**3 / (k_nf * scenario.absorption_k),
        prandtl=scenario.nu_f * base.heat_capacity / base.conductivity,
        suction_s=scenario.v0 / math.sqrt(reference_rate),
        velocity_slip=scenario.n1 * math.sqrt(reference_rate),
        thermal_slip=scenario.d1 * math.sqrt(scenario.u0 / (2.0 * scenario.nu_f * scenario.length_l)),
    )


def energy_coefficients(params: FlowParameters, ratios: MixtureRatios) -> tuple[float, float]:
    """Coefficients (a, b) of the energy equation a o' + b (f o - m theta) = 0"""
    thermal = ratios.conductivity_ratio / ratios.heat_capacity_ratio
    if params.energy_form == "convective":
        coefficient = params.prandtl / thermal + 0.75 * params.radiation_r
        if coefficient <= 0:
            raise DegenerateCoefficientError(f"convective energy coefficient is {coefficient}")
        return 1.0, coefficient

    gamma = thermal / params.prandtl + 4.0 / 3.0 * params.radiation_r
    if not gamma > 0:
        raise DegenerateCoefficientError(f"thermal diffusion coefficient Gamma = {gamma}")
    return gamma, 1.0


def _momentum_coefficients(params: FlowParameters, ratios: MixtureRatios):
    inverse_viscosity = 1.0 / ratios.kinematic_viscosity_ratio
    inertia = 2.0 + params.forchheimer_fr
    drag = params.porosity_k + params.magnetic_m
    return inverse_viscosity, inertia, drag


def rhs_first_order(state, params: FlowParameters, ratios: MixtureRatios) -> np.ndarray:
    """Derivatives (f', m', n', theta', o') of the first-order system

    Accepts a StateVector, a 5-vector, or an array whose last axis has length 5
    (evaluated row by row).
    """
    y = state.as_array() if isinstance(state, StateVector) else np.asarray(state, dtype=float)
    f, m, n, theta, o = np.moveaxis(y, -1, 0)
    inverse_viscosity, inertia, drag = _momentum_coefficients(params, ratios)
    diffusion, convection = energy_coefficients(params, ratios)

    dy = np.empty_like(y)
    dy[..., F] = m
    dy[..., M] = n
    dy[..., N] = inverse_viscosity * (inertia * m * m - f * n + drag * m)
    dy[..., THETA] = o
    dy[..., O] = convection / diffusion * (m * theta - f * o)
    return dy


def rhs_jacobian(state, params: FlowParameters, ratios: MixtureRatios) -> np.ndarray:
    """Analytic Jacobian d(rhs)/d(state); shape (..., 5, 5) for stacked states"""
    y = state.as_array() if isinstance(state, StateVector) else np.asarray(state, dtype=float)
    f, m, n, theta, o = np.moveaxis(y, -1, 0)
    inverse_viscosity, inertia, drag = _momentum_coefficients(params, ratios)
    diffusion, convection = energy_coefficients(params, ratios)
    scale = convection / diffusion

    jac = np.zeros(y.shape[:-1] + (STATE_SIZE, STATE_SIZE))
    jac[..., F, M] = 1.0
    jac[..., M, N] = 1.0
    jac[..., N, F] = -inverse_viscosity * n
    jac[..., N, M] = inverse_viscosity * (2.0 * inertia * m + drag)
    jac[..., N, N] = -inverse_viscosity * f
    jac[..., THETA, O] = 1.0
    jac[..., O, F] = -scale * o
    jac[..., O, M] = scale * theta
    jac[..., O, THETA] = scale * m
    jac[..., O, O] = -scale * f
    return jac


def wall_state(params: FlowParameters, ratios: MixtureRatios, wall_shear: float, wall_heat: float) -> np.ndarray:
    """Wall state satisfying the three wall conditions for given f''(0), theta'(0)"""
    return np.array(
        [
            params.suction_s,
            1.0 + ratios.slip_factor_a1 * params.velocity_slip * wall_shear,
            wall_shear,
            1.0 + params.thermal_slip * wall_heat,
            wall_heat,
        ]
    )


def boundary_residuals(wall_state, far_state, params: FlowParameters, ratios: MixtureRatios) -> np.ndarray:
    """Residuals of the five boundary conditions; all vanish at a solution"""
    w = wall_state.as_array() if isinstance(wall_state, StateVector) else np.asarray(wall_state, dtype=float)
    far = far_state.as_array() if isinstance(far_state, StateVector) else np.asarray(far_state, dtype=float)
    return np.array(
        [
            w[F] - params.suction_s,
            w[M] - 1.0 - ratios.slip_factor_a1 * params.velocity_slip * w[N],
            w[THETA] - 1.0 - params.thermal_slip * w[O],
            far[M],
            far[THETA],
        ]
    )


def boundary_jacobians(params: FlowParameters, ratios: MixtureRatios) -> tuple[np.ndarray, np.ndarray]:
    """Partial derivatives of the boundary residuals w.r.t. wall and far states"""
    wall = np.zeros((STATE_SIZE, STATE_SIZE))
    wall[0, F] = 1.0
    wall[1, M] = 1.0
    wall[1, N] = -ratios.slip_factor_a1 * params.velocity_slip
    wall[2, THETA] = 1.0
    wall[2, O] = -params.thermal_slip

    far = np.zeros((STATE_SIZE, STATE_SIZE))
    far[3, M] = 1.0
    far[4, THETA] = 1.0
    return wall, far
