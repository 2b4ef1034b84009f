"""Thermophysical property catalog and the CNT nanofluid mixture model.

The conductivity ratio follows the rational (Maxwell-type) form

    K_nf / K_f = ((K_p + 2K_f) - 2φ(K_f - K_p)) / ((K_p + 2K_f) + φ(K_f - K_p))

which is what the model is usually quoted with for kerosene/CNT suspensions,
even where it is attributed to Xue's logarithmic model. The rational form is
the one implemented here.
"""

import logging
import math
from dataclasses import dataclass

from utils.errors import InvalidInputError

logger = logging.getLogger(__name__)

# Volume fraction limits
PHI_MAX = 0.3
PHI_WARN = 0.2

# Table values: density (kg/m^3), specific heat (J/(kg K)), conductivity (W/(m K))
BUILTIN_PROPERTIES = {
    "kerosene": (783.0, 2090.0, 0.145),
    "swcnt": (2600.0, 425.0, 6600.0),
    "mwcnt": (1600.0, 796.0, 3000.0),
}

PARTICLES = ("swcnt", "mwcnt")


@dataclass(frozen=True)
class FluidProperties:
    """Density, specific heat and thermal conductivity of a fluid or particle"""

    density: float
    specific_heat: float
    conductivity: float

    def __post_init__(self):
        for field in ("density", "specific_heat", "conductivity"):
            value = getattr(self, field)
            if not (math.isfinite(value) and value > 0):
                raise InvalidInputError(f"{field} must be positive and finite, got {value!r}")

    @property
    def heat_capacity(self) -> float:
        """Volumetric heat capacity rho * C_p"""
        return self.density * self.specific_heat


@dataclass(frozen=True)
class MixtureRatios:
    """Nanofluid-to-base-fluid property ratios at a given volume fraction"""

    viscosity_ratio: float
    density_ratio: float
    heat_capacity_ratio: float
    conductivity_ratio: float
    slip_factor_a1: float
    phi: float = 0.0

    @property
    def kinematic_viscosity_ratio(self) -> float:
        """nu_nf / nu_f, the coefficient of f''' in the momentum equation"""
        return self.viscosity_ratio / self.density_ratio


IDENTITY_RATIOS = MixtureRatios(1.0, 1.0, 1.0, 1.0, 1.0, 0.0)


def builtin_fluid(name: str) -> FluidProperties:
    """Look up one of the catalog entries (kerosene, swcnt, mwcnt)"""
    key = str(name).strip().lower()
    if key not in BUILTIN_PROPERTIES:
        valid = ", ".join(sorted(BUILTIN_PROPERTIES))
        raise InvalidInputError(f"unknown fluid {name!r}; valid names are: {valid}")
    return FluidProperties(*BUILTIN_PROPERTIES[key])


def parse_fluid(spec) -> FluidProperties:
    """Resolve a catalog name or a "density,specific_heat,conductivity" triple

    Parameters:
    spec (str | FluidProperties | tuple): catalog name, comma separated triple,
        an existing FluidProperties or a 3-tuple of floats

    Returns:
    FluidProperties: the resolved property set
    """
    if isinstance(spec, FluidProperties):
        return spec
    if isinstance(spec, (tuple, list)):
        if len(spec) != 3:
            raise InvalidInputError(f"custom fluid needs three values, got {len(spec)}")
        return FluidProperties(*(float(v) for v in spec))

    text = str(spec).strip()
    if "," not in text:
        return builtin_fluid(text)
    try:
        values = tuple(float(part) for part in text.split(","))
    except ValueError as e:
        raise InvalidInputError(f"cannot parse custom fluid {spec!r}: {e}") from e
    return parse_fluid(values)


def check_volume_fraction(phi: float) -> float:
    """Validate phi against the accepted range, warning near the upper end"""
    phi = float(phi)
    if not (math.isfinite(phi) and 0.0 <= phi < PHI_MAX):
        raise InvalidInputError(f"volume fraction phi must lie in [0, {PHI_MAX}), got {phi!r}")
    if phi > PHI_WARN:
        logger.warning(
            "phi = %.3f is above %.1f, beyond the usual validity of the mixture model",
            phi,
            PHI_WARN,
        )
    return phi


def mixture_ratios(base: FluidProperties, particle: FluidProperties, phi: float) -> MixtureRatios:
    """Evaluate the nanofluid property ratios for a particle volume fraction phi"""
    phi = check_volume_fraction(phi)
    if phi == 0.0:
        return IDENTITY_RATIOS

    solvent = 1.0 - phi
    viscosity_ratio = solvent**-2.5
    density_ratio = solvent + phi * particle.density / base.density
    heat_capacity_ratio = solvent + phi * particle.heat_capacity / base.heat_capacity

    k_f, k_p = base.conductivity, particle.conductivity
    conductivity_ratio = ((k_p + 2.0 * k_f) - 2.0 * phi * (k_f - k_p)) / (
        (k_p + 2.0 * k_f) + phi * (k_f - k_p)
    )
    slip_factor_a1 = 1.0 / (solvent**2.5 * density_ratio)

    ratios = MixtureRatios(
        viscosity_ratio=viscosity_ratio,
        density_ratio=density_ratio,
        heat_capacity_ratio=heat_capacity_ratio,
        conductivity_ratio=conductivity_ratio,
        slip_factor_a1=slip_factor_a1,
        phi=phi,
    )
    for field in ("viscosity_ratio", "density_ratio", "heat_capacity_ratio", "conductivity_ratio"):
        value = getattr(ratios, field)
        if not (math.isfinite(value) and value > 0):
            raise InvalidInputError(f"{field} evaluated to {value!r} for phi = {phi}")
    return ratios
