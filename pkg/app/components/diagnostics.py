"""Wall quantities and dimensional field reconstruction."""

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from components.kellerbox import SolutionProfile
from components.model import F, M, THETA, DimensionalScenario
from data.properties import MixtureRatios
from utils.errors import InvalidInputError

FIELD_COLUMNS = ["eta", "y", "u", "v", "T", "psi"]


@dataclass(frozen=True)
class WallQuantities:
    """Raw wall derivatives and their table-convention reductions

    reduced_skin_friction = -(1 - phi)^-2.5 f''(0)
    reduced_nusselt       = -(K_nf / K_f) theta'(0)
    """

    reduced_skin_friction: float
    reduced_nusselt: float
    f_double_prime_0: float
    theta_prime_0: float


def reduce_wall_values(f_double_prime_0: float, theta_prime_0: float, ratios: MixtureRatios, phi: float | None = None) -> WallQuantities:
    phi = ratios.phi if phi is None else float(phi)
    if not 0.0 <= phi < 1.0:
        raise InvalidInputError(f"phi must lie in [0, 1), got {phi}")
    return WallQuantities(
        reduced_skin_friction=-((1.0 - phi) ** -2.5) * f_double_prime_0,
        reduced_nusselt=-ratios.conductivity_ratio * theta_prime_0,
        f_double_prime_0=f_double_prime_0,
        theta_prime_0=theta_prime_0,
    )


def wall_quantities(profile: SolutionProfile, ratios: MixtureRatios, phi: float | None = None) -> WallQuantities:
    """Skin friction and Nusselt number in the sign-free table convention

    Parameters:
    profile (SolutionProfile): a converged profile from either solver
    ratios (MixtureRatios): property ratios the profile was solved with
    phi (float): volume fraction; defaults to ratios.phi

    Returns:
    WallQuantities: reduced and raw wall values
    """
    if not profile.converged:
        raise InvalidInputError(f"wall quantities need a converged profile ({profile.solver}: {profile.message})")
    return reduce_wall_values(profile.wall_shear, profile.wall_heat, ratios, phi)


def _scales(scenario: DimensionalScenario):
    growth = scenario.half_growth
    length_scale = math.sqrt(2.0 * scenario.nu_f * scenario.length_l / scenario.u0) / growth
    velocity_scale = math.sqrt(scenario.nu_f * scenario.u0 / (2.0 * scenario.length_l)) * growth
    return growth, length_scale, velocity_scale


def reconstruct_dimensional(profile: SolutionProfile, scenario: DimensionalScenario) -> pd.DataFrame:
    """Sample (y, u, v, T, psi) at station x from a converged profile

    The frame's attrs carry U_w, T_w, Re_x and the local Nusselt factor
    sqrt(x / 2L).
    """
    if not profile.converged:
        raise InvalidInputError(f"cannot reconstruct fields from an unconverged profile ({profile.message})")
    growth, length_scale, velocity_scale = _scales(scenario)
    eta = profile.eta
    f, m, theta = profile.states[:, F], profile.states[:, M], profile.states[:, THETA]
    u_w = scenario.wall_velocity

    frame = pd.DataFrame(
        {
            "eta": eta,
            "y": eta * length_scale,
            "u": u_w * m,
            "v": -velocity_scale * (f + eta * m),
            "T": scenario.t_inf + scenario.t0 * growth * theta,
            "psi": math.sqrt(2.0 * scenario.nu_f * scenario.length_l * scenario.u0) * f * growth,
        },
        columns=FIELD_COLUMNS,
    )
    frame.attrs.update(
        {
            "U_w": u_w,
            "T_w": scenario.t_inf + scenario.t0 * growth,
            "Re_x": u_w * scenario.station_x / scenario.nu_f,
            "nusselt_factor": math.sqrt(max(scenario.station_x, 0.0) / (2.0 * scenario.length_l)),
            "station_x": scenario.station_x,
        }
    )
    return frame


def continuity_residual(profile: SolutionProfile, scenario: DimensionalScenario) -> np.ndarray:
    """du/dx + dv/dy at the interior nodes

    du/dx = (U0 / L) e^(x/L) (m + eta n / 2) follows from the similarity form;
    dv/dy is a central difference of the reconstructed v.
    """
    growth, length_scale, velocity_scale = _scales(scenario)
    eta = profile.eta
    f, m = profile.states[:, F], profile.states[:, M]
    n = profile.states[:, M + 1]

    du_dx = scenario.u0 / scenario.length_l * growth**2 * (m + 0.5 * eta * n)
    v = -velocity_scale * (f + eta * m)
    dv_deta = (v[2:] - v[:-2]) / (eta[2:] - eta[:-2])
    dv_dy = dv_deta / length_scale
    return du_dx[1:-1] + dv_dy


@dataclass(frozen=True)
class LocalWallQuantities:
    """x-dependent wall values: sqrt(Re_x) C_f and Re_x^-1/2 Nu_x"""

    skin_friction: float
    nusselt: float
    reynolds_x: float


def local_wall_quantities(wall: WallQuantities, scenario: DimensionalScenario) -> LocalWallQuantities:
    """Attach the local sqrt(x / 2L) factor to the table-convention values"""
    factor = math.sqrt(max(scenario.station_x, 0.0) / (2.0 * scenario.length_l))
    reynolds = scenario.wall_velocity * scenario.station_x / scenario.nu_f
    return LocalWallQuantities(
        skin_friction=wall.reduced_skin_friction,
        nusselt=wall.reduced_nusselt * factor,
        reynolds_x=reynolds,
    )
