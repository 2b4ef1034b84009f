"""Keller-box solver for the reduced sheet-flow equations.

Each interval [eta_j-1, eta_j] contributes the box residual

    v_j - v_j-1 - h_j g((v_j + v_j-1) / 2) = 0

for the first-order system g of `components.model`. Newton linearization gives
a block-tridiagonal correction system with one 5x5 block row per node:

    row 0      wall conditions (f, m-slip, theta-slip) + m- and theta-chain of interval 1
    row j      f-chain, momentum, energy of interval j + m- and theta-chain of interval j+1
    row J      f-chain, momentum, energy of interval J + far-field m and theta

The m- and theta-chain rows are the ones that involve n and o at the lower
node, which keeps the wall block invertible when either slip parameter is zero.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import pandas as pd

from components import blocklinalg
from components.model import (
    F,
    M,
    N,
    O,
    STATE_SIZE,
    THETA,
    FlowParameters,
    StateVector,
    boundary_jacobians,
    boundary_residuals,
    rhs_first_order,
    rhs_jacobian,
)
from data.properties import MixtureRatios
from utils.errors import InvalidInputError, SingularBlockError, SolverFailureError

logger = logging.getLogger(__name__)

MIN_INTERVALS = 8
FAR_FIELD_LIMIT = 1e-3

# Interval residual components placed in the block row of their upper node
OWN_ROWS = [F, N, O]
# Interval residual components carried by the block row of their lower node
CHAIN_ROWS = [M, THETA]

PROFILE_COLUMNS = ["eta", "f", "fp", "fpp", "theta", "thetap"]


@dataclass(frozen=True)
class Mesh:
    """Strictly increasing eta nodes starting at zero"""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < MIN_INTERVALS + 1:
            raise InvalidInputError(f"a mesh needs at least {MIN_INTERVALS} intervals, got {max(nodes.size - 1, 0)}")
        if nodes[0] != 0.0:
            raise InvalidInputError(f"the first mesh node must be eta = 0, got {nodes[0]}")
        if not np.all(np.isfinite(nodes)) or np.any(np.diff(nodes) <= 0):
            raise InvalidInputError("mesh nodes must be finite and strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, eta_max: float, n_intervals: int) -> "Mesh":
        if not eta_max > 0:
            raise InvalidInputError(f"eta_max must be positive, got {eta_max}")
        return cls(np.linspace(0.0, float(eta_max), int(n_intervals) + 1))

    @property
    def spacings(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def eta_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def interval_count(self) -> int:
        return self.nodes.size - 1


@dataclass(frozen=True)
class SolverConfig:
    """Newton iteration and mesh settings"""

    tolerance: float = 1e-6
    max_iterations: int = 50
    damping: float = 1.0
    eta_max: float = 10.0
    n_nodes: int = 1001
    max_halvings: int = 8

    def __post_init__(self):
        if not self.tolerance > 0:
            raise InvalidInputError(f"tolerance must be positive, got {self.tolerance}")
        if int(self.max_iterations) < 1:
            raise InvalidInputError(f"max_iterations must be at least 1, got {self.max_iterations}")
        if not 0 < self.damping <= 1:
            raise InvalidInputError(f"damping must lie in (0, 1], got {self.damping}")
        if not self.eta_max > 0:
            raise InvalidInputError(f"eta_max must be positive, got {self.eta_max}")
        if int(self.n_nodes) < MIN_INTERVALS + 1:
            raise InvalidInputError(
                f"n_nodes must be at least {MIN_INTERVALS + 1} ({MIN_INTERVALS} intervals), got {self.n_nodes}"
            )

    @classmethod
    def from_step(cls, step: float, eta_max: float = 10.0, **kwargs) -> "SolverConfig":
        """Uniform mesh with spacing `step` (rounded to fit eta_max exactly)"""
        if not step > 0:
            raise InvalidInputError(f"mesh step must be positive, got {step}")
        return cls(eta_max=eta_max, n_nodes=int(round(eta_max / step)) + 1, **kwargs)

    @property
    def step(self) -> float:
        return self.eta_max / (self.n_nodes - 1)

    def mesh(self) -> Mesh:
        return Mesh.uniform(self.eta_max, self.n_nodes - 1)


@dataclass(frozen=True)
class SolutionProfile:
    """Nodal (f, f', f'', theta, theta') on a mesh plus iteration diagnostics"""

    mesh: Mesh
    states: np.ndarray
    converged: bool = False
    iterations: int = 0
    final_correction_norm: float = float("nan")
    solver: str = "kellerbox"
    correction_history: tuple = field(default=())
    message: str = ""

    def __post_init__(self):
        states = np.array(self.states, dtype=float)
        if states.shape != (self.mesh.nodes.size, STATE_SIZE):
            raise InvalidInputError(
                f"states must have shape ({self.mesh.nodes.size}, 5), got {states.shape}"
            )
        states.setflags(write=False)
        object.__setattr__(self, "states", states)

    @property
    def eta(self) -> np.ndarray:
        return self.mesh.nodes

    @property
    def wall(self) -> StateVector:
        return StateVector.from_array(self.states[0])

    @property
    def far(self) -> StateVector:
        return StateVector.from_array(self.states[-1])

    @property
    def wall_shear(self) -> float:
        """f''(0)"""
        return float(self.states[0, N])

    @property
    def wall_heat(self) -> float:
        """theta'(0)"""
        return float(self.states[0, O])

    def to_frame(self) -> pd.DataFrame:
        """Profile table with the CSV column names"""
        return pd.DataFrame(np.column_stack([self.eta, self.states]), columns=PROFILE_COLUMNS)


def initial_guess(mesh: Mesh, params: FlowParameters, ratios: MixtureRatios) -> SolutionProfile:
    """Exponential profiles that meet the three wall conditions exactly"""
    eta = mesh.nodes
    decay = np.exp(-eta)
    c_m = 1.0 / (1.0 + ratios.slip_factor_a1 * params.velocity_slip)
    c_t = 1.0 / (1.0 + params.thermal_slip)

    states = np.column_stack(
        [
            params.suction_s + c_m * (1.0 - decay),
            c_m * decay,
            -c_m * decay,
            c_t * decay,
            -c_t * decay,
        ]
    )
    return SolutionProfile(mesh=mesh, states=states, message="initial guess")


def _interval_residuals(states, spacings, params, ratios):
    midpoints = 0.5 * (states[1:] + states[:-1])
    slopes = rhs_first_order(midpoints, params, ratios)
    return states[1:] - states[:-1] - spacings[:, None] * slopes


def _layout(interval, boundary):
    """Arrange interval and boundary rows in block-row order, shape (J+1, 5)"""
    rows = np.empty((interval.shape[0] + 1,) + interval.shape[1:])
    rows[0, 0:3] = boundary[0:3]
    rows[1:, 0:3] = interval[:, OWN_ROWS]
    rows[:-1, 3:5] = interval[:, CHAIN_ROWS]
    rows[-1, 3:5] = boundary[3:5]
    return rows


def residuals(profile: SolutionProfile, params: FlowParameters, ratios: MixtureRatios) -> np.ndarray:
    """Discrete residuals (box equations and boundary conditions) in block-row order"""
    return _discrete_residuals(profile.states, profile.mesh.spacings, params, ratios)


def _discrete_residuals(states, spacings, params, ratios):
    interval = _interval_residuals(states, spacings, params, ratios)
    boundary = boundary_residuals(states[0], states[-1], params, ratios)
    return _layout(interval, boundary)


def assemble_newton(profile: SolutionProfile, params: FlowParameters, ratios: MixtureRatios) -> blocklinalg.BlockTridiagonalSystem:
    """Linearized correction system J_d delta = -R around the current profile"""
    states = profile.states
    spacings = profile.mesh.spacings
    midpoints = 0.5 * (states[1:] + states[:-1])
    half_step_jac = 0.5 * spacings[:, None, None] * rhs_jacobian(midpoints, params, ratios)
    identity = np.eye(STATE_SIZE)
    lower = -identity - half_step_jac
    upper = identity - half_step_jac
    wall_jac, far_jac = boundary_jacobians(params, ratios)

    count = states.shape[0]
    diag = np.zeros((count, STATE_SIZE, STATE_SIZE))
    sub = np.zeros((count - 1, STATE_SIZE, STATE_SIZE))
    sup = np.zeros((count - 1, STATE_SIZE, STATE_SIZE))

    diag[0, 0:3] = wall_jac[0:3]
    diag[1:, 0:3] = upper[:, OWN_ROWS]
    diag[:-1, 3:5] = lower[:, CHAIN_ROWS]
    diag[-1, 3:5] = far_jac[3:5]
    sub[:, 0:3] = lower[:, OWN_ROWS]
    sup[:, 3:5] = upper[:, CHAIN_ROWS]

    rhs = -_discrete_residuals(states, spacings, params, ratios)
    return blocklinalg.BlockTridiagonalSystem(diag=diag, sub=sub, sup=sup, rhs=rhs)


def far_field_decay(profile: SolutionProfile, fraction: float = 0.1) -> tuple[float, float]:
    """Largest |f'| and |theta| over the outer `fraction` of the mesh"""
    outer = profile.eta >= (1.0 - fraction) * profile.mesh.eta_max
    return (
        float(np.max(np.abs(profile.states[outer, M]))),
        float(np.max(np.abs(profile.states[outer, THETA]))),
    )


def solve(
    params: FlowParameters,
    ratios: MixtureRatios,
    config: SolverConfig | None = None,
    initial: SolutionProfile | None = None,
) -> SolutionProfile:
    """Damped Newton iteration on the box equations

    Parameters:
    params (FlowParameters): dimensionless groups
    ratios (MixtureRatios): nanofluid property ratios
    config (SolverConfig): tolerance, iteration limit, damping and mesh
    initial (SolutionProfile): optional starting iterate; its mesh is reused

    Returns:
    SolutionProfile: converged profile, or the last iterate flagged converged=False
    """
    config = config or SolverConfig()
    if initial is None:
        initial = initial_guess(config.mesh(), params, ratios)
    mesh = initial.mesh
    spacings = mesh.spacings

    states = np.array(initial.states)
    residual_norm = float(np.max(np.abs(_discrete_residuals(states, spacings, params, ratios))))
    history = []
    converged = False

    for iteration in range(1, int(config.max_iterations) + 1):
        system = assemble_newton(
            SolutionProfile(mesh=mesh, states=states), params, ratios
        )
        try:
            delta = blocklinalg.solve_system(system)
        except SingularBlockError as e:
            raise SolverFailureError(iteration, f"singular Newton matrix at block {e.block_index}") from e
        correction_norm = float(np.max(np.abs(delta)))
        if not np.isfinite(correction_norm):
            raise SolverFailureError(iteration, "non-finite Newton correction")
        history.append(correction_norm)

        step = config.damping
        for _ in range(config.max_halvings + 1):
            trial = states + step * delta
            trial_norm = float(np.max(np.abs(_discrete_residuals(trial, spacings, params, ratios))))
            if trial_norm <= residual_norm or correction_norm < config.tolerance:
                break
            step *= 0.5
        else:
            logger.debug("iteration %d: residual did not decrease after %d halvings", iteration, config.max_halvings)

        states = trial
        residual_norm = trial_norm
        logger.debug(
            "iteration %d: |delta| = %.3e, step = %.4g, |R| = %.3e",
            iteration,
            correction_norm,
            step,
            residual_norm,
        )
        if correction_norm < config.tolerance:
            converged = True
            break

    profile = SolutionProfile(
        mesh=mesh,
        states=states,
        converged=converged,
        iterations=len(history),
        final_correction_norm=history[-1],
        solver="kellerbox",
        correction_history=tuple(history),
        message="converged" if converged else f"no convergence after {len(history)} iterations",
    )
    if not converged:
        logger.warning(
            "Keller-box iteration stopped unconverged after %d iterations (|delta| = %.3e)",
            len(history),
            history[-1],
        )
        return profile

    m_far, theta_far = far_field_decay(profile)
    if max(m_far, theta_far) > FAR_FIELD_LIMIT:
        logger.warning(
            "far field not yet quiescent at eta_max = %.2f (|f'| = %.2e, |theta| = %.2e); consider a larger eta_max",
            mesh.eta_max,
            m_far,
            theta_far,
        )
    return profile


@dataclass(frozen=True)
class MeshStudy:
    """Wall values on successively halved meshes and their Richardson ratios"""

    steps: tuple
    wall_shear: tuple
    wall_heat: tuple
    shear_ratio: float
    heat_ratio: float
    converged: bool


def richardson_ratio(coarse: float, medium: float, fine: float) -> float:
    """(q_h - q_h/2) / (q_h/2 - q_h/4); tends to 4 for a second-order scheme"""
    denominator = medium - fine
    if denominator == 0:
        return float("inf")
    return (coarse - medium) / denominator


def mesh_study(
    params: FlowParameters,
    ratios: MixtureRatios,
    config: SolverConfig | None = None,
    levels: int = 3,
    wall_bias: Callable[[float], float] | None = None,
) -> MeshStudy:
    """Solve on h, h/2, h/4, ... and report observed convergence ratios

    `wall_bias(h)` is added to both wall values at each level; it exists so
    tests can inject a first-order error and check that the study flags it.
    """
    config = config or SolverConfig.from_step(0.04)
    if levels < 3:
        raise InvalidInputError(f"a mesh study needs at least 3 levels, got {levels}")

    steps, shear, heat = [], [], []
    converged = True
    for level in range(levels):
        level_config = replace(config, n_nodes=(config.n_nodes - 1) * 2**level + 1)
        profile = solve(params, ratios, level_config)
        converged = converged and profile.converged
        bias = wall_bias(level_config.step) if wall_bias is not None else 0.0
        steps.append(level_config.step)
        shear.append(profile.wall_shear + bias)
        heat.append(profile.wall_heat + bias)
        logger.info(
            "h = %.4f: f''(0) = %.8f, theta'(0) = %.8f",
            level_config.step,
            shear[-1],
            heat[-1],
        )

    return MeshStudy(
        steps=tuple(steps),
        wall_shear=tuple(shear),
        wall_heat=tuple(heat),
        shear_ratio=richardson_ratio(*shear[-3:]),
        heat_ratio=richardson_ratio(*heat[-3:]),
        converged=converged,
    )
