"""Shooting solver: Newton on the two wall derivatives (f''(0), theta'(0)).

The wall state is completed from the boundary conditions, integrated outward
with an embedded Runge-Kutta pair, and the far-field values (f'(eta_max),
theta(eta_max)) are driven to zero.

Strong Darcy/magnetic drag gives the linearized momentum equation a growing
far-field mode exp(r eta) with

    r = (-f_inf + sqrt(f_inf^2 + 4 nu_r (K + M))) / (2 nu_r)

so a direct shot over eta_max = 10 can amplify a poor guess past the blow-up
limit. When that happens the truncation point is marched up from a short
domain, each stage warm-started from the last.
"""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp

from components.kellerbox import Mesh, SolutionProfile
from components.model import (
    M,
    THETA,
    FlowParameters,
    rhs_first_order,
    wall_state,
)
from data.properties import MixtureRatios
from utils.errors import IntegrationBlowUpError, InvalidInputError, SolverFailureError

logger = logging.getLogger(__name__)

BLOW_UP_LIMIT = 1e6
MIN_OUTPUT_POINTS = 200
INTEGRATORS = ("RK45", "DOP853")
REL_TOL_RANGE = (1e-12, 1e-3)

# Newton step size below which the iteration is considered stagnated
STAGNATION_STEP = 1e-12
STAGNATION_RESIDUAL = 1e-6

# Largest negative f' or theta still accepted on a converged trajectory
SIGN_TOLERANCE = 1e-6


@dataclass(frozen=True)
class ShootingUnknowns:
    """Wall derivatives n0 = f''(0) and o0 = theta'(0)"""

    wall_shear: float
    wall_heat: float

    def __post_init__(self):
        if not (math.isfinite(self.wall_shear) and math.isfinite(self.wall_heat)):
            raise InvalidInputError(f"shooting unknowns must be finite, got {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.wall_shear, self.wall_heat], dtype=float)

    @classmethod
    def from_array(cls, values) -> "ShootingUnknowns":
        return cls(float(values[0]), float(values[1]))


@dataclass(frozen=True)
class ShootingConfig:
    eta_max: float = 10.0
    rel_tol: float = 1e-10
    newton_tol: float = 1e-8
    max_iterations: int = 50
    max_halvings: int = 10
    method: str = "DOP853"
    n_nodes: int = 1001
    fallback_eta: tuple = (6.0, 4.0)
    continuation_start: float = 2.0
    min_increment: float = 0.05

    def __post_init__(self):
        low, high = REL_TOL_RANGE
        if not low <= self.rel_tol <= high:
            raise InvalidInputError(f"rel_tol must lie in [{low:g}, {high:g}], got {self.rel_tol}")
        if not self.newton_tol > 0:
            raise InvalidInputError(f"newton_tol must be positive, got {self.newton_tol}")
        if not self.eta_max > 0:
            raise InvalidInputError(f"eta_max must be positive, got {self.eta_max}")
        if self.method not in INTEGRATORS:
            raise InvalidInputError(f"method must be one of {', '.join(INTEGRATORS)}, got {self.method!r}")
        if int(self.max_iterations) < 1:
            raise InvalidInputError(f"max_iterations must be at least 1, got {self.max_iterations}")
        if int(self.n_nodes) < 9:
            raise InvalidInputError(f"n_nodes must be at least 9, got {self.n_nodes}")


@dataclass(frozen=True)
class Trajectory:
    """Integrated states on a uniform output grid plus the terminal values"""

    eta: np.ndarray
    states: np.ndarray
    terminal: tuple
    dense: object = field(repr=False, default=None)


def initial_unknowns(params: FlowParameters, ratios: MixtureRatios) -> ShootingUnknowns:
    return ShootingUnknowns(
        -1.3 / (1.0 + ratios.slip_factor_a1 * params.velocity_slip),
        -math.sqrt(params.prandtl) / (1.0 + params.thermal_slip),
    )


def integrate_ivp(
    unknowns: ShootingUnknowns,
    params: FlowParameters,
    ratios: MixtureRatios,
    eta_max: float = 10.0,
    rel_tol: float = 1e-10,
    method: str = "DOP853",
    n_points: int = MIN_OUTPUT_POINTS + 1,
) -> Trajectory:
    """Integrate the first-order system from the wall to eta_max

    Parameters:
    unknowns (ShootingUnknowns): f''(0) and theta'(0)
    eta_max (float): truncation point
    rel_tol (float): relative local error tolerance, in [1e-12, 1e-3]
    method (str): "DOP853" or "RK45"
    n_points (int): output samples (at least 200)

    Returns:
    Trajectory: sampled states and (f'(eta_max), theta(eta_max))
    """
    low, high = REL_TOL_RANGE
    if not low <= rel_tol <= high:
        raise InvalidInputError(f"rel_tol must lie in [{low:g}, {high:g}], got {rel_tol}")
    if method not in INTEGRATORS:
        raise InvalidInputError(f"method must be one of {', '.join(INTEGRATORS)}, got {method!r}")
    if not eta_max > 0:
        raise InvalidInputError(f"eta_max must be positive, got {eta_max}")

    y0 = wall_state(params, ratios, unknowns.wall_shear, unknowns.wall_heat)

    def rhs(_eta, y):
        return rhs_first_order(y, params, ratios)

    def blow_up(_eta, y):
        return BLOW_UP_LIMIT - np.max(np.abs(y))

    blow_up.terminal = True

    with np.errstate(over="ignore", invalid="ignore"):
        sol = solve_ivp(
            rhs,
            (0.0, float(eta_max)),
            y0,
            method=method,
            rtol=rel_tol,
            atol=max(rel_tol * 1e-2, 1e-14),
            dense_output=True,
            events=blow_up,
        )
    if sol.status == 1:
        raise IntegrationBlowUpError(float(sol.t_events[0][0]))
    if sol.status != 0 or not np.all(np.isfinite(sol.y[:, -1])):
        raise IntegrationBlowUpError(float(sol.t[-1]), f"integration failed at eta = {sol.t[-1]:.4f}: {sol.message}")

    eta = np.linspace(0.0, float(eta_max), max(int(n_points), MIN_OUTPUT_POINTS))
    states = sol.sol(eta).T
    states[0] = y0
    states[-1] = sol.y[:, -1]
    terminal = (float(sol.y[M, -1]), float(sol.y[THETA, -1]))
    return Trajectory(eta=eta, states=states, terminal=terminal, dense=sol.sol)


@dataclass(frozen=True)
class _NewtonOutcome:
    unknowns: np.ndarray
    converged: bool
    iterations: int
    residual_norm: float
    history: tuple


def _terminal(u, params, ratios, eta_max, config):
    trajectory = integrate_ivp(
        ShootingUnknowns.from_array(u), params, ratios, eta_max, config.rel_tol, config.method
    )
    return np.array(trajectory.terminal)


def _newton(start, params, ratios, eta_max, config) -> _NewtonOutcome:
    """Damped Newton with a forward-difference Jacobian of the terminal map

    Steps are halved until the terminal residual decreases, so the recorded
    residual history is monotone.
    """
    u = np.array(start, dtype=float)
    residual = _terminal(u, params, ratios, eta_max, config)
    norm = float(np.max(np.abs(residual)))
    history = [norm]

    for iteration in range(1, int(config.max_iterations) + 1):
        if norm < config.newton_tol:
            return _NewtonOutcome(u, True, iteration - 1, norm, tuple(history))

        jacobian = np.empty((2, 2))
        for k in range(2):
            shifted = u.copy()
            shift = 1e-7 * max(1.0, abs(u[k]))
            shifted[k] += shift
            jacobian[:, k] = (_terminal(shifted, params, ratios, eta_max, config) - residual) / shift
        try:
            step = np.linalg.solve(jacobian, -residual)
        except np.linalg.LinAlgError as e:
            raise SolverFailureError(iteration, "singular shooting Jacobian") from e

        scale = 1.0
        accepted = False
        for _ in range(config.max_halvings + 1):
            trial = u + scale * step
            try:
                trial_residual = _terminal(trial, params, ratios, eta_max, config)
            except IntegrationBlowUpError:
                scale *= 0.5
                continue
            trial_norm = float(np.max(np.abs(trial_residual)))
            if trial_norm < norm:
                accepted = True
                break
            scale *= 0.5

        stagnated = float(np.max(np.abs(step))) <= STAGNATION_STEP * max(1.0, float(np.max(np.abs(u))))
        if not accepted:
            converged = stagnated and norm < STAGNATION_RESIDUAL
            return _NewtonOutcome(u, converged, iteration, norm, tuple(history))

        u, residual, norm = trial, trial_residual, trial_norm
        history.append(norm)
        logger.debug(
            "eta_max = %.3f iteration %d: n0 = %.10f, o0 = %.10f, |terminal| = %.3e, step = %.4g",
            eta_max,
            iteration,
            u[0],
            u[1],
            norm,
            scale,
        )
        if stagnated and norm < STAGNATION_RESIDUAL:
            return _NewtonOutcome(u, True, iteration, norm, tuple(history))

    return _NewtonOutcome(u, norm < config.newton_tol, int(config.max_iterations), norm, tuple(history))


def _admissible(unknowns, params, ratios, eta_max, config) -> bool:
    """True when f' and theta stay non-negative out to eta_max

    The terminal map also vanishes on roots whose velocity overshoots below
    zero and recovers at eta_max; those are not decaying boundary layers.
    """
    try:
        trajectory = integrate_ivp(
            ShootingUnknowns.from_array(unknowns),
            params,
            ratios,
            eta_max,
            config.rel_tol,
            config.method,
            config.n_nodes,
        )
    except IntegrationBlowUpError:
        return False
    lowest = np.min(trajectory.states[:, [M, THETA]], axis=0)
    return bool(np.all(lowest >= -SIGN_TOLERANCE))


def _continuation(start, params, ratios, eta_max, config, failures) -> _NewtonOutcome | None:
    """March the truncation point from continuation_start up to eta_max"""
    current = min(config.continuation_start, eta_max)
    try:
        outcome = _newton(start, params, ratios, current, config)
    except (IntegrationBlowUpError, SolverFailureError) as e:
        failures.append(e)
        return None
    if not outcome.converged:
        return None

    increment = 1.0
    total_iterations = outcome.iterations
    while current < eta_max:
        target = min(current + increment, eta_max)
        try:
            trial = _newton(outcome.unknowns, params, ratios, target, config)
        except (IntegrationBlowUpError, SolverFailureError) as e:
            failures.append(e)
            trial = None
        if trial is not None and trial.converged:
            logger.debug("continuation reached eta_max = %.3f", target)
            outcome, current = trial, target
            total_iterations += trial.iterations
            increment = min(2.0 * increment, 2.0)
            continue
        increment *= 0.5
        if increment < config.min_increment:
            logger.debug("continuation stalled at eta_max = %.3f", current)
            return None

    if not _admissible(outcome.unknowns, params, ratios, eta_max, config):
        logger.debug("continuation ended on a reversed-flow root at eta_max = %.3f", eta_max)
        return None
    return _NewtonOutcome(outcome.unknowns, True, total_iterations, outcome.residual_norm, outcome.history)


def _attempt(start, params, ratios, eta_max, config, failures) -> _NewtonOutcome | None:
    try:
        outcome = _newton(start, params, ratios, eta_max, config)
    except (IntegrationBlowUpError, SolverFailureError) as e:
        logger.debug("direct shot at eta_max = %.3f failed: %s", eta_max, e)
        failures.append(e)
        outcome = None
    if outcome is not None and outcome.converged:
        if _admissible(outcome.unknowns, params, ratios, eta_max, config):
            return outcome
        logger.debug(
            "direct shot at eta_max = %.3f converged to f''(0) = %.8f with reversed flow; rejected",
            eta_max,
            outcome.unknowns[0],
        )
        outcome = replace(outcome, converged=False)

    logger.debug("switching to eta continuation for eta_max = %.3f", eta_max)
    continued = _continuation(start, params, ratios, eta_max, config, failures)
    return continued if continued is not None else outcome


def _resample(unknowns, params, ratios, eta_max, config) -> tuple[Mesh, np.ndarray]:
    mesh = Mesh.uniform(eta_max, config.n_nodes - 1)
    trajectory = integrate_ivp(
        ShootingUnknowns.from_array(unknowns), params, ratios, eta_max, config.rel_tol, config.method
    )
    states = trajectory.dense(mesh.nodes).T
    states[0] = trajectory.states[0]
    states[-1] = trajectory.states[-1]
    return mesh, states


def _no_shot_error(failures, candidates) -> Exception:
    tried = ", ".join(f"{e:g}" for e in candidates)
    solver_failures = [e for e in failures if isinstance(e, SolverFailureError)]
    if not solver_failures:
        return IntegrationBlowUpError(
            min(candidates),
            f"every shot blew up (tried eta_max = {tried}); reduce eta_max or supply better initial unknowns",
        )
    last = solver_failures[-1]
    blow_ups = len(failures) - len(solver_failures)
    return SolverFailureError(
        last.iteration,
        f"no shot produced an iterate (tried eta_max = {tried}): {len(solver_failures)} Newton failure(s), "
        f"last {last}; {blow_ups} blow-up(s)",
    )


def solve_shooting(
    params: FlowParameters,
    ratios: MixtureRatios,
    config: ShootingConfig | None = None,
    initial: ShootingUnknowns | None = None,
) -> SolutionProfile:
    """Shoot on (f''(0), theta'(0)) and resample onto a uniform mesh

    Converged roots whose f' or theta dip below zero are rejected and the
    domain is approached by continuation instead. The returned profile's
    final_correction_norm and correction_history hold the max-norm of the
    terminal values (f'(eta_max), theta(eta_max)).
    """
    config = config or ShootingConfig()
    start = (initial or initial_unknowns(params, ratios)).as_array()

    candidates = [config.eta_max] + [eta for eta in config.fallback_eta if eta < config.eta_max]
    best, best_eta = None, None
    failures = []
    for eta_max in candidates:
        outcome = _attempt(start, params, ratios, eta_max, config, failures)
        if outcome is None:
            continue
        if outcome.converged:
            if eta_max != config.eta_max:
                logger.warning(
                    "shooting converged only after reducing eta_max from %.1f to %.1f",
                    config.eta_max,
                    eta_max,
                )
            best, best_eta = outcome, eta_max
            break
        if best is None or outcome.residual_norm < best.residual_norm:
            best, best_eta = outcome, eta_max

    if best is None:
        raise _no_shot_error(failures, candidates)

    mesh, states = _resample(best.unknowns, params, ratios, best_eta, config)
    if not best.converged:
        logger.warning(
            "shooting did not converge: |terminal| = %.3e after %d iterations",
            best.residual_norm,
            best.iterations,
        )
    return SolutionProfile(
        mesh=mesh,
        states=states,
        converged=best.converged,
        iterations=best.iterations,
        final_correction_norm=best.residual_norm,
        solver="shooting",
        correction_history=best.history,
        message="converged" if best.converged else f"terminal residual {best.residual_norm:.3e} above tolerance",
    )
