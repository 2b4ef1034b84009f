import logging
import os

from components import kellerbox, shooting
from components.diagnostics import wall_quantities
from components.kellerbox import SolutionProfile
from components.model import FlowParameters
from data.properties import MixtureRatios
from routes.run_config import RunConfig
from utils.errors import NonConvergenceError
from utils.helpers import fmt4, write_csv, write_sidecar

logger = logging.getLogger(__name__)


def run_solvers(params: FlowParameters, ratios: MixtureRatios, config: RunConfig, solver: str | None = None) -> dict:
    """Solve with the selected solver(s); returns {solver name: SolutionProfile}"""
    solver = solver or config.solver
    profiles = {}
    if solver in ("kellerbox", "both"):
        profiles["kellerbox"] = kellerbox.solve(params, ratios, config.solver_config)
    if solver in ("shooting", "both"):
        profiles["shooting"] = shooting.solve_shooting(params, ratios, config.shooting_config)
    return profiles


def secondary_path(out: str, solver: str) -> str:
    root, ext = os.path.splitext(out)
    return f"{root}_{solver}{ext or '.csv'}"


def summary_lines(profiles: dict, ratios: MixtureRatios) -> list[str]:
    lines = []
    for name, profile in profiles.items():
        status = "converged" if profile.converged else "NOT converged"
        lines.append(
            f"{name:>10}: f''(0) = {fmt4(profile.wall_shear)}  theta'(0) = {fmt4(profile.wall_heat)}  "
            f"({status}, {profile.iterations} iterations)"
        )
        if profile.converged:
            wall = wall_quantities(profile, ratios)
            lines.append(
                f"{'':>10}  skin friction = {fmt4(wall.reduced_skin_friction)}  "
                f"Nusselt = {fmt4(wall.reduced_nusselt)}"
            )
    if {"kellerbox", "shooting"} <= set(profiles):
        keller, shot = profiles["kellerbox"], profiles["shooting"]
        lines.append(
            f"{'|diff|':>10}: f''(0) {abs(keller.wall_shear - shot.wall_shear):.2e}  "
            f"theta'(0) {abs(keller.wall_heat - shot.wall_heat):.2e}"
        )
    return lines


def cmd_solve(config: RunConfig) -> int:
    """Solve one case, write the profile CSV(s) and print the wall quantities

    Returns:
    int: 0 on success; non-convergence raises NonConvergenceError after the
        best iterate has been written
    """
    name, particle = config.single_particle
    ratios = config.ratios_for(particle)
    profiles = run_solvers(config.params, ratios, config)

    paths = {}
    for index, (solver, profile) in enumerate(profiles.items()):
        path = config.out if index == 0 else secondary_path(config.out, solver)
        write_csv(profile.to_frame(), path)
        write_sidecar(
            path,
            {
                **config.metadata(),
                "particle": name,
                "profile_solver": solver,
                "converged": profile.converged,
                "iterations": profile.iterations,
                "final_correction_norm": profile.final_correction_norm,
            },
        )
        paths[solver] = path
        logger.info("wrote %s profile to %s", solver, path)

    for line in summary_lines(profiles, ratios):
        print(line)

    failed = [solver for solver, profile in profiles.items() if not profile.converged]
    if failed:
        raise NonConvergenceError(
            f"{', '.join(failed)} did not converge; best iterate written to "
            + ", ".join(paths[solver] for solver in failed)
        )
    return 0


def profile_from_frame(frame, solver: str = "kellerbox") -> SolutionProfile:
    """Rebuild a converged profile from a profile CSV frame"""
    mesh = kellerbox.Mesh(frame["eta"].to_numpy())
    states = frame[kellerbox.PROFILE_COLUMNS[1:]].to_numpy()
    return SolutionProfile(mesh=mesh, states=states, converged=True, solver=solver, message="loaded from CSV")
