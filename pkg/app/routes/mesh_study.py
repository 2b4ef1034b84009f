import logging

import pandas as pd

from components import kellerbox
from routes.run_config import RunConfig
from utils.errors import NonConvergenceError
from utils.helpers import write_csv, write_sidecar

logger = logging.getLogger(__name__)

RATIO_RANGE = (3.2, 4.8)
MESH_STUDY_DEFAULTS = {"n_nodes": 251}


def cmd_mesh_study(config: RunConfig, levels: int = 3, wall_bias=None, out: str | None = None) -> int:
    """Solve on h, h/2, h/4 and check both Richardson ratios

    Returns:
    int: 0 when both ratios lie in [3.2, 4.8], 1 otherwise
    """
    _, particle = config.single_particle
    ratios = config.ratios_for(particle)
    study = kellerbox.mesh_study(config.params, ratios, config.solver_config, levels=levels, wall_bias=wall_bias)
    if not study.converged:
        raise NonConvergenceError("the Keller-box solve did not converge on every mesh level")

    print(f"{'h':>8} {'fpp(0)':>16} {'thetap(0)':>16}")
    for step, shear, heat in zip(study.steps, study.wall_shear, study.wall_heat):
        print(f"{step:>8.4f} {shear:>16.10f} {heat:>16.10f}")
    print(f"Richardson ratio f''(0): {study.shear_ratio:.3f}")
    print(f"Richardson ratio theta'(0): {study.heat_ratio:.3f}")

    if out:
        frame = pd.DataFrame({"h": study.steps, "fpp0": study.wall_shear, "thetap0": study.wall_heat})
        write_csv(frame, out)
        write_sidecar(
            out,
            {
                "command": "mesh-study",
                "shear_ratio": study.shear_ratio,
                "heat_ratio": study.heat_ratio,
                **config.metadata(),
            },
        )

    low, high = RATIO_RANGE
    if low <= study.shear_ratio <= high and low <= study.heat_ratio <= high:
        return 0
    logger.warning(
        "observed ratios %.3f, %.3f outside [%.1f, %.1f]; the scheme is not behaving as second order",
        study.shear_ratio,
        study.heat_ratio,
        low,
        high,
    )
    return 1
