"""One-at-a-time parameter sweeps around a stated baseline."""

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd

from components.diagnostics import reduce_wall_values
from components.model import PARAMETER_NAMES
from routes.run_config import RunConfig
from routes.solve import run_solvers, secondary_path
from utils.errors import CntFlowError, InvalidInputError, NonConvergenceError
from utils.helpers import write_csv, write_sidecar

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["param", "value", "particle", "skin_friction", "nusselt", "converged", "iterations"]
COMPARISON_COLUMNS = [
    "kellerbox_fpp0",
    "shooting_fpp0",
    "abs_diff_fpp0",
    "kellerbox_thetap0",
    "shooting_thetap0",
    "abs_diff_thetap0",
]

SKIN_FRICTION_LADDERS = (
    ("phi", (0.02, 0.05, 0.07, 0.1)),
    ("magnetic_m", (1.0, 1.5, 2.0, 2.5)),
    ("forchheimer_fr", (0.1, 0.2, 0.3, 0.4)),
    ("porosity_k", (0.1, 0.3, 0.5, 0.7)),
    ("suction_s", (0.1, 0.2, 0.4, 0.5)),
    ("velocity_slip", (0.1, 0.4, 0.7, 0.9)),
)

PRESETS = {
    "table3": SKIN_FRICTION_LADDERS,
    "table4": SKIN_FRICTION_LADDERS
    + (
        ("radiation_r", (1.0, 5.0, 7.0, 10.0)),
        ("thermal_slip", (0.1, 0.15, 0.17, 0.19)),
    ),
}


@dataclass(frozen=True)
class SweepSpec:
    """Ordered (parameter, values) ladders, each varied alone over the baseline"""

    entries: tuple

    def __post_init__(self):
        if not self.entries:
            raise InvalidInputError("a sweep needs at least one parameter")
        normalized = []
        for name, values in self.entries:
            if name not in PARAMETER_NAMES:
                raise InvalidInputError(
                    f"unknown sweep parameter {name!r}; valid names are: {', '.join(PARAMETER_NAMES)}"
                )
            values = tuple(float(v) for v in values)
            if not values:
                raise InvalidInputError(f"empty value list for {name}")
            if not all(math.isfinite(v) for v in values):
                raise InvalidInputError(f"non-finite value in the {name} ladder")
            normalized.append((name, values))
        object.__setattr__(self, "entries", tuple(normalized))

    @classmethod
    def from_preset(cls, name: str) -> "SweepSpec":
        if name not in PRESETS:
            raise InvalidInputError(f"unknown preset {name!r}; valid presets are: {', '.join(PRESETS)}")
        return cls(PRESETS[name])

    @classmethod
    def parse(cls, items) -> "SweepSpec":
        """Build from 'name=v1,v2,...' strings"""
        entries = []
        for item in items:
            if "=" not in item:
                raise InvalidInputError(f"expected name=v1,v2,... got {item!r}")
            name, raw = (part.strip() for part in item.split("=", 1))
            try:
                values = tuple(float(v) for v in raw.split(",") if v.strip())
            except ValueError as e:
                raise InvalidInputError(f"cannot parse values for {name}: {raw!r}") from e
            entries.append((name, values))
        return cls(tuple(entries))

    def cases(self):
        for name, values in self.entries:
            for value in values:
                yield name, value


def _failed_row(row, error) -> dict:
    return {**row, "skin_friction": float("nan"), "nusselt": float("nan"), "converged": False,
            "iterations": getattr(error, "iteration", 0)}


def run_case(task) -> dict:
    """Solve one (parameter, value, particle) case; top level so it can be pickled

    With solver "both" the row carries the Keller-box values plus each
    solver's wall derivatives and their absolute differences.
    """
    name, value, particle_name, particle, config = task
    params = config.params.replace(**{name: value})
    ratios = config.ratios_for(particle, params)
    row = {"param": name, "value": value, "particle": particle_name}
    try:
        profiles = run_solvers(params, ratios, config)
    except InvalidInputError:
        raise
    except (CntFlowError, np.linalg.LinAlgError) as e:
        logger.warning("%s = %g (%s): %s", name, value, particle_name, e)
        return _failed_row(row, e)

    primary = profiles["kellerbox"] if "kellerbox" in profiles else profiles["shooting"]
    wall = reduce_wall_values(primary.wall_shear, primary.wall_heat, ratios, params.phi)
    row.update(
        skin_friction=wall.reduced_skin_friction,
        nusselt=wall.reduced_nusselt,
        converged=all(profile.converged for profile in profiles.values()),
        iterations=primary.iterations,
    )
    if len(profiles) == 2:
        keller, shot = profiles["kellerbox"], profiles["shooting"]
        row.update(
            kellerbox_fpp0=keller.wall_shear,
            shooting_fpp0=shot.wall_shear,
            abs_diff_fpp0=abs(keller.wall_shear - shot.wall_shear),
            kellerbox_thetap0=keller.wall_heat,
            shooting_thetap0=shot.wall_heat,
            abs_diff_thetap0=abs(keller.wall_heat - shot.wall_heat),
        )
    return row


def sweep_table(spec: SweepSpec, baseline: RunConfig, workers: int | None = None) -> pd.DataFrame:
    """Rows ordered by ladder, then value, then particle, whatever the worker count"""
    tasks = [
        (name, value, particle_name, particle, baseline)
        for name, value in spec.cases()
        for particle_name, particle in baseline.particles
    ]
    # Validate every case up front so a bad value fails before any solving
    for name, value, _, particle, config in tasks:
        config.ratios_for(particle, config.params.replace(**{name: value}))

    workers = workers or baseline.workers
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_case, tasks))
    else:
        rows = [run_case(task) for task in tasks]
    columns = SWEEP_COLUMNS + (COMPARISON_COLUMNS if baseline.solver == "both" else [])
    return pd.DataFrame(rows, columns=columns)


def cmd_sweep(spec: SweepSpec, baseline: RunConfig, workers: int | None = None) -> int:
    """Write the sweep CSV and its sidecar; unconverged rows are kept and flagged

    With --solver both the per-solver wall values go to `<out>_solvers.csv`
    and the largest differences are printed and recorded in the sidecar.
    """
    table = sweep_table(spec, baseline, workers)
    write_csv(table[SWEEP_COLUMNS], baseline.out)
    metadata = {
        "command": "sweep",
        "sweep": [{"param": name, "values": list(values)} for name, values in spec.entries],
    }
    if baseline.solver == "both":
        comparison_path = secondary_path(baseline.out, "solvers")
        write_csv(table[["param", "value", "particle", *COMPARISON_COLUMNS]], comparison_path)
        max_diff = {
            "fpp0": float(table["abs_diff_fpp0"].max()),
            "thetap0": float(table["abs_diff_thetap0"].max()),
        }
        print(f"max |diff| over {len(table)} cases: f''(0) {max_diff['fpp0']:.2e}  theta'(0) {max_diff['thetap0']:.2e}")
        metadata.update(solver_comparison=os.path.basename(comparison_path), max_abs_diff=max_diff)
    write_sidecar(baseline.out, {**metadata, **baseline.metadata()})
    logger.info("wrote %d sweep rows to %s", len(table), baseline.out)

    failed = table[~table["converged"]]
    if not failed.empty:
        raise NonConvergenceError(f"{len(failed)} of {len(table)} sweep cases did not converge (flagged in {baseline.out})")
    return 0
