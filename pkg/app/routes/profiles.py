"""Velocity and temperature profiles for one varied parameter, both particles."""

import logging

import pandas as pd

from components.model import M, THETA
from routes.run_config import RunConfig
from routes.solve import run_solvers
from routes.sweep import SweepSpec
from utils.errors import InvalidInputError, NonConvergenceError
from utils.helpers import write_csv, write_sidecar

logger = logging.getLogger(__name__)

PROFILE_LONG_COLUMNS = ["param", "value", "particle", "eta", "fp", "theta"]


def profiles_table(spec: SweepSpec, baseline: RunConfig, stride: int = 10) -> tuple[pd.DataFrame, list]:
    """Long-format (f', theta) samples for every case; also returns unconverged cases"""
    if int(stride) < 1:
        raise InvalidInputError(f"stride must be at least 1, got {stride}")
    if baseline.solver == "both":
        raise InvalidInputError("profiles takes a single solver; use --solver kellerbox or --solver shooting")
    solver = baseline.solver

    frames, failed = [], []
    for name, value in spec.cases():
        params = baseline.params.replace(**{name: value})
        for particle_name, particle in baseline.particles:
            ratios = baseline.ratios_for(particle, params)
            profile = run_solvers(params, ratios, baseline, solver)[solver]
            if not profile.converged:
                failed.append((name, value, particle_name))
            index = slice(None, None, int(stride))
            frames.append(
                pd.DataFrame(
                    {
                        "param": name,
                        "value": value,
                        "particle": particle_name,
                        "eta": profile.eta[index],
                        "fp": profile.states[index, M],
                        "theta": profile.states[index, THETA],
                    },
                    columns=PROFILE_LONG_COLUMNS,
                )
            )
    return pd.concat(frames, ignore_index=True), failed


def cmd_profiles(spec: SweepSpec, baseline: RunConfig, stride: int = 10) -> int:
    table, failed = profiles_table(spec, baseline, stride)
    write_csv(table, baseline.out)
    write_sidecar(
        baseline.out,
        {
            "command": "profiles",
            "stride": stride,
            "sweep": [{"param": name, "values": list(values)} for name, values in spec.entries],
            **baseline.metadata(),
        },
    )
    logger.info("wrote %d profile samples to %s", len(table), baseline.out)
    if failed:
        raise NonConvergenceError(
            "unconverged profile(s): " + ", ".join(f"{n}={v:g} ({p})" for n, v, p in failed)
        )
    return 0
