"""Clean-case regression against the literature heat-transfer values."""

import logging

import pandas as pd

from components.model import FlowParameters
from data.properties import IDENTITY_RATIOS
from routes.run_config import RunConfig
from routes.solve import run_solvers
from utils.errors import NonConvergenceError
from utils.helpers import fmt4, write_csv, write_sidecar

logger = logging.getLogger(__name__)

# Prandtl number -> (reference -theta'(0), tolerance)
REFERENCE_NUSSELT = {
    1.0: (0.9548, 2e-3),
    2.0: (1.4712, 2e-3),
    3.0: (1.8691, 2e-3),
    5.0: (2.5001, 2e-3),
    10.0: (3.6604, 4e-3),
}

VALIDATION_COLUMNS = ["prandtl", "solver", "reference", "computed", "abs_diff", "tolerance", "passed"]


def validation_table(config: RunConfig, tolerance: float | None = None) -> pd.DataFrame:
    """One row per (Pr, solver) with computed -theta'(0) against the reference"""
    rows = []
    for prandtl, (reference, default_tolerance) in REFERENCE_NUSSELT.items():
        params = FlowParameters(prandtl=prandtl)
        profiles = run_solvers(params, IDENTITY_RATIOS, config)
        for solver, profile in profiles.items():
            if not profile.converged:
                raise NonConvergenceError(f"{solver} did not converge for the clean case Pr = {prandtl:g}")
            computed = -profile.wall_heat
            limit = default_tolerance if tolerance is None else tolerance
            difference = abs(computed - reference)
            rows.append(
                {
                    "prandtl": prandtl,
                    "solver": solver,
                    "reference": reference,
                    "computed": computed,
                    "abs_diff": difference,
                    "tolerance": limit,
                    "passed": bool(difference < limit),
                }
            )
            logger.debug("Pr = %g %s: -theta'(0) = %.6f", prandtl, solver, computed)
    return pd.DataFrame(rows, columns=VALIDATION_COLUMNS)


def cmd_validate(config: RunConfig, tolerance: float | None = None, out: str | None = None) -> int:
    """Print the comparison table; 0 when every row passes, 1 otherwise"""
    table = validation_table(config, tolerance)

    print(f"{'Pr':>5} {'solver':>10} {'reference':>10} {'computed':>10} {'|diff|':>10}  result")
    for row in table.itertuples(index=False):
        print(
            f"{row.prandtl:>5g} {row.solver:>10} {fmt4(row.reference):>10} {fmt4(row.computed):>10} "
            f"{row.abs_diff:>10.2e}  {'pass' if row.passed else 'FAIL'}"
        )

    if out:
        write_csv(table, out)
        write_sidecar(out, {"command": "validate", "tolerance_override": tolerance, **config.metadata()})

    failed = table[~table["passed"]]
    if not failed.empty:
        logger.warning("%d of %d validation rows outside tolerance", len(failed), len(table))
        return 1
    return 0
