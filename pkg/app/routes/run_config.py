"""Run configuration shared by every command.

Values are resolved in three layers: built-in defaults, then the `key = value`
config file, then flags given explicitly on the command line.
"""

import logging
from dataclasses import asdict, dataclass, field

from components.kellerbox import SolverConfig
from components.model import PARAMETER_NAMES, FlowParameters
from components.shooting import ShootingConfig
from data.properties import PARTICLES, FluidProperties, MixtureRatios, mixture_ratios, parse_fluid
from utils.errors import InvalidInputError

logger = logging.getLogger(__name__)

SOLVERS = ("kellerbox", "shooting", "both")

FLOAT_KEYS = (*PARAMETER_NAMES, "eta_max", "tolerance", "damping", "rel_tol", "newton_tol")
INT_KEYS = ("n_nodes", "max_iterations", "workers")
TEXT_KEYS = ("particle", "base", "solver", "out", "energy_form")
CONFIG_KEYS = (*FLOAT_KEYS, *INT_KEYS, *TEXT_KEYS)

DEFAULTS = {
    "base": "kerosene",
    "particle": "swcnt",
    "solver": "kellerbox",
    "out": "profile.csv",
    "energy_form": "diffusive",
    "eta_max": 10.0,
    "n_nodes": 1001,
    "tolerance": 1e-6,
    "max_iterations": 50,
    "damping": 1.0,
    "rel_tol": 1e-10,
    "newton_tol": 1e-8,
    "workers": 1,
}

# Baseline of the skin-friction and Nusselt tables
TABLE_BASELINE = {
    "prandtl": 21.0,
    "phi": 0.1,
    "magnetic_m": 2.5,
    "forchheimer_fr": 0.4,
    "porosity_k": 0.7,
    "radiation_r": 10.0,
    "suction_s": 0.5,
    "velocity_slip": 0.1,
    "thermal_slip": 0.1,
    "particle": "both",
}

# Baseline for the `profiles` command
PROFILE_BASELINE = {
    "prandtl": 21.0,
    "phi": 0.2,
    "forchheimer_fr": 0.25,
    "porosity_k": 1.0,
    "magnetic_m": 2.0,
    "radiation_r": 10.0,
    "suction_s": 0.1,
    "velocity_slip": 0.1,
    "thermal_slip": 0.1,
    "particle": "both",
}


@dataclass(frozen=True)
class RunConfig:
    """Everything one command needs: fluids, flow groups, solver settings, output"""

    base_name: str
    base: FluidProperties
    particles: tuple
    params: FlowParameters
    solver_config: SolverConfig
    shooting_config: ShootingConfig
    solver: str = "kellerbox"
    out: str = "profile.csv"
    workers: int = 1
    resolved: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise InvalidInputError(f"solver must be one of {', '.join(SOLVERS)}, got {self.solver!r}")
        if not self.particles:
            raise InvalidInputError("at least one particle is required")
        if int(self.workers) < 1:
            raise InvalidInputError(f"workers must be at least 1, got {self.workers}")
        if not str(self.out).strip():
            raise InvalidInputError("output path must not be empty")

    def ratios_for(self, particle: FluidProperties, params: FlowParameters | None = None) -> MixtureRatios:
        params = params or self.params
        return mixture_ratios(self.base, particle, params.phi)

    @property
    def single_particle(self) -> tuple[str, FluidProperties]:
        if len(self.particles) != 1:
            raise InvalidInputError("this command takes a single particle, not 'both'")
        return self.particles[0]

    def metadata(self) -> dict:
        """JSON-friendly description for the sidecar file"""
        return {
            "base": self.base_name,
            "base_properties": asdict(self.base),
            "particles": {name: asdict(props) for name, props in self.particles},
            "parameters": asdict(self.params),
            "kellerbox": asdict(self.solver_config),
            "shooting": asdict(self.shooting_config),
            "solver": self.solver,
        }


def _parse_particles(text) -> tuple:
    key = str(text).strip().lower()
    if key == "both":
        return tuple((name, parse_fluid(name)) for name in PARTICLES)
    props = parse_fluid(text)
    return ((key if "," not in key else "custom", props),)


def _coerce(key, value):
    if value is None:
        return None
    try:
        if key in FLOAT_KEYS:
            return float(value)
        if key in INT_KEYS:
            number = float(value)
            if number != int(number):
                raise ValueError(f"{value!r} is not an integer")
            return int(number)
    except (TypeError, ValueError, OverflowError) as e:
        raise InvalidInputError(f"invalid value for {key}: {value!r}") from e
    return str(value).strip()


def resolve_values(defaults: dict, file_values: dict | None = None, overrides: dict | None = None) -> dict:
    """Merge the three layers; None in overrides means 'not given'"""
    file_values = file_values or {}
    overrides = overrides or {}
    unknown = set(file_values) - set(CONFIG_KEYS)
    if unknown:
        raise InvalidInputError(f"unknown config key(s): {', '.join(sorted(unknown))}")

    values = {key: _coerce(key, value) for key, value in {**DEFAULTS, **defaults}.items()}
    values.update({key: _coerce(key, value) for key, value in file_values.items()})
    values.update({key: _coerce(key, value) for key, value in overrides.items() if key in CONFIG_KEYS and value is not None})
    return values


def build_run_config(defaults: dict | None = None, file_values: dict | None = None, overrides: dict | None = None) -> RunConfig:
    """Build a validated RunConfig

    Parameters:
    defaults (dict): command-specific defaults layered over DEFAULTS
    file_values (dict): raw strings from a config file
    overrides (dict): explicit command-line values

    Returns:
    RunConfig: the resolved configuration
    """
    values = resolve_values(defaults or {}, file_values, overrides)
    params = FlowParameters(
        **{name: values[name] for name in PARAMETER_NAMES if name in values},
        energy_form=values["energy_form"],
    )
    solver_config = SolverConfig(
        tolerance=values["tolerance"],
        max_iterations=values["max_iterations"],
        damping=values["damping"],
        eta_max=values["eta_max"],
        n_nodes=values["n_nodes"],
    )
    shooting_config = ShootingConfig(
        eta_max=values["eta_max"],
        rel_tol=values["rel_tol"],
        newton_tol=values["newton_tol"],
        max_iterations=values["max_iterations"],
        n_nodes=values["n_nodes"],
    )
    config = RunConfig(
        base_name=values["base"].lower() if "," not in values["base"] else "custom",
        base=parse_fluid(values["base"]),
        particles=_parse_particles(values["particle"]),
        params=params,
        solver_config=solver_config,
        shooting_config=shooting_config,
        solver=values["solver"],
        out=values["out"],
        workers=values["workers"],
        resolved=values,
    )
    logger.debug("resolved configuration: %s", values)
    return config
