"""Command-line entry point: cntflow <command> [options]

Exit codes: 0 success, 1 validation or mesh-study mismatch,
2 numerical non-convergence, 3 invalid input.
"""

import argparse
import logging
import sys

from components.model import ENERGY_FORMS, PARAMETER_NAMES
from routes.mesh_study import MESH_STUDY_DEFAULTS, cmd_mesh_study
from routes.profiles import cmd_profiles
from routes.run_config import PROFILE_BASELINE, SOLVERS, TABLE_BASELINE, build_run_config
from routes.solve import cmd_solve
from routes.sweep import PRESETS, SweepSpec, cmd_sweep
from routes.validate import cmd_validate
from utils.errors import (
    DegenerateCoefficientError,
    IntegrationBlowUpError,
    InvalidInputError,
    NonConvergenceError,
    SolverFailureError,
)
from utils.helpers import configure_logging, load_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_NONCONVERGENCE = 2
EXIT_INVALID = 3


class _ArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; invalid input maps to 3 here"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _flag(name: str) -> list[str]:
    dashed = "--" + name.replace("_", "-")
    return [dashed] if dashed == "--" + name else [dashed, "--" + name]


def _solver_options() -> argparse.ArgumentParser:
    parser = _ArgumentParser(add_help=False)
    group = parser.add_argument_group("solver")
    group.add_argument("--config", help="key = value file; explicit flags override it")
    group.add_argument("--solver", choices=SOLVERS)
    group.add_argument(*_flag("eta_max"), dest="eta_max", type=float)
    group.add_argument(*_flag("n_nodes"), dest="n_nodes", type=int)
    group.add_argument(*_flag("max_iterations"), dest="max_iterations", type=int)
    group.add_argument("--damping", type=float)
    group.add_argument(*_flag("rel_tol"), dest="rel_tol", type=float)
    group.add_argument(*_flag("newton_tol"), dest="newton_tol", type=float)
    group.add_argument("--out")
    return parser


def _flow_options() -> argparse.ArgumentParser:
    parser = _ArgumentParser(add_help=False)
    group = parser.add_argument_group("flow")
    for name in PARAMETER_NAMES:
        group.add_argument(*_flag(name), dest=name, type=float)
    group.add_argument(*_flag("energy_form"), dest="energy_form", choices=ENERGY_FORMS)
    group.add_argument("--base", help="catalog name or density,specific_heat,conductivity")
    group.add_argument("--particle", help="swcnt, mwcnt, both or a custom triple")
    group.add_argument("--tolerance", type=float, help="Newton correction tolerance")
    return parser


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="cntflow", description=__doc__.splitlines()[0])
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    solver, flow = _solver_options(), _flow_options()
    commands.add_parser("solve", parents=[solver, flow], help="solve one case and write its profile")

    validate = commands.add_parser("validate", parents=[solver], help="clean-case regression")
    validate.add_argument("--tolerance", type=float, help="override every comparison tolerance")

    sweep = commands.add_parser("sweep", parents=[solver, flow], help="one-at-a-time parameter sweep")
    sweep.add_argument("--preset", choices=sorted(PRESETS))
    sweep.add_argument("--vary", action="append", default=[], metavar="NAME=V1,V2,...")
    sweep.add_argument("--workers", type=int)

    commands.add_parser("mesh-study", parents=[solver, flow], help="observed order of accuracy")

    profiles = commands.add_parser("profiles", parents=[solver, flow], help="f' and theta profiles for one parameter")
    profiles.add_argument("--param", required=True, choices=PARAMETER_NAMES)
    profiles.add_argument("--values", required=True, help="comma separated values")
    profiles.add_argument("--stride", type=int, default=10, help="keep every n-th node")
    return parser


def _run_config(args, defaults):
    file_values = load_config(args.config) if getattr(args, "config", None) else {}
    overrides = {key: value for key, value in vars(args).items() if key not in ("command", "config")}
    return build_run_config(defaults, file_values, overrides)


def dispatch(args) -> int:
    if args.command == "solve":
        return cmd_solve(_run_config(args, {}))

    if args.command == "validate":
        tolerance = args.tolerance
        args.tolerance = None
        config = _run_config(args, {"solver": "both"})
        return cmd_validate(config, tolerance=tolerance, out=args.out)

    if args.command == "sweep":
        if not args.preset and not args.vary:
            raise InvalidInputError("sweep needs --preset or at least one --vary NAME=V1,V2,...")
        spec = SweepSpec.from_preset(args.preset) if args.preset else SweepSpec.parse(args.vary)
        if args.preset and args.vary:
            spec = SweepSpec(spec.entries + SweepSpec.parse(args.vary).entries)
        config = _run_config(args, {**TABLE_BASELINE, "out": "sweep.csv"})
        return cmd_sweep(spec, config)

    if args.command == "mesh-study":
        return cmd_mesh_study(_run_config(args, MESH_STUDY_DEFAULTS), out=args.out)

    if args.command == "profiles":
        spec = SweepSpec.parse([f"{args.param}={args.values}"])
        config = _run_config(args, {**PROFILE_BASELINE, "out": "profiles.csv"})
        return cmd_profiles(spec, config, stride=args.stride)

    raise InvalidInputError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(1 if args.verbose else -1 if args.quiet else 0)
    try:
        return dispatch(args)
    except (InvalidInputError, DegenerateCoefficientError) as e:
        logger.error("invalid input: %s", e)
        return EXIT_INVALID
    except (NonConvergenceError, SolverFailureError, IntegrationBlowUpError) as e:
        logger.error("no convergence: %s", e)
        return EXIT_NONCONVERGENCE
    except OSError as e:
        logger.error("cannot write output: %s", e)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
