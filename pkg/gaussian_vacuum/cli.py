"""
``gaussian-vacuum`` command line.

Exit status is 0 on success, 1 when a verification suite or a numerical
routine fails, and 2 for usage and configuration errors.
"""
import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Tuple

from django.conf import settings
from django.core.exceptions import ImproperlyConfigured
from django.test import override_settings

from . import __version__, corrections, get_serializer
from .energy import EnergyGrid, energy_surface, surface_table
from .exceptions import ConvergenceError
from .gap import phase_scan, selected_phase, solve_all, solve_generic
from .gap.scan import PARAMETERS
from .models import Branch, ModelParams, Theory
from .util import get_logger
from .verify import run_verification
from .wick import Polynomial

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

SOLUTION_COLUMNS = ("branch", "xi", "m_sq", "energy", "stability", "residual")

# flag destinations a config file may provide
CONFIG_KEYS = {
    "lambda": "lam",
    "sigma": "sigma",
    "m0sq": "m0_sq",
    "potential": "potential",
    "scan": "scan",
    "spacing": "spacing",
    "points": "points",
    "out": "out",
    "format": "format",
    "seed": "seed",
    "suite": "suite",
}

DEFAULTS = {
    "format": "json",
    "spacing": "linear",
    "points": None,
    "seed": None,
    "suite": [],
}


class UsageError(Exception):
    pass


def parse_config_file(path: str) -> Tuple[Dict[str, Any], Dict[str, Any]]:
    """
    Flat ``key = value`` file; ``#`` starts a comment. Upper-case
    ``GAUSSIAN_VACUUM_*`` keys are settings, other keys are flag defaults.
    Values are JSON when they parse as JSON and strings otherwise.
    """
    flags: Dict[str, Any] = {}
    overrides: Dict[str, Any] = {}
    try:
        with open(path) as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise ImproperlyConfigured(f"cannot read config file {path!r}: {e}")
    for number, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key:
            raise ImproperlyConfigured(f"{path}:{number}: expected 'key = value'")
        try:
            value = json.loads(raw)
        except ValueError:
            value = raw
        if key.startswith("GAUSSIAN_VACUUM_"):
            overrides[key] = value
        elif key in CONFIG_KEYS:
            flags[CONFIG_KEYS[key]] = value
        else:
            raise ImproperlyConfigured(f"{path}:{number}: unknown key {key!r}")
    return flags, overrides


def parse_scan(text: str) -> Tuple[str, float, float, int]:
    """``param:lo:hi:steps`` with ``param`` one of lambda, sigma, m0sq."""
    parts = str(text).split(":")
    if len(parts) != 4:
        raise UsageError(f"--scan expects param:lo:hi:steps, got {text!r}")
    name = {"lambda": "lam", "m0sq": "m0_sq"}.get(parts[0], parts[0])
    if name not in PARAMETERS:
        raise UsageError(f"cannot scan {parts[0]!r}; choose lambda, sigma or m0sq")
    try:
        return name, float(parts[1]), float(parts[2]), int(parts[3])
    except ValueError:
        raise UsageError(
            f"--scan bounds must be numbers and steps an integer: {text!r}"
        )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value configuration file")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument(
        "--format", choices=("json", "csv"), help="report format (json)"
    )
    common.add_argument("--verbose", "-v", action="count", default=0)

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--lambda", dest="lam", type=float, help="quartic coupling")
    model.add_argument("--sigma", type=float, help="quadratic coupling")
    model.add_argument(
        "--m0sq", dest="m0_sq", type=float, help="Wick-ordering mass squared"
    )
    model.add_argument(
        "--potential",
        help="JSON coefficient list of a generic potential, lowest order first",
    )

    parser = argparse.ArgumentParser(
        prog="gaussian-vacuum",
        description=(
            "Gaussian approximation of (1+1)-dimensional scalar field theories."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    sub.add_parser(
        "gap-solve", parents=[common, model], help="all gap solutions, ranked by energy"
    )
    scan = sub.add_parser(
        "phase-scan",
        parents=[common, model],
        help="scan one parameter across the phases",
    )
    scan.add_argument("--scan", help="param:lo:hi:steps")
    scan.add_argument("--spacing", choices=("linear", "geometric"))
    surface = sub.add_parser(
        "energy-surface", parents=[common, model], help="tabulate the vacuum energy"
    )
    surface.add_argument("--points", type=int, help="grid points per axis")
    sub.add_parser(
        "corrections", parents=[common, model], help="large-xi correction integrals"
    )
    verify = sub.add_parser(
        "verify", parents=[common], help="run the verification suites"
    )
    verify.add_argument("--seed", type=int, help="seed of every random draw")
    verify.add_argument(
        "--suite", action="append", help="run only this suite (repeatable)"
    )
    return parser


def resolve(args: argparse.Namespace, flags: Dict[str, Any]) -> argparse.Namespace:
    """Flags beat the config file, which beats the built-in defaults."""
    for key, value in {**DEFAULTS, **flags}.items():
        if getattr(args, key, None) in (None, []):
            setattr(args, key, value)
    if isinstance(args.suite, str):
        args.suite = [args.suite]
    return args


def model_from_args(args: argparse.Namespace, required: bool = True) -> Optional[Any]:
    if args.potential is not None:
        if args.m0_sq is None:
            raise UsageError("--potential needs --m0sq")
        potential = args.potential
        if not isinstance(potential, str):
            potential = json.dumps(potential)
        return Theory(Polynomial.from_json(potential), float(args.m0_sq))
    given = [v is not None for v in (args.lam, args.sigma, args.m0_sq)]
    if not any(given) and not required:
        return None
    if not all(given):
        raise UsageError("give --lambda, --sigma and --m0sq, or --potential and --m0sq")
    return ModelParams(float(args.lam), float(args.sigma), float(args.m0_sq))


def _solutions_table(solutions: List[Any]) -> Dict[str, Any]:
    return {
        "columns": list(SOLUTION_COLUMNS),
        "rows": [
            [s.branch.value, s.xi, s.m_sq, s.energy, s.stability.value, s.residual]
            for s in solutions
        ],
    }


def cmd_gap_solve(args: argparse.Namespace) -> Tuple[Dict[str, Any], Any, int]:
    model = model_from_args(args)
    solutions = solve_all(model)
    selected = selected_phase(solutions)
    report: Dict[str, Any] = {
        "model": model.to_dict(),
        "solutions": [s.to_dict() for s in solutions],
        "selected_phase": selected.to_dict() if selected else None,
    }
    if isinstance(model, ModelParams):
        generic = solve_generic(model)
        report["generic_check"] = {
            **generic.report(),
            "solutions": [s.to_dict() for s in generic],
        }
    if not solutions:
        logger.warning("no gap solution for %r", model)
    return report, _solutions_table(solutions), EXIT_OK


def cmd_phase_scan(args: argparse.Namespace) -> Tuple[Dict[str, Any], Any, int]:
    if args.scan is None:
        raise UsageError("phase-scan needs --scan param:lo:hi:steps")
    parameter, lo, hi, steps = parse_scan(args.scan)
    base = dict(lam=args.lam, sigma=args.sigma, m0_sq=args.m0_sq)
    base[parameter] = lo
    if any(v is None for v in base.values()):
        raise UsageError("give the two parameters that are not scanned")
    result = phase_scan(
        ModelParams(**base), parameter, lo, hi, steps, spacing=args.spacing
    )
    return result.to_dict(), result.table(), EXIT_OK


def cmd_energy_surface(args: argparse.Namespace) -> Tuple[Dict[str, Any], Any, int]:
    model = model_from_args(args)
    overrides = {"points": int(args.points)} if args.points else {}
    points = energy_surface(model, EnergyGrid.from_settings(**overrides))
    table = surface_table(points)
    report = {
        "model": model.to_dict(),
        **table,
        "units": {"xi": "dimensionless", "m_sq": "mass^2", "epsilon": "mass^2"},
    }
    return report, table, EXIT_OK


def cmd_corrections(args: argparse.Namespace) -> Tuple[Dict[str, Any], Any, int]:
    model = model_from_args(args, required=False)
    m_sq = 1.0
    extra: Dict[str, Any] = {}
    if isinstance(model, ModelParams):
        broken = [
            s
            for s in solve_all(model)
            if s.branch is not Branch.SYMMETRIC and s.xi > 0
        ]
        if broken:
            sol = max(broken, key=lambda s: s.xi)
            m_sq = sol.m_sq
            extra["solution"] = sol.to_dict()
            extra["rescaled"] = corrections.rescale_to_unit_mass(sol, model).to_dict()
            extra["reordered_interaction"] = list(
                corrections.reordered_interaction(sol, model).coeffs
            )
        else:
            logger.info(
                "no broken solution for %r; reporting unit-mass integrals", model
            )
    elif model is not None:
        raise UsageError(
            "corrections apply to the lambda phi^4 + sigma phi^2 model only"
        )
    result = corrections.correction_report(m_sq=m_sq)
    report = {**result.to_dict(), **extra}
    table = {
        "columns": ["r", "Q"],
        "rows": [[r, q] for r, q in result.twopoint_kernel],
    }
    return report, table, EXIT_OK


def cmd_verify(args: argparse.Namespace) -> Tuple[Dict[str, Any], Any, int]:
    result = run_verification(args.suite or None, args.seed)
    report = result.to_dict()
    table = {
        "columns": ["suite", "check", "passed"],
        "rows": [
            [suite.name, check["name"], check["passed"]]
            for suite in result.suites
            for check in suite.checks
        ],
    }
    return report, table, EXIT_OK if result.passed else EXIT_FAILURE


COMMANDS = {
    "gap-solve": cmd_gap_solve,
    "phase-scan": cmd_phase_scan,
    "energy-surface": cmd_energy_surface,
    "corrections": cmd_corrections,
    "verify": cmd_verify,
}


def emit(args: argparse.Namespace, report: Dict[str, Any], table: Any) -> None:
    serializer = get_serializer(args.format)
    data = serializer.dumps(table if args.format == "csv" else report)
    if args.out:
        with open(args.out, "wb") as f:
            f.write(data)
    else:
        sys.stdout.write(data.decode())


def _configure_logging(verbosity: int) -> None:
    if verbosity:
        level = logging.INFO if verbosity == 1 else logging.DEBUG
        logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    _configure_logging(args.verbose)
    try:
        flags, overrides = parse_config_file(args.config) if args.config else ({}, {})
        args = resolve(args, flags)
        if not settings.configured:
            settings.configure()
        with override_settings(**overrides):
            report, table, status = COMMANDS[args.command](args)
            emit(args, report, table)
    except (UsageError, ImproperlyConfigured, ValueError) as e:
        # DomainError and RejectedSolution are ValueErrors
        sys.stderr.write(f"gaussian-vacuum {args.command}: {e}\n")
        return EXIT_USAGE
    except ConvergenceError as e:
        sys.stderr.write(f"gaussian-vacuum {args.command}: {e}\n")
        return EXIT_FAILURE
    return status


if __name__ == "__main__":
    sys.exit(main())
