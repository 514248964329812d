# -*- coding: utf-8 -*-
"""
cli.py
AHSolve Command-Line Interface
=====================

This module defines the top-level CLI entrypoint. It dispatches to five subcommands:
- solve: continuity-path solve of one problem file
- sweep: quadratic-bound fit over target scales and grids
- check-subsolution: certify u̲ for a problem
- mms: manufactured-solution convergence ladder
- report: rebuild report.md from an output directory

Exit codes: 0 success, 1 config error, 2 non-certification, 3 path failure,
4 internal invariant violation.
"""

import argparse
import logging
import sys
import time
from pathlib import Path

# Allow running as a script: `python ahsolve/cli.py ...`
if __package__ in (None, "") and str(Path(__file__).resolve().parents[1]) not in sys.path:
    sys.path.append(str(Path(__file__).resolve().parents[1]))

from importlib.metadata import PackageNotFoundError, version

try:
    from ahsolve import __version__
except ImportError:
    __version__ = None

from ahsolve import pipeline
from ahsolve.config import Command, RunConfig
from ahsolve.errors import (
    ConfigError,
    InadmissibleError,
    NotSubsolutionError,
    PathFailureError,
    SolverError,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NOT_CERTIFIED = 2
EXIT_PATH_FAILURE = 3
EXIT_INTERNAL = 4

_RUNNERS = {
    Command.SOLVE: pipeline.run_solve,
    Command.SWEEP: pipeline.run_sweep,
    Command.CHECK_SUBSOLUTION: pipeline.run_check_subsolution,
    Command.MMS: pipeline.run_mms,
    Command.REPORT: pipeline.run_report,
}


def configure_logging(verbose: bool) -> None:
    """
    Configure root logger format and level.

    Args:
        verbose (bool): If True, set DEBUG level; otherwise INFO.
    """
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(name)s] %(levelname)s - %(message)s",
    )
    logger.debug("Logging configured, verbose=%s", verbose)


def _add_problem_args(parser: argparse.ArgumentParser, out_default: str) -> None:
    parser.add_argument("--config", required=True, help="Path to a JSON problem file")
    parser.add_argument("--out", default=out_default, help="Output directory")
    parser.add_argument("--grid", type=int, help="Points per axis (overrides grid.size)")
    parser.add_argument("--k", type=int, help="σ_k index (overrides operator.k)")
    parser.add_argument("--preset", choices=["flat", "perturbed_j"], help="Geometry preset")
    parser.add_argument("--amplitude", type=float, help="Perturbation amplitude of the preset")
    parser.add_argument("--tol", type=float, help="Newton residual tolerance")
    parser.add_argument("--seed", type=int, help="Seed for random initial guesses")


def build_parser() -> argparse.ArgumentParser:
    """
    Build the CLI parser with subcommands.

    Returns:
        argparse.ArgumentParser: Configured parser.
    """
    parser = argparse.ArgumentParser(prog="ahsolve", description="Almost Hermitian elliptic solver CLI")
    parser.add_argument("-v", "--verbose", action="store_true", help="Enable debug logging")

    pkg_version = __version__
    if pkg_version is None:
        try:
            pkg_version = version("ahsolve")
        except PackageNotFoundError:
            pkg_version = "0.0.0"

    parser.add_argument(
        "--version",
        action="version",
        version=f"ahsolve {pkg_version}",
    )

    subparsers = parser.add_subparsers(dest="cmd", required=True)

    p_solve = subparsers.add_parser("solve", help="Solve a problem along the continuity path")
    _add_problem_args(p_solve, "./solve_out")
    p_solve.set_defaults(func=handle_run)

    p_sweep = subparsers.add_parser("sweep", help="Fit the quadratic bound over scales and grids")
    _add_problem_args(p_sweep, "./sweep_out")
    p_sweep.set_defaults(func=handle_run)

    p_check = subparsers.add_parser("check-subsolution", help="Certify the subsolution of a problem")
    _add_problem_args(p_check, "./check_out")
    p_check.set_defaults(func=handle_run)

    p_mms = subparsers.add_parser("mms", help="Run a manufactured-solution convergence ladder")
    _add_problem_args(p_mms, "./mms_out")
    p_mms.set_defaults(func=handle_run)

    p_report = subparsers.add_parser("report", help="Rebuild report.md from a solve output directory")
    p_report.add_argument("--out", required=True, help="Existing solve output directory")
    p_report.set_defaults(func=handle_run)

    return parser


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    """
    Bundle parsed arguments into a RunConfig.

    Raises:
        ConfigError: Missing problem file or output directory.
    """
    overrides = {
        key: getattr(args, key, None)
        for key in ("grid", "k", "preset", "amplitude", "tol", "seed")
    }
    config_path = getattr(args, "config", None)
    return RunConfig(
        command=Command(args.cmd),
        problem_path=Path(config_path) if config_path else None,
        out_dir=Path(args.out),
        overrides={key: value for key, value in overrides.items() if value is not None},
    )


def handle_run(args: argparse.Namespace) -> int:
    """
    Handle every subcommand: build the RunConfig, run the pipeline, map errors.

    Args:
        args (argparse.Namespace): Parsed args.

    Returns:
        int: Exit code.
    """
    configure_logging(args.verbose)
    start = time.perf_counter()
    try:
        run = run_config_from_args(args)
        _RUNNERS[run.command](run)
        logger.info("%s completed in %.2f seconds", args.cmd, time.perf_counter() - start)
        return EXIT_OK
    except ConfigError as exc:
        logger.error("Configuration error: %s", exc)
        return EXIT_CONFIG
    except NotSubsolutionError as exc:
        logger.error("Not a C-subsolution at grid point %s: %s", exc.point, exc)
        return EXIT_NOT_CERTIFIED
    except InadmissibleError as exc:
        logger.error("Inadmissible at grid point %s: %s", exc.point, exc)
        return EXIT_NOT_CERTIFIED if args.cmd == Command.CHECK_SUBSOLUTION.value else EXIT_CONFIG
    except PathFailureError as exc:
        logger.error("Path failure after t=%.6g: %s", exc.last_t, exc)
        return EXIT_PATH_FAILURE
    except SolverError as exc:
        logger.error("Solver failure: %s", exc)
        return EXIT_PATH_FAILURE
    except Exception:
        logger.exception("%s failed with an internal error", args.cmd)
        return EXIT_INTERNAL


def main(argv=None) -> int:
    """
    Main entrypoint: parse args and dispatch.

    Returns:
        int: Exit code (0 for success, non-zero for failure).
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
