#!/usr/bin/env python3
"""Console script entry point for the rkl package

Subcommands predict, solve, measure, eigpair, counterexample and figure. The
CLI loads environment variables from a .env file, configures logging, then
dispatches to the matching *_impl function. Errors are printed on stderr as
JSON error responses.

Exit status: 0 success, 2 usage/parse/validation error, 3 numerical failure
(Breakdown, Diverged, ...), 1 unexpected internal error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, List, Optional

from dotenv import load_dotenv

from rkl.engine.error_utils import from_exception, internal_error
from rkl.engine.exceptions import ConfigValidationError, RKLError
from rkl.engine.settings import RuntimeSettings, configure_logging, load_settings

logger = logging.getLogger(__name__)


def _index_list(text: str) -> List[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def _index_pair(text: str) -> List[int]:
    values = _index_list(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"expected 'i,j', got '{text}'")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rkl",
        description="Root-convergence factors of GMRES(1) and rAA(1)",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Worst-case factor of a builtin matrix
  rkl predict --matrix A2

  # Restrict to eigenvalue groups 1..3 (0-based, ascending eigenvalues)
  rkl predict --matrix A3 --restrict 1,2,3

  # One GMRES(1) run with a trace
  rkl solve --matrix A1 --x0 rand:7 --method gmres1 --trace results/a1.csv

  # Ensemble from a key=value config
  rkl measure --config ensemble.cfg --out results

  # Nonlinear eigenpair of Upsilon on eigenvalue groups 0 and 2
  rkl eigpair --matrix A1 --map upsilon --pair 0,2

  # Exact rAA(1) counterexamples
  rkl counterexample --case all --exact-print

  # Reproduce a figure (CSV + SVG, optional PNG)
  rkl figure --name fig1 --out results --trials 200 --seed 1

Builtin matrices: A1, A2, A3, A4, CA1, CA2, CA3, I

Environment variables (.env file):
  RKL_THREADS     Worker threads for ensembles (default: 1)
  RKL_LOG_LEVEL   Logging level (default: WARNING)
  RKL_OUTPUT_DIR  Default output directory (default: results)
        """,
    )
    parser.add_argument(
        "--log-level",
        type=str.upper,
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Logging level (default: from .env or WARNING)",
    )
    parser.add_argument(
        "--env-file", type=Path, help="Path to .env file (default: .env in current directory)"
    )
    parser.add_argument(
        "--format", choices=["table", "json"], default="table", help="Output format (default: table)"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {_get_version()}")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="Worst-case convergence factors")
    p.add_argument("--matrix", required=True, help="Builtin name or matrix file")
    p.add_argument(
        "--restrict",
        type=_index_list,
        help="Eigenvalue-group indices (symmetric A) or Schur-block indices (skew M)",
    )

    p = sub.add_parser("solve", help="Run one solver")
    p.add_argument("--matrix", required=True, help="Builtin name or matrix file")
    p.add_argument("--x0", default="rand:0", help="zeros | ones | rand:<seed> | vector file")
    p.add_argument("--b", default="zeros", help="Right-hand side, same forms as --x0")
    p.add_argument("--method", choices=["gmres1", "raa1", "stationary"], default="gmres1")
    p.add_argument("--tol", type=float, default=1e-30, help="Residual-norm threshold")
    p.add_argument("--max-iters", type=int, default=1000, help="Maximum number of steps")
    p.add_argument("--trace", type=Path, help="Write the trace CSV here")

    p = sub.add_parser("measure", help="Run an ensemble from a config file")
    p.add_argument("--config", type=Path, required=True, help="key=value ensemble config")
    p.add_argument("--out", type=Path, help="Output directory (default: RKL_OUTPUT_DIR)")

    p = sub.add_parser("eigpair", help="Construct and verify a nonlinear eigenpair")
    p.add_argument("--matrix", required=True, help="Builtin name or matrix file (symmetric)")
    p.add_argument("--map", choices=["i2", "pi", "psi", "upsilon"], required=True)
    p.add_argument("--pair", type=_index_pair, required=True, help="Eigenvalue groups 'i,j'")
    p.add_argument("--eps", default="auto", help="c_j / c_i, or 'auto' (default)")
    p.add_argument("--spread", action="store_true", help="Spread modes over whole eigenspaces")
    p.add_argument("--seed", type=int, default=0, help="Seed for --spread")

    p = sub.add_parser("counterexample", help="Exact rAA(1) conjecture counterexamples")
    p.add_argument("--case", default="all", help="1 | 2 | 3 | all")
    p.add_argument("--exact-print", action="store_true", help="Print exact rationals")
    p.add_argument("--matrix", type=Path, help="Custom rational diagonal matrix file")
    p.add_argument("--vector", type=Path, help="Custom rational vector file")

    p = sub.add_parser("figure", help="Reproduce a convergence figure")
    p.add_argument("--name", required=True, help="fig1 | fig2 | fig3 | fig4")
    p.add_argument("--out", type=Path, help="Output directory (default: RKL_OUTPUT_DIR)")
    p.add_argument("--trials", type=int, default=1000, help="Trials per ensemble panel")
    p.add_argument("--seed", type=int, default=0, help="Ensemble seed")
    p.add_argument("--png", action="store_true", help="Also write PNG (requires cairosvg)")
    return parser


def _predict(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    from rkl.engine.tools.predict_tools import predict_impl

    print(predict_impl(args.matrix, args.restrict, format=args.format))
    return 0


def _solve(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    from rkl.engine.tools.solve_tools import solve_impl

    text, termination = solve_impl(
        args.matrix,
        x0=args.x0,
        b=args.b,
        method=args.method,
        tol=args.tol,
        max_iters=args.max_iters,
        trace_path=args.trace,
        format=args.format,
    )
    print(text)
    logger.debug(f"solve finished: {termination.value}")
    return 0


def _measure(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    from rkl.engine.tools.measure_tools import measure_impl

    out = args.out or settings.output_dir
    print(measure_impl(args.config, out, threads=settings.threads, format=args.format))
    return 0


def _eigpair(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    from rkl.engine.tools.eigpair_tools import eigpair_impl

    i1, i2 = args.pair
    print(
        eigpair_impl(
            args.matrix,
            args.map,
            i1,
            i2,
            eps=args.eps,
            spread=args.spread,
            seed=args.seed,
            format=args.format,
        )
    )
    return 0


def _counterexample(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    from rkl.engine.tools.counterexample_tools import counterexample_impl

    text, all_violated = counterexample_impl(
        args.case,
        exact_print=args.exact_print,
        matrix_path=args.matrix,
        vector_path=args.vector,
        format=args.format,
    )
    print(text)
    return 0 if all_violated else 3


def _figure(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    from rkl.engine.tools.figure_tools import figure_impl

    if args.trials < 1:
        raise ConfigValidationError("--trials must be >= 1", field="trials", value=args.trials)
    out = args.out or settings.output_dir
    print(
        figure_impl(
            args.name,
            out,
            trials=args.trials,
            seed=args.seed,
            threads=settings.threads,
            png=args.png,
            format=args.format,
        )
    )
    return 0


COMMANDS: dict[str, Callable[[argparse.Namespace, RuntimeSettings], int]] = {
    "predict": _predict,
    "solve": _solve,
    "measure": _measure,
    "eigpair": _eigpair,
    "counterexample": _counterexample,
    "figure": _figure,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the rkl CLI

    Loads configuration from the .env file and the environment, then runs
    the selected subcommand.
    """
    parser = build_parser()
    args = parser.parse_args(argv)

    # Load .env file
    if args.env_file:
        if args.env_file.exists():
            load_dotenv(args.env_file)
        else:
            print(f"Error: .env file not found: {args.env_file}", file=sys.stderr)
            return 2
    else:
        env_file = Path.cwd() / ".env"
        if env_file.exists():
            load_dotenv(env_file)

    try:
        settings = load_settings()
        if args.log_level:
            settings = settings.model_copy(update={"log_level": args.log_level})
        configure_logging(settings.log_level)
        return COMMANDS[args.command](args, settings)
    except RKLError as e:
        logger.debug(f"{args.command} failed: {e}")
        print(from_exception(e), file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected failure in {args.command}")
        print(internal_error(e, args.command), file=sys.stderr)
        return 1


def _get_version() -> str:
    """Get package version from __init__.py"""
    try:
        from rkl import __version__

        return __version__
    except ImportError:
        return "unknown"


if __name__ == "__main__":
    sys.exit(main())
