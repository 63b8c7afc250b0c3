"""Single-solve tools

Runs one solver from a chosen initial guess and optionally writes the trace
in the ensemble CSV schema (trial 0).
"""

import json
import logging
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
from numpy.random import PCG64, Generator, SeedSequence
from tabulate import tabulate

from rkl.engine.exceptions import ConfigValidationError, IterationError
from rkl.engine.experiments import load_matrix, write_traces_csv
from rkl.engine.matrix_io import read_vector
from rkl.engine.models import SolveConfig, SolverKind, Termination
from rkl.engine.solvers import solve

logger = logging.getLogger(__name__)


def resolve_vector(spec: str, n: int, name: str = "x0") -> np.ndarray:
    """'zeros', 'ones', 'rand:<seed>' (uniform(-1, 1), PCG64) or a vector file

    Raises:
        ConfigValidationError: malformed rand seed or missing file
    """
    if spec == "zeros":
        return np.zeros(n)
    if spec == "ones":
        return np.ones(n)
    if spec.startswith("rand:"):
        try:
            seed = int(spec.split(":", 1)[1])
        except ValueError:
            raise ConfigValidationError(
                f"Invalid seed in '{spec}'", field=name, value=spec, valid_values=["rand:<int>"]
            )
        return Generator(PCG64(SeedSequence(seed))).uniform(-1.0, 1.0, n)
    path = Path(spec)
    if not path.exists():
        raise ConfigValidationError(
            f"'{spec}' is neither a vector file nor zeros|ones|rand:<seed>",
            field=name,
            value=spec,
        )
    return read_vector(path)


def solve_impl(
    matrix: str,
    x0: str = "rand:0",
    b: str = "zeros",
    method: str = "gmres1",
    tol: float = 1e-30,
    max_iters: int = 1000,
    trace_path: Optional[Path] = None,
    format: str = "table",
) -> Tuple[str, Termination]:
    """Solve A x = b and report the termination and final rho_k

    Args:
        matrix: Builtin name or matrix file
        x0: Initial guess ('zeros', 'ones', 'rand:<seed>' or vector file)
        b: Right-hand side, same forms as x0
        method: gmres1, raa1 or stationary
        tol: Residual-norm stopping threshold
        max_iters: Maximum number of steps
        trace_path: Optional CSV output for the trace
        format: Output format ('table' or 'json')

    Returns:
        Tuple of (rendered summary, termination)

    Raises:
        Breakdown, Diverged: after writing the partial trace when requested
    """
    A = load_matrix(matrix)
    n = A.shape[0]
    x0_vec = resolve_vector(x0, n, "x0")
    b_vec = resolve_vector(b, n, "b")
    cfg = SolveConfig(tol=tol, max_iters=max_iters)

    try:
        _, trace = solve(SolverKind(method), A, b_vec, x0_vec, cfg)
    except IterationError as e:
        if trace_path is not None and e.trace is not None:
            write_traces_csv([e.trace], trace_path)
        raise

    if trace_path is not None:
        write_traces_csv([trace], trace_path)
        logger.info(f"Wrote trace to {trace_path}")

    summary = trace.to_summary()
    if format == "json":
        return json.dumps({"matrix": matrix, **summary}, indent=2), trace.termination

    rows = [
        ["Method", summary["method"]],
        ["Termination", summary["termination"]],
        ["Iterations", summary["iterations"]],
        ["||r_0||", f"{summary['initial_residual']:.6e}"],
        ["||r_k||", f"{summary['final_residual']:.6e}"],
        ["rho_k", "-" if summary["final_rho"] is None else f"{summary['final_rho']:.6f}"],
    ]
    return tabulate(rows, tablefmt="simple"), trace.termination
