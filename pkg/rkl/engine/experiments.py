"""Random-ensemble and structured-initial-guess experiments

An ensemble runs one solver from many random initial guesses (b = 0, so
r_0 = A x_0) and compares every rho_k curve against the predicted worst-case
factor. Trial i draws x_0 from its own PCG64 stream seeded by (seed, i), so
results do not depend on the thread count.
"""

import csv
import hashlib
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.random import PCG64, Generator, SeedSequence
from pydantic import BaseModel, ConfigDict, ValidationError

from rkl.engine.exact import RationalMatrix
from rkl.engine.exact import builtin_rational as _exact_builtin
from rkl.engine.error_utils import get_version
from rkl.engine.exceptions import (
    BlockIndexError,
    ConfigValidationError,
    IterationError,
    UnknownMatrix,
    UnsupportedStructure,
)
from rkl.engine.linalg import (
    as_matrix,
    as_vector,
    is_skew_symmetric,
    is_symmetric,
    iteration_matrix,
    matvec,
)
from rkl.engine.matrix_io import read_matrix
from rkl.engine.models import (
    EnsembleConfig,
    EnsembleResult,
    IterationTrace,
    SolveConfig,
    SolverKind,
    StructuredRunResult,
)
from rkl.engine.solvers import solve
from rkl.engine.spectral import (
    SchurBlocks,
    eig_symmetric,
    project_onto_blocks,
    schur_skew,
)
from rkl.engine.theory import (
    lambda_star_raa1,
    predict_two_mode,
    restricted_worst_case,
    skew_factor,
    worst_case_gmres1,
    worst_case_skew,
)

logger = logging.getLogger(__name__)

CSV_HEADER = ["trial", "k", "residual_norm", "rho_k", "alpha_k", "termination"]
ACTIVE_RTOL = 1e-12

# Skew part of A4, entries are eighths
_A4_SKEW_EIGHTHS = [
    [0, 1, 0, -5, 0, 0, 0, 2],
    [-1, 0, 0, 0, 5, 0, -2, 0],
    [0, 0, 0, 0, -2, -1, 5, 0],
    [5, 0, 0, 0, -1, -2, 0, 0],
    [0, -5, 2, 1, 0, 0, 0, 0],
    [0, 0, 1, 2, 0, 0, 0, -5],
    [0, 2, -5, 0, 0, 0, 0, 1],
    [-2, 0, 0, 0, 0, 5, -1, 0],
]


def _a4() -> np.ndarray:
    return np.eye(8) - np.array(_A4_SKEW_EIGHTHS, dtype=np.float64) / 8.0


def _from_rational(name: str) -> Callable[[], np.ndarray]:
    def build() -> np.ndarray:
        return np.array([[float(q) for q in row] for row in _exact_builtin(name)])

    return build


BUILTINS: Dict[str, Callable[[], np.ndarray]] = {
    "A1": lambda: np.diag([1.0, 2.0, 3.0]),
    "A2": lambda: np.diag([1 / 2, 1 / 4, 1 / 8, 1 / 16, 1 / 32]),
    "A3": lambda: np.diag([-1.0, 2.0, 3.0, 4.0]),
    "A4": _a4,
    "CA1": _from_rational("CA1"),
    "CA2": _from_rational("CA2"),
    "CA3": _from_rational("CA3"),
    "I": lambda: np.eye(2),
}


def builtin_matrix(name: str) -> np.ndarray:
    """Named test matrix as a read-only float array

    Raises:
        UnknownMatrix: name is not a builtin
    """
    key = name.upper()
    if key not in BUILTINS:
        raise UnknownMatrix(name, sorted(BUILTINS))
    return as_matrix(BUILTINS[key](), name=key)


def builtin_rational(name: str) -> RationalMatrix:
    """Exact form of CA1..CA3

    Raises:
        UnknownMatrix: no exact form exists for name
    """
    try:
        return _exact_builtin(name)
    except UnsupportedStructure:
        raise UnknownMatrix(name, ["CA1", "CA2", "CA3"])


def load_matrix(name_or_path: str) -> np.ndarray:
    """Builtin by name, otherwise a matrix text file"""
    if name_or_path.upper() in BUILTINS:
        return builtin_matrix(name_or_path)
    path = Path(name_or_path)
    if not path.exists():
        raise UnknownMatrix(name_or_path, sorted(BUILTINS))
    return read_matrix(path)


# ===== Predictions =====


def _active_groups(A: np.ndarray, mask: Sequence[int]) -> Optional[List[int]]:
    """Eigenvalue groups an x_0 vanishing on mask can still reach"""
    if not mask:
        return None
    spec = eig_symmetric(A)
    free = [i for i in range(A.shape[0]) if i not in set(mask)]
    active = []
    for g in range(spec.p):
        rows = spec.group_columns(g)[free, :]
        if np.linalg.norm(rows) > ACTIVE_RTOL:
            active.append(g)
    return active


def theoretical_rho(cfg: EnsembleConfig, A: Optional[np.ndarray] = None) -> Tuple[float, bool]:
    """(factor drawn as the dashed line, whether it is a proven bound)

    GMRES(1): the worst-case factor, restricted to the eigenvalue groups or
    Schur blocks the initial guesses can reach. rAA(1): (Lambda*)^(1/4) or
    the skew comparator, which are not bounds. Stationary: the spectral
    radius of M.

    Raises:
        UnsupportedStructure: A is neither symmetric nor I - skew
    """
    A = load_matrix(cfg.matrix) if A is None else A
    M = iteration_matrix(A)
    if is_symmetric(A):
        spec = eig_symmetric(A)
        if cfg.solver is SolverKind.STATIONARY:
            radius = max(abs(1.0 - a) for a in spec.distinct_eigenvalues)
            return radius, radius < 1.0
        if cfg.solver is SolverKind.RAA1:
            return lambda_star_raa1(spec) ** 0.25, False
        active = _active_groups(A, cfg.mask)
        report = (
            restricted_worst_case(spec, active) if active else worst_case_gmres1(spec)
        )
        return report.worst_case_rho, report.worst_case_rho < 1.0
    if is_skew_symmetric(M):
        blocks = schur_skew(M)
        report = worst_case_skew(blocks, cfg.block_init or None)
        if cfg.solver is SolverKind.STATIONARY:
            return report.m_star_upper, report.m_star_upper < 1.0
        if cfg.solver is SolverKind.RAA1:
            return report.rho_star_raa1, False
        rho = report.subset_rho if report.subset_rho is not None else report.rho_star
        return rho, True
    raise UnsupportedStructure("theoretical_rho", "A must be symmetric or I - skew")


# ===== Runs =====


def _validate_indices(cfg: EnsembleConfig, A: np.ndarray) -> Optional[SchurBlocks]:
    n = A.shape[0]
    for i in cfg.mask:
        if i >= n:
            raise BlockIndexError(i, n, kind="component")
    if not cfg.block_init:
        return None
    M = iteration_matrix(A)
    if not is_skew_symmetric(M):
        raise UnsupportedStructure("block_init", "needs a skew-symmetric I - A")
    blocks = schur_skew(M)
    for j in cfg.block_init:
        if j >= blocks.count:
            raise BlockIndexError(j, blocks.count)
    return blocks


def trial_initial_guess(
    seed: int,
    trial: int,
    n: int,
    mask: Sequence[int] = (),
    blocks: Optional[SchurBlocks] = None,
    block_init: Sequence[int] = (),
) -> np.ndarray:
    """x_0 of one trial: uniform(-1, 1) entries from the (seed, trial) stream"""
    rng = Generator(PCG64(SeedSequence([seed, trial])))
    x0 = rng.uniform(-1.0, 1.0, n)
    if mask:
        x0[list(mask)] = 0.0
    if blocks is not None and block_init:
        x0 = project_onto_blocks(blocks, block_init, x0)
    return x0


def _run_trial(method: SolverKind, A: np.ndarray, x0: np.ndarray, cfg: SolveConfig) -> IterationTrace:
    try:
        _, trace = solve(method, A, np.zeros(A.shape[0]), x0, cfg)
        return trace
    except IterationError as e:
        if e.trace is None:
            raise
        logger.warning(f"Trial ended early: {e}")
        return e.trace


def _tail_max(trace: IterationTrace, cutoff: int) -> float:
    if trace.iterations < cutoff:
        return 0.0
    return max(trace.normalized_rho(k) for k in range(cutoff, trace.iterations + 1))


def run_ensemble(cfg: EnsembleConfig, threads: Optional[int] = None) -> EnsembleResult:
    """Run cfg.trials random initial guesses and check them against the prediction

    Breakdowns and divergence end a trial but not the run. Bound checks use
    (||r_k|| / ||r_0||)^(1/k) for k >= cfg.transient_cutoff.
    """
    A = load_matrix(cfg.matrix)
    blocks = _validate_indices(cfg, A)
    rho, bounded = theoretical_rho(cfg, A)
    solve_cfg = SolveConfig(tol=cfg.tol, max_iters=cfg.max_iters)
    n = A.shape[0]

    def one(trial: int) -> IterationTrace:
        x0 = trial_initial_guess(cfg.seed, trial, n, cfg.mask, blocks, cfg.block_init)
        return _run_trial(cfg.solver, A, x0, solve_cfg)

    requested = [t for t in (cfg.threads, threads) if t]
    workers = min(requested) if requested else 1
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(one, range(cfg.trials)))
    else:
        traces = [one(t) for t in range(cfg.trials)]

    tails = [_tail_max(t, cfg.transient_cutoff) for t in traces]
    violations = sum(1 for t in tails if bounded and t > rho + cfg.bound_slack)
    if violations:
        logger.warning(f"{cfg.matrix}: {violations} trials exceed rho* = {rho:.6g}")
    logger.info(
        f"{cfg.matrix}/{cfg.solver.value}: {cfg.trials} trials, rho* = {rho:.6g}, "
        f"max tail = {max(tails, default=0.0):.6g}"
    )
    return EnsembleResult(
        config=cfg,
        theoretical_rho=rho,
        max_observed_rho_tail=max(tails, default=0.0),
        traces=traces,
        bounded=bounded,
        bound_violations=violations,
    )


def measured_tail(trace: IterationTrace) -> float:
    """Geometric mean of the last two step ratios

    Two-mode residuals alternate between two directions, so single step
    ratios oscillate around the factor while their two-step mean does not.
    """
    norms = trace.residual_norms
    if norms[-1] == 0.0:
        return 0.0
    if len(norms) < 3:
        return norms[-1] / norms[0] if len(norms) == 2 else 0.0
    return math.sqrt(norms[-1] / norms[-3])


def _predicted(A: np.ndarray, r0: np.ndarray) -> float:
    if is_symmetric(A):
        return predict_two_mode(eig_symmetric(A), r0)
    M = iteration_matrix(A)
    if is_skew_symmetric(M):
        blocks = schur_skew(M)
        scale = max(float(np.linalg.norm(r0)), 1e-300)
        reached = [
            blocks.moduli[j]
            for j in range(blocks.count)
            if np.linalg.norm(blocks.columns(j).T @ r0) > ACTIVE_RTOL * scale
        ]
        return skew_factor(max(reached)) if reached else 0.0
    raise UnsupportedStructure("run_structured", "A must be symmetric or I - skew")


def run_structured(
    matrix: str | np.ndarray,
    x0: Sequence[float] | np.ndarray,
    tol: float = 1e-30,
    max_iters: int = 2000,
    solver: SolverKind = SolverKind.GMRES1,
) -> StructuredRunResult:
    """One run from a chosen x_0 (b = 0) next to the factor predicted for it"""
    A = load_matrix(matrix) if isinstance(matrix, str) else as_matrix(matrix)
    x0 = as_vector(x0, name="x0")
    r0 = matvec(A, x0)
    trace = _run_trial(solver, A, x0, SolveConfig(tol=tol, max_iters=max_iters))
    predicted = _predicted(A, r0)
    measured = measured_tail(trace)
    logger.info(f"structured run: predicted {predicted:.6g}, measured {measured:.6g}")
    return StructuredRunResult(trace=trace, predicted_rho=predicted, measured_tail=measured)


# ===== Output =====


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.17g}"


def write_traces_csv(traces: Sequence[IterationTrace], path: Path) -> Path:
    """One row per (trial, k); alpha_k is the step size applied to r_k"""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for trial, trace in enumerate(traces):
            for k, norm in enumerate(trace.residual_norms):
                rho_k = trace.rho_series[k - 1] if k >= 1 else None
                alpha_k = trace.alphas[k] if k < len(trace.alphas) else None
                writer.writerow(
                    [trial, k, _fmt(norm), _fmt(rho_k), _fmt(alpha_k), trace.termination.value]
                )
    logger.info(f"Wrote {path}")
    return path


def write_ensemble_csv(result: EnsembleResult, path: Path) -> Path:
    return write_traces_csv(result.traces, path)


def input_hash(cfg: EnsembleConfig, A: np.ndarray) -> str:
    """sha256 of the canonical JSON of the config and the matrix entries"""
    payload = {
        "config": cfg.model_dump(mode="json", exclude={"threads"}),
        "matrix": [[float(x).hex() for x in row] for row in np.asarray(A)],
    }
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def write_metadata(result: EnsembleResult, path: Path, extra: Optional[Dict] = None) -> Path:
    """JSON sidecar: config echo, prediction, summary and input hash"""
    A = load_matrix(result.config.matrix)
    counts: Dict[str, int] = {}
    for term in result.terminations:
        counts[term.value] = counts.get(term.value, 0) + 1
    meta = {
        "config": result.config.model_dump(mode="json"),
        "theoretical_rho": result.theoretical_rho,
        "bounded": result.bounded,
        "max_observed_rho_tail": result.max_observed_rho_tail,
        "bound_violations": result.bound_violations,
        "terminations": counts,
        "input_sha256": input_hash(result.config, A),
        "rng": "numpy PCG64, SeedSequence([seed, trial])",
        "tool_version": get_version(),
    }
    if extra:
        meta.update(extra)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_config(path: Path) -> EnsembleConfig:
    """Flat key=value file into EnsembleConfig

    '#' starts a comment line, blank lines are skipped, mask and block_init
    take comma-separated indices.

    Raises:
        ConfigValidationError: unknown key, malformed line or invalid value
    """
    fields = set(EnsembleConfig.model_fields)
    values: Dict[str, object] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigValidationError(f"{path}:{lineno}: expected key=value", field="line", value=line)
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in fields:
            raise ConfigValidationError(
                f"{path}:{lineno}: unknown key '{key}'",
                field=key,
                value=value,
                valid_values=sorted(fields),
            )
        if key in ("mask", "block_init"):
            values[key] = [int(tok) for tok in value.split(",") if tok.strip()] if value else []
        else:
            values[key] = value
    try:
        return EnsembleConfig(**values)
    except (ValidationError, ValueError) as e:
        raise ConfigValidationError(f"{path}: {e}", field="config")


# ===== Figures =====


class FigurePanel(BaseModel):
    """One panel of a figure: an ensemble or a set of structured runs"""

    name: str
    title: str
    config: EnsembleConfig
    structured_x0: Optional[List[List[float]]] = None

    model_config = ConfigDict(frozen=True)


def figure_spec(name: str, trials: int = 1000, seed: int = 0) -> List[FigurePanel]:
    """Panels of fig1..fig4

    Raises:
        ConfigValidationError: unknown figure name
    """

    def ens(panel: str, title: str, matrix: str, **kw) -> FigurePanel:
        cfg = EnsembleConfig(matrix=matrix, trials=trials, seed=seed, **kw)
        return FigurePanel(name=panel, title=title, config=cfg)

    figures: Dict[str, List[FigurePanel]] = {
        "fig1": [ens("A1", "A1 = diag(1, 2, 3)", "A1"), ens("A2", "A2 = diag(2^-1..2^-5)", "A2")],
        "fig2": [
            ens("A3", "A3 = diag(-1, 2, 3, 4)", "A3"),
            ens("A3_masked", "A3, x0[0] = 0", "A3", mask=[0]),
        ],
        "fig3": [
            FigurePanel(
                name="A2_structured",
                title="A2, structured x0",
                config=EnsembleConfig(matrix="A2", trials=2, seed=seed),
                structured_x0=[[1.0, 2.0 * math.sqrt(2.0), 0.0, 0.0, 0.0], [1.0, 0.0, 8.0, 0.0, 0.0]],
            )
        ],
        "fig4": [
            ens("A4", "A4 = I - M, M skew", "A4"),
            ens("A4_blocks", "A4, x0 in blocks 1..3", "A4", block_init=[1, 2, 3]),
        ],
    }
    if name not in figures:
        raise ConfigValidationError(
            f"Unknown figure '{name}'", field="name", value=name, valid_values=sorted(figures)
        )
    return figures[name]


def run_panel(panel: FigurePanel, threads: Optional[int] = None) -> EnsembleResult:
    """Ensemble for a panel; structured panels become one trial per x_0"""
    if panel.structured_x0 is None:
        return run_ensemble(panel.config, threads=threads)
    cfg = panel.config
    A = load_matrix(cfg.matrix)
    runs = [run_structured(A, x0, cfg.tol, cfg.max_iters, cfg.solver) for x0 in panel.structured_x0]
    rho, bounded = theoretical_rho(cfg, A)
    tails = [_tail_max(run.trace, cfg.transient_cutoff) for run in runs]
    return EnsembleResult(
        config=cfg,
        theoretical_rho=rho,
        max_observed_rho_tail=max(tails, default=0.0),
        traces=[run.trace for run in runs],
        bounded=bounded,
        bound_violations=sum(1 for t in tails if bounded and t > rho + cfg.bound_slack),
    )

