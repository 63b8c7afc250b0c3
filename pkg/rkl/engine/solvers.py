"""GMRES(1), rAA(1) and the stationary iteration, with full traces

All three solve A x = b from x0 and track the residual r_k = A x_k - b.
Residuals are updated recursively, so runs can be driven far below the
level where A x_k - b would lose accuracy (tol = 1e-30 with b = 0).
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from rkl.engine.exceptions import Breakdown, DimensionMismatch, Diverged
from rkl.engine.linalg import (
    ZERO_THRESHOLD,
    as_matrix,
    as_vector,
    axpy,
    iteration_matrix,
    matvec,
    norm2,
    projection_coefficient,
    residual_update,
)
from rkl.engine.models import IterationTrace, SolveConfig, SolverKind, Termination

logger = logging.getLogger(__name__)


class TraceRecorder:
    """Accumulates norms, log-norms and alphas while a solver runs

    log ||r_k|| is accumulated as a sum of log step ratios, so rho_k stays
    finite after ||r_k|| underflows.
    """

    def __init__(self, method: SolverKind, r0: np.ndarray, cfg: SolveConfig):
        self.method = method
        self.cfg = cfg
        n0 = norm2(r0)
        self.norms: List[float] = [n0]
        self.logs: List[float] = [math.log(n0) if n0 > 0 else -math.inf]
        self.alphas: List[Optional[float]] = []
        self.vectors: Optional[List[np.ndarray]] = [r0.copy()] if cfg.record_vectors else None
        self.drift: Optional[float] = 0.0 if cfg.track_drift else None

    @property
    def last_norm(self) -> float:
        return self.norms[-1]

    @property
    def step(self) -> int:
        return len(self.norms) - 1

    def push(self, r: np.ndarray, alpha_k: Optional[float]) -> float:
        prev = self.norms[-1]
        nr = norm2(r)
        self.norms.append(nr)
        if nr == 0.0 or prev == 0.0:
            self.logs.append(-math.inf)
        else:
            self.logs.append(self.logs[-1] + math.log(nr / prev))
        self.alphas.append(alpha_k)
        if self.vectors is not None:
            self.vectors.append(r.copy())
        return nr

    def observe_true_residual(self, true_norm: float) -> None:
        if self.drift is not None and self.norms[0] > 0:
            gap = abs(true_norm - self.norms[-1]) / self.norms[0]
            self.drift = max(self.drift, gap)

    def build(self, termination: Termination) -> IterationTrace:
        rho = [
            math.exp(self.logs[k] / k) if self.logs[k] != -math.inf else 0.0
            for k in range(1, len(self.logs))
        ]
        return IterationTrace(
            method=self.method,
            residual_norms=self.norms,
            log_residual_norms=self.logs,
            rho_series=rho,
            alphas=self.alphas,
            termination=termination,
            residual_vectors=self.vectors,
            true_residual_drift=self.drift,
        )


def _prepare(
    A: np.ndarray, b: np.ndarray, x0: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    A = as_matrix(A)
    b = as_vector(b, name="b")
    x0 = as_vector(x0, name="x0")
    n = A.shape[0]
    if b.shape[0] != n or x0.shape[0] != n:
        raise DimensionMismatch("solve", (n,), (b.shape[0], x0.shape[0]))
    return A, b, x0


def _check_divergence(rec: TraceRecorder, cfg: SolveConfig) -> None:
    if rec.last_norm > cfg.divergence_threshold:
        trace = rec.build(Termination.DIVERGED)
        raise Diverged(rec.step, rec.last_norm, cfg.divergence_threshold, trace=trace)


def gmres1(
    A: np.ndarray, b: np.ndarray, x0: np.ndarray, cfg: Optional[SolveConfig] = None
) -> Tuple[np.ndarray, IterationTrace]:
    """Minimal residual iteration, i.e. GMRES restarted after every step

        r_0 = A x_0 - b
        alpha_k = <r_k, A r_k> / <A r_k, A r_k>
        x_{k+1} = x_k - alpha_k r_k
        r_{k+1} = r_k - alpha_k A r_k

    Stops on ||r_k|| <= tol (Converged), on |alpha_k| ||A r_k|| <=
    stagnation_eps ||r_k|| (Stagnated, e.g. <r_k, A r_k> = 0 for indefinite A)
    or after max_iters steps (MaxIters).

    Raises:
        Breakdown: A r_k = 0 while r_k != 0
    """
    cfg = cfg or SolveConfig()
    A, b, x0 = _prepare(A, b, x0)
    x = x0.copy()
    r = matvec(A, x) - b
    rec = TraceRecorder(SolverKind.GMRES1, r, cfg)
    termination = Termination.MAX_ITERS

    for k in range(cfg.max_iters):
        if rec.last_norm <= cfg.tol:
            termination = Termination.CONVERGED
            break
        Ar = matvec(A, r)
        nAr = norm2(Ar)
        if nAr < ZERO_THRESHOLD:
            raise Breakdown(k, "A r_k vanished", trace=rec.build(Termination.BREAKDOWN))
        alpha_k = projection_coefficient(r, Ar)
        if abs(alpha_k) * nAr <= cfg.stagnation_eps * rec.last_norm:
            termination = Termination.STAGNATED
            break
        x = axpy(-alpha_k, r, x)
        r = residual_update(r, alpha_k, Ar)
        rec.push(r, alpha_k)
        if cfg.track_drift:
            rec.observe_true_residual(norm2(matvec(A, x) - b))
    else:
        if rec.last_norm <= cfg.tol:
            termination = Termination.CONVERGED

    logger.debug(
        f"gmres1: {termination.value} after {rec.step} steps, ||r|| = {rec.last_norm:.3e}"
    )
    return x, rec.build(termination)


def raa1(
    A: np.ndarray, b: np.ndarray, x0: np.ndarray, cfg: Optional[SolveConfig] = None
) -> Tuple[np.ndarray, IterationTrace]:
    """Restarted Anderson acceleration with window one

    With M = I - A, even steps are plain fixed-point steps
    x_{k+1} = M x_k + b. Odd steps mix the last two iterates by the
    least-squares coefficient gamma = <r_k, dr> / <dr, dr>, with
    dx = x_k - x_{k-1} and dr = r_k - r_{k-1}:

        x_{k+1} = M x_k + b - gamma M dx

    Since dr = -A r_{k-1}, gamma = 1 - alpha(r_{k-1}) and the residuals obey
    r_{k+2} = M (I - alpha(r_k) A) r_k for every even k. alphas[k] records
    alpha(r_{k-1}) on odd steps and None on even ones.

    Raises:
        Breakdown: dr = 0 while r_k != 0
        Diverged: ||r_k|| exceeds cfg.divergence_threshold
    """
    cfg = cfg or SolveConfig()
    A, b, x0 = _prepare(A, b, x0)
    M = iteration_matrix(A)
    x = x0.copy()
    r = matvec(A, x) - b
    rec = TraceRecorder(SolverKind.RAA1, r, cfg)
    x_prev: Optional[np.ndarray] = None
    r_prev: Optional[np.ndarray] = None
    termination = Termination.MAX_ITERS

    for k in range(cfg.max_iters):
        if rec.last_norm <= cfg.tol:
            termination = Termination.CONVERGED
            break
        Mr = matvec(M, r)
        if k % 2 == 0:
            x_next = matvec(M, x) + b
            r_next = Mr
            alpha_k = None
        else:
            dx = x - x_prev
            dr = r - r_prev
            if norm2(dr) < ZERO_THRESHOLD:
                raise Breakdown(k, "residual difference vanished", trace=rec.build(Termination.BREAKDOWN))
            gamma = projection_coefficient(r, dr)
            x_next = axpy(-gamma, matvec(M, dx), matvec(M, x) + b)
            r_next = axpy(-gamma, matvec(M, dr), Mr)
            alpha_k = 1.0 - gamma
        x_prev, r_prev = x, r
        x, r = x_next, r_next
        rec.push(r, alpha_k)
        _check_divergence(rec, cfg)
    else:
        if rec.last_norm <= cfg.tol:
            termination = Termination.CONVERGED

    logger.debug(f"raa1: {termination.value} after {rec.step} steps, ||r|| = {rec.last_norm:.3e}")
    return x, rec.build(termination)


def stationary(
    A: np.ndarray, b: np.ndarray, x0: np.ndarray, cfg: Optional[SolveConfig] = None
) -> Tuple[np.ndarray, IterationTrace]:
    """Richardson iteration x_{k+1} = (I - A) x_k + b

    Raises:
        Diverged: ||r_k|| exceeds cfg.divergence_threshold
    """
    cfg = cfg or SolveConfig()
    A, b, x0 = _prepare(A, b, x0)
    M = iteration_matrix(A)
    x = x0.copy()
    r = matvec(A, x) - b
    rec = TraceRecorder(SolverKind.STATIONARY, r, cfg)
    termination = Termination.MAX_ITERS

    for _ in range(cfg.max_iters):
        if rec.last_norm <= cfg.tol:
            termination = Termination.CONVERGED
            break
        x = matvec(M, x) + b
        r = matvec(M, r)
        rec.push(r, None)
        _check_divergence(rec, cfg)
    else:
        if rec.last_norm <= cfg.tol:
            termination = Termination.CONVERGED

    logger.debug(
        f"stationary: {termination.value} after {rec.step} steps, ||r|| = {rec.last_norm:.3e}"
    )
    return x, rec.build(termination)


SOLVERS: Dict[SolverKind, Callable[..., Tuple[np.ndarray, IterationTrace]]] = {
    SolverKind.GMRES1: gmres1,
    SolverKind.RAA1: raa1,
    SolverKind.STATIONARY: stationary,
}


def solve(
    method: SolverKind | str,
    A: np.ndarray,
    b: np.ndarray,
    x0: np.ndarray,
    cfg: Optional[SolveConfig] = None,
) -> Tuple[np.ndarray, IterationTrace]:
    """Dispatch to one of the three solvers by name"""
    return SOLVERS[SolverKind(method)](A, b, x0, cfg)
