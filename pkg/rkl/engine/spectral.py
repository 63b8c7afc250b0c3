"""Spectral structure of A

eig_symmetric() groups the spectrum of a symmetric A into distinct
eigenvalues with orthonormal bases, and schur_skew() splits a skew-symmetric
M = I - A into invariant 2x2 blocks. Both run cyclic Jacobi rotations, which
keeps the bases orthogonal to a few ulp.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from rkl.engine.exceptions import BlockIndexError, NotSkewSymmetric, NotSymmetric
from rkl.engine.linalg import (
    as_vector,
    asymmetry,
    is_skew_symmetric,
    is_symmetric,
    skew_asymmetry,
)

logger = logging.getLogger(__name__)

GROUP_RTOL = 1e-8
JACOBI_MAX_SWEEPS = 100


def group_tolerance(A: Optional[np.ndarray] = None) -> float:
    """Eigenvalues closer than this are merged: 1e-8 * max(1, ||A||_2)"""
    if A is None:
        return GROUP_RTOL
    return GROUP_RTOL * max(1.0, float(np.linalg.norm(A, 2)))


def jacobi_eigh(A: np.ndarray, max_sweeps: int = JACOBI_MAX_SWEEPS) -> Tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi for symmetric A

    Returns:
        (eigenvalues, V) with A V = V diag(eigenvalues), unsorted
    """
    D = np.array(A, dtype=np.float64)
    n = D.shape[0]
    V = np.eye(n)
    scale = max(float(np.linalg.norm(D)), np.finfo(float).tiny)

    for sweep in range(max_sweeps):
        off = float(np.sqrt(np.sum(np.tril(D, -1) ** 2)))
        if off <= 1e-17 * scale:
            logger.debug(f"Jacobi converged after {sweep} sweeps (n={n})")
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = D[p, q]
                if apq == 0.0:
                    continue
                g = 100.0 * abs(apq)
                if sweep > 3 and abs(D[p, p]) + g == abs(D[p, p]) and abs(D[q, q]) + g == abs(D[q, q]):
                    D[p, q] = D[q, p] = 0.0
                    continue
                theta = (D[q, q] - D[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    sign = 1.0 if theta >= 0 else -1.0
                    t = sign / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                Dp, Dq = D[:, p].copy(), D[:, q].copy()
                D[:, p], D[:, q] = c * Dp - s * Dq, s * Dp + c * Dq
                Dp, Dq = D[p, :].copy(), D[q, :].copy()
                D[p, :], D[q, :] = c * Dp - s * Dq, s * Dp + c * Dq
                D[p, q] = D[q, p] = 0.0

                Vp, Vq = V[:, p].copy(), V[:, q].copy()
                V[:, p], V[:, q] = c * Vp - s * Vq, s * Vp + c * Vq
    else:
        logger.warning(f"Jacobi did not converge in {max_sweeps} sweeps (n={n})")

    return np.diag(D).copy(), V


# ===== Symmetric spectrum =====


class Spectrum(BaseModel):
    """Distinct eigenvalues a_1 < ... < a_p of symmetric A with grouped bases

    basis has one column per eigenvalue (with multiplicity), grouped and
    ordered like distinct_eigenvalues. A restricted spectrum keeps only the
    columns of the selected groups, so basis may be n x m with m < n.
    """

    distinct_eigenvalues: Tuple[float, ...]
    multiplicities: Tuple[int, ...]
    basis: np.ndarray
    tolerance: float

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def p(self) -> int:
        return len(self.distinct_eigenvalues)

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def is_definite(self) -> bool:
        a = self.distinct_eigenvalues
        return all(x > 0 for x in a) or all(x < 0 for x in a)

    def group_offsets(self) -> List[int]:
        offsets = [0]
        for m in self.multiplicities:
            offsets.append(offsets[-1] + m)
        return offsets

    def group_columns(self, i: int) -> np.ndarray:
        """Orthonormal basis of the eigenspace of a_i"""
        if not 0 <= i < self.p:
            raise BlockIndexError(i, self.p, kind="eigenvalue")
        offsets = self.group_offsets()
        return self.basis[:, offsets[i] : offsets[i + 1]]

    def expanded_eigenvalues(self) -> np.ndarray:
        return np.repeat(np.array(self.distinct_eigenvalues), self.multiplicities)

    def coordinates(self, v: np.ndarray) -> np.ndarray:
        """U^T v"""
        return self.basis.T @ v

    def group_norms(self, v: np.ndarray) -> np.ndarray:
        """Norm of the component of v in each eigenspace"""
        c = self.coordinates(v)
        offsets = self.group_offsets()
        return np.array(
            [np.linalg.norm(c[offsets[i] : offsets[i + 1]]) for i in range(self.p)]
        )

    def restrict(self, indices: Sequence[int]) -> "Spectrum":
        """Sub-spectrum on the selected eigenvalue groups"""
        chosen = sorted(set(indices))
        if not chosen:
            raise BlockIndexError(-1, self.p, kind="eigenvalue")
        for i in chosen:
            if not 0 <= i < self.p:
                raise BlockIndexError(i, self.p, kind="eigenvalue")
        return Spectrum(
            distinct_eigenvalues=tuple(self.distinct_eigenvalues[i] for i in chosen),
            multiplicities=tuple(self.multiplicities[i] for i in chosen),
            basis=np.hstack([self.group_columns(i) for i in chosen]),
            tolerance=self.tolerance,
        )


def eig_symmetric(A: np.ndarray, tol: float = 1e-12) -> Spectrum:
    """Grouped eigendecomposition of symmetric A

    Raises:
        NotSymmetric: A differs from A^T by more than tol (relative)
    """
    if not is_symmetric(A, tol):
        raise NotSymmetric(asymmetry(A), tol)

    values, V = jacobi_eigh(0.5 * (A + A.T))
    order = np.argsort(values, kind="stable")
    values, V = values[order], V[:, order]

    gtol = group_tolerance(A)
    groups: List[List[int]] = []
    for k, value in enumerate(values):
        if groups and value - values[groups[-1][-1]] <= gtol:
            groups[-1].append(k)
        else:
            groups.append([k])

    distinct = tuple(float(np.mean(values[g])) for g in groups)
    multiplicities = tuple(len(g) for g in groups)
    logger.debug(f"eig_symmetric: distinct={distinct} multiplicities={multiplicities}")
    return Spectrum(
        distinct_eigenvalues=distinct,
        multiplicities=multiplicities,
        basis=V,
        tolerance=gtol,
    )


# ===== Skew-symmetric real Schur blocks =====


class SchurBlocks(BaseModel):
    """M = Q H Q^T with invariant blocks Q_j = [q_j, q~_j]

    Blocks are ordered by descending modulus |m_j|. A block of size one is an
    unpaired null direction of M (odd n).
    """

    Q: np.ndarray
    moduli: Tuple[float, ...]
    block_sizes: Tuple[int, ...]

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def count(self) -> int:
        return len(self.moduli)

    @property
    def m_star_upper(self) -> float:
        """m^* = max |m_j|"""
        return max(self.moduli) if self.moduli else 0.0

    def m_star_lower(self, nonsingular_only: bool = False) -> float:
        """m_* = min |m_j|, optionally ignoring zero-modulus blocks"""
        moduli = [m for m in self.moduli if m > 0] if nonsingular_only else list(self.moduli)
        return min(moduli) if moduli else 0.0

    def columns(self, j: int) -> np.ndarray:
        """Q_j"""
        if not 0 <= j < self.count:
            raise BlockIndexError(j, self.count)
        start = sum(self.block_sizes[:j])
        return self.Q[:, start : start + self.block_sizes[j]]

    def s_eigenvalues(self) -> List[float]:
        """Eigenvalues (1 + |m_j|^2)^-1 of S = (A^-1 + A^-T)/2, one per column"""
        return [1.0 / (1.0 + m * m) for m, size in zip(self.moduli, self.block_sizes) for _ in range(size)]

    def restrict(self, indices: Sequence[int]) -> "SchurBlocks":
        chosen = sorted(set(indices))
        if not chosen:
            raise BlockIndexError(-1, self.count)
        cols = [self.columns(j) for j in chosen]
        return SchurBlocks(
            Q=np.hstack(cols),
            moduli=tuple(self.moduli[j] for j in chosen),
            block_sizes=tuple(self.block_sizes[j] for j in chosen),
        )


def schur_skew(M: np.ndarray, tol: float = 1e-12) -> SchurBlocks:
    """Real Schur blocks of skew-symmetric M

    Eigenvectors q of K = M M^T give |m_j|^2; each q is paired with
    q~ = M q / |m_j|, which spans the same invariant plane. Zero-modulus
    directions are paired among themselves; a single leftover one (odd n)
    becomes an unpaired column.

    Raises:
        NotSkewSymmetric: M + M^T exceeds tol (relative)
    """
    if not is_skew_symmetric(M, tol):
        raise NotSkewSymmetric(skew_asymmetry(M), tol)

    n = M.shape[0]
    Ms = 0.5 * (M - M.T)
    values, V = jacobi_eigh(Ms @ Ms.T)
    order = np.argsort(-values, kind="stable")
    V = V[:, order]
    zero_tol = 1e-12 * max(1.0, float(np.linalg.norm(Ms, 2)))

    chosen: List[np.ndarray] = []
    pairs: List[Tuple[float, List[np.ndarray]]] = []
    null_vectors: List[np.ndarray] = []
    remaining = list(range(n))

    while len(chosen) < n and remaining:
        basis = np.array(chosen).T if chosen else np.zeros((n, 0))
        best, best_vec, best_norm = None, None, -1.0
        for k in remaining:
            q = V[:, k]
            for _ in range(2):
                q = q - basis @ (basis.T @ q)
            nq = float(np.linalg.norm(q))
            if nq > best_norm + 1e-12:
                best, best_vec, best_norm = k, q, nq
        remaining.remove(best)
        q = best_vec / best_norm

        Mq = Ms @ q
        modulus = float(np.linalg.norm(Mq))
        if modulus > zero_tol:
            q_tilde = Mq / modulus
            q_tilde = q_tilde - basis @ (basis.T @ q_tilde)
            q_tilde /= np.linalg.norm(q_tilde)
            chosen.extend([q, q_tilde])
            pairs.append((modulus, [q, q_tilde]))
        else:
            chosen.append(q)
            null_vectors.append(q)

    for k in range(0, len(null_vectors) - 1, 2):
        pairs.append((0.0, null_vectors[k : k + 2]))
    if len(null_vectors) % 2 == 1:
        logger.info("schur_skew: odd dimension, one unpaired null direction")
        pairs.append((0.0, [null_vectors[-1]]))

    pairs.sort(key=lambda item: -item[0])
    Q = np.column_stack([v for _, vecs in pairs for v in vecs])
    blocks = SchurBlocks(
        Q=Q,
        moduli=tuple(m for m, _ in pairs),
        block_sizes=tuple(len(vecs) for _, vecs in pairs),
    )
    logger.debug(f"schur_skew: moduli={blocks.moduli}")
    return blocks


def project_onto_block(blocks: SchurBlocks, j: int, v: np.ndarray) -> np.ndarray:
    """Q_j Q_j^T v"""
    Qj = blocks.columns(j)
    return Qj @ (Qj.T @ v)


def project_onto_blocks(blocks: SchurBlocks, indices: Sequence[int], v: np.ndarray) -> np.ndarray:
    """Sum of Q_j Q_j^T v over the selected blocks"""
    total = np.zeros_like(v, dtype=np.float64)
    for j in sorted(set(indices)):
        total = total + project_onto_block(blocks, j, v)
    return total


def skew_block_vector(blocks: SchurBlocks, indices: Sequence[int]) -> np.ndarray:
    """Sum of the leading column q_j of each selected block"""
    total = np.zeros(blocks.Q.shape[0])
    for j in sorted(set(indices)):
        total = total + blocks.columns(j)[:, 0]
    return as_vector(total, name="x0")
