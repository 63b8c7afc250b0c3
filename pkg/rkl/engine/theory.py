"""Convergence-factor predictors and nonlinear eigenpairs

Closed forms for the worst-case root-convergence factor of GMRES(1)
(symmetric A and skew-symmetric M = I - A), the initial-guess dependent
two-mode factor, the rAA(1) quantity Lambda*, and constructors plus an
independent compositional verifier for eigenpairs of the four
vector-dependent maps

    I2(u)  = (I - alpha(u) A^T)(I - alpha(u) A)        one GMRES(1) step, squared
    Pi(v)v = Phi(Phi(v))                              two GMRES(1) steps
    Psi(u) = M (I - alpha(u) A)                       half an rAA(1) cycle
    Ups(v) = M (I - alpha(Psi(v)v) A) M (I - alpha(v) A)   one rAA(1) cycle

For a vector u = u_i + eps u_j built from two eigenvectors of symmetric A
(eps = c_j / c_i), every map sends u to a multiple of u_i + eps' u_j, which
is why the two-mode eigenpairs have closed forms.
"""

import logging
import math
from itertools import combinations
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from rkl.engine.exceptions import (
    Breakdown,
    ConfigValidationError,
    SignConditionViolated,
    UnsupportedStructure,
    ZeroEigenvalue,
)
from rkl.engine.linalg import (
    ZERO_THRESHOLD,
    alpha,
    as_matrix,
    is_skew_symmetric,
    is_symmetric,
    iteration_matrix,
    matvec,
    norm2,
    phi_map,
    residual_update,
)
from rkl.engine.models import (
    FactorReport,
    MapKind,
    NepEigenpair,
    PairFactor,
    Regime,
    SandwichReport,
    SkewFactorReport,
)
from rkl.engine.spectral import SchurBlocks, Spectrum, eig_symmetric, schur_skew

logger = logging.getLogger(__name__)

AUTO = "auto"
EPS_MATCH_RTOL = 1e-8

EpsArg = Union[float, str]


# ===== Pairwise closed forms =====


def lambda_pi(a_i: float, a_j: float, eps: float) -> float:
    """Eigenvalue of Pi for u = u_i + eps u_j

    lambda_ij(eps) = (a_j - a_i)^2 / ((a_i^2 + eps^2 a_j^2) (1 + 1/eps^2))
    """
    if eps == 0.0:
        return 0.0
    e2 = eps * eps
    return (a_j - a_i) ** 2 / ((a_i * a_i + e2 * a_j * a_j) * (1.0 + 1.0 / e2))


def rho_for_two_modes(a_i: float, a_j: float, eps: float) -> float:
    """rho(r_0) = sqrt(lambda_ij(eps)) for r_0 = c_i u_i + c_j u_j, eps = c_j / c_i

    eps = 0 is a single-mode residual, which GMRES(1) removes in one step.
    """
    return math.sqrt(lambda_pi(a_i, a_j, eps))


def lambda_i2(a_i: float, a_j: float) -> float:
    """(a_j - a_i)^2 / (|a_i| + |a_j|)^2, the squared pairwise GMRES(1) factor"""
    return ((a_j - a_i) / (abs(a_i) + abs(a_j))) ** 2


def pair_factor(a_i: float, a_j: float) -> float:
    """|a_j - a_i| / (|a_i| + |a_j|)"""
    return abs(a_j - a_i) / (abs(a_i) + abs(a_j))


def psi_eps_sq(a_i: float, a_j: float) -> float:
    """eps^2 = -(1 - a_j) a_i / ((1 - a_i) a_j), required for a Psi eigenvector"""
    denom = (1.0 - a_i) * a_j
    if denom == 0.0:
        raise SignConditionViolated("psi", a_i, a_j, "(1 - a_i) a_j vanishes")
    return -(1.0 - a_j) * a_i / denom


def mu_psi(a_i: float, a_j: float) -> float:
    """Eigenvalue of Psi on its two-mode eigenvector

    mu = -(1 - a_i)(1 - a_j) / (a_i + a_j - 1). Its square is the Upsilon
    eigenvalue on the same vector.
    """
    s = a_i + a_j - 1.0
    if s == 0.0:
        raise SignConditionViolated("psi", a_i, a_j, "a_i + a_j = 1")
    return -(1.0 - a_i) * (1.0 - a_j) / s


def mu_upsilon(a_i: float, a_j: float, eps: float) -> float:
    """Eigenvalue of Upsilon for u = u_i + eps u_j (any eps != 0)

    mu(eps) = (a_j - a_i)^2 / (a_i^2 + eps^2 a_j^2)
              * ((1 - a_i)(1 - a_j))^2 / ((1 - a_i)^2 + (1 - a_j)^2 / eps^2)
    """
    if eps == 0.0:
        return 0.0
    e2 = eps * eps
    m_i, m_j = 1.0 - a_i, 1.0 - a_j
    first = (a_j - a_i) ** 2 / (a_i * a_i + e2 * a_j * a_j)
    second = (m_i * m_j) ** 2 / (m_i * m_i + m_j * m_j / e2)
    return first * second


def upsilon_optimal_eps_sq(a_i: float, a_j: float) -> float:
    """eps^2 = |(1 - a_j) a_i / ((1 - a_i) a_j)|, the maximiser of mu(eps)"""
    num = (1.0 - a_j) * a_i
    denom = (1.0 - a_i) * a_j
    if num == 0.0 or denom == 0.0:
        raise SignConditionViolated("upsilon", a_i, a_j, "a pair member equals 0 or 1")
    return abs(num / denom)


def mu_upsilon_max(a_i: float, a_j: float) -> float:
    """max over eps of mu(eps) = ((1-a_i)(1-a_j)(a_i-a_j) / (|(1-a_i)a_i| + |(1-a_j)a_j|))^2"""
    denom = abs((1.0 - a_i) * a_i) + abs((1.0 - a_j) * a_j)
    if denom == 0.0:
        return 0.0
    return ((1.0 - a_i) * (1.0 - a_j) * (a_i - a_j) / denom) ** 2


# ===== Symmetric worst case =====


def _check_nonsingular(spec: Spectrum) -> None:
    for a in spec.distinct_eigenvalues:
        if abs(a) <= spec.tolerance:
            raise ZeroEigenvalue(a)


def classify(spec: Spectrum) -> Regime:
    return Regime.SYMMETRIC_DEFINITE if spec.is_definite else Regime.SYMMETRIC_INDEFINITE


def worst_case_gmres1(spec: Spectrum, restricted_to: Optional[List[int]] = None) -> FactorReport:
    """Worst-case root-convergence factor of GMRES(1) for symmetric A

    Definite A: (|a_max| - |a_min|) / (|a_max| + |a_min|), the largest
    pairwise factor |a_j - a_i| / (|a_i| + |a_j|). Indefinite A: 1, attained
    by every pair of opposite sign.

    Raises:
        ZeroEigenvalue: A is singular
    """
    _check_nonsingular(spec)
    a = spec.distinct_eigenvalues
    table = [
        PairFactor(i=i, j=j, a_i=a[i], a_j=a[j], value=pair_factor(a[i], a[j]), eps_sq=abs(a[i] / a[j]))
        for i, j in combinations(range(spec.p), 2)
    ]
    regime = classify(spec)
    worst = max((row.value for row in table), default=0.0)
    attaining = []
    if regime is Regime.SYMMETRIC_INDEFINITE:
        attaining = [(row.i, row.j) for row in table if a[row.i] * a[row.j] < 0]
        worst = 1.0
    logger.debug(f"worst_case_gmres1: regime={regime.value} rho*={worst:.6g}")
    return FactorReport(
        worst_case_rho=min(worst, 1.0),
        regime=regime,
        per_pair_table=table,
        attaining_pairs=attaining,
        eigenvalues=list(a),
        restricted_to=restricted_to,
    )


def restricted_worst_case(spec: Spectrum, indices: Sequence[int]) -> FactorReport:
    """Worst case for residuals confined to the selected eigenvalue groups"""
    chosen = sorted(set(indices))
    return worst_case_gmres1(spec.restrict(chosen), restricted_to=chosen)


def predict_two_mode(spec: Spectrum, r0: np.ndarray, rel_tol: float = 1e-12) -> float:
    """rho(r_0) from the eigen-decomposition of r_0

    One active eigenvalue gives 0, two give rho_for_two_modes with eps from
    the component norms. More than two give the worst case restricted to the
    active eigenvalues, which bounds rho(r_0) from above.
    """
    norms = spec.group_norms(r0)
    total = float(np.linalg.norm(norms))
    if total == 0.0:
        return 0.0
    active = [i for i, g in enumerate(norms) if g > rel_tol * total]
    if len(active) <= 1:
        return 0.0
    if len(active) == 2:
        i, j = active
        return rho_for_two_modes(
            spec.distinct_eigenvalues[i], spec.distinct_eigenvalues[j], norms[j] / norms[i]
        )
    logger.info(f"predict_two_mode: {len(active)} active eigenvalues, using restricted bound")
    return restricted_worst_case(spec, active).worst_case_rho


# ===== rAA(1) =====


def lambda_star_table(eigenvalues: Sequence[float]) -> List[PairFactor]:
    """Pair terms of Lambda*; pairs with a vanishing denominator are skipped"""
    rows = []
    for i, j in combinations(range(len(eigenvalues)), 2):
        a_i, a_j = eigenvalues[i], eigenvalues[j]
        denom = abs((1.0 - a_i) * a_i) + abs((1.0 - a_j) * a_j)
        if denom == 0.0:
            logger.warning(f"Lambda*: skipping pair ({a_i:g}, {a_j:g}), both in {{0, 1}}")
            continue
        eps_sq = None
        if (1.0 - a_i) * a_j != 0.0 and (1.0 - a_j) * a_i != 0.0:
            eps_sq = upsilon_optimal_eps_sq(a_i, a_j)
        rows.append(
            PairFactor(i=i, j=j, a_i=a_i, a_j=a_j, value=mu_upsilon_max(a_i, a_j), eps_sq=eps_sq)
        )
    return rows


def lambda_star_raa1(spec: Spectrum) -> float:
    """Lambda* = max over distinct pairs of mu_upsilon_max(a_i, a_j)"""
    rows = lambda_star_table(spec.distinct_eigenvalues)
    return max((row.value for row in rows), default=0.0)


# ===== Skew-symmetric M =====


def skew_factor(modulus: float) -> float:
    """|m| / sqrt(1 + |m|^2)"""
    return modulus / math.sqrt(1.0 + modulus * modulus)


def alpha_range_skew(blocks: SchurBlocks) -> Tuple[float, float]:
    """[1/(1 + m^*^2), 1/(1 + m_*^2)], the range of alpha(v)"""
    upper = blocks.m_star_upper
    lower = blocks.m_star_lower()
    return 1.0 / (1.0 + upper * upper), 1.0 / (1.0 + lower * lower)


def positive_definite_bound(A: np.ndarray) -> float:
    """sqrt(1 - lambda_min((A^-1 + A^-T)/2) lambda_min((A + A^T)/2))

    The classical per-step contraction bound for A with positive definite
    symmetric part.

    Raises:
        UnsupportedStructure: symmetric part of A is not positive definite
    """
    A = as_matrix(A)
    sym = eig_symmetric(0.5 * (A + A.T))
    low = sym.distinct_eigenvalues[0]
    if low <= 0:
        raise UnsupportedStructure("positive_definite_bound", "symmetric part is not positive definite")
    Ainv = np.linalg.inv(A)
    s_low = eig_symmetric(0.5 * (Ainv + Ainv.T), tol=1e-10).distinct_eigenvalues[0]
    return math.sqrt(max(0.0, 1.0 - s_low * low))


def worst_case_skew(
    blocks: SchurBlocks, subset: Optional[Sequence[int]] = None
) -> SkewFactorReport:
    """GMRES(1) factor m^*/sqrt(1 + m^*^2) for skew M

    Also reports the rAA(1) comparator m^*/(1 + m^*^2)^(1/4), the alpha
    range and, for a block subset, the factor of residuals started in those
    blocks (governed by their largest modulus alone).
    """
    m_up = blocks.m_star_upper
    subset_list = sorted(set(subset)) if subset else None
    subset_rho = None
    if subset_list:
        subset_rho = skew_factor(blocks.restrict(subset_list).m_star_upper)
    return SkewFactorReport(
        rho_star=skew_factor(m_up),
        rho_star_raa1=m_up / (1.0 + m_up * m_up) ** 0.25,
        m_star_upper=m_up,
        m_star_lower=blocks.m_star_lower(),
        alpha_range=alpha_range_skew(blocks),
        moduli=list(blocks.moduli),
        subset=subset_list,
        subset_rho=subset_rho,
        positive_definite_bound=math.sqrt(1.0 - 1.0 / (1.0 + m_up * m_up)),
    )


def qfactor(A: np.ndarray) -> float:
    """q-factor sigma with ||r_k|| <= sigma ||r_{k-1}|| for every GMRES(1) step

    Raises:
        UnsupportedStructure: A is not symmetric and I - A is not skew
    """
    A = as_matrix(A)
    if is_symmetric(A):
        return worst_case_gmres1(eig_symmetric(A)).worst_case_rho
    M = iteration_matrix(A)
    if is_skew_symmetric(M):
        return worst_case_skew(schur_skew(M)).rho_star
    raise UnsupportedStructure("qfactor")


# ===== Nonlinear eigenpairs =====


def _resolve_pair(spec: Spectrum, i1: int, i2: int) -> Tuple[float, float]:
    for name, idx in (("i1", i1), ("i2", i2)):
        if not 0 <= idx < spec.p:
            raise ConfigValidationError(
                message=f"Eigenvalue index {idx} out of range (0..{spec.p - 1})",
                field=name,
                value=idx,
            )
    if i1 == i2:
        raise ConfigValidationError(
            message="Eigenpair construction needs two distinct eigenvalues", field="pair", value=(i1, i2)
        )
    return spec.distinct_eigenvalues[i1], spec.distinct_eigenvalues[i2]


def _fixed_eps(kind: MapKind, a_i: float, a_j: float, required: float, eps: EpsArg) -> float:
    """Maps whose eigenvector fixes eps^2: honour Auto, validate explicit eps"""
    if required <= 0.0:
        raise SignConditionViolated(kind.value, a_i, a_j, f"required eps^2 = {required:.6g} is not positive")
    if eps == AUTO:
        return math.sqrt(required)
    value = float(eps)
    if abs(value * value - required) > EPS_MATCH_RTOL * required:
        raise SignConditionViolated(
            kind.value, a_i, a_j, f"eigenvectors need eps^2 = {required:.12g}, got {value * value:.12g}"
        )
    return value


def _free_eps(optimal: float, eps: EpsArg) -> float:
    if eps == AUTO:
        return math.sqrt(optimal)
    value = float(eps)
    if value == 0.0:
        raise ConfigValidationError(message="eps must be nonzero", field="eps", value=eps)
    return value


def construct_eigpair(
    spec: Spectrum,
    map_kind: MapKind | str,
    i1: int,
    i2: int,
    eps: EpsArg = AUTO,
    spread: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> NepEigenpair:
    """Two-mode eigenpair u = u_{i1} + eps u_{i2} of the requested map

    I2 needs eps^2 = a_i1 / a_i2 (a_i1 a_i2 > 0); Psi needs
    eps^2 = -(1 - a_i2) a_i1 / ((1 - a_i1) a_i2) > 0. Pi and Upsilon accept
    any eps != 0; Auto picks the eps that maximises the eigenvalue. With
    spread=True each component is spread over its whole eigenspace with
    random coefficients of the same total norm.

    Raises:
        SignConditionViolated: the map has no eigenpair for this pair/eps
        ConfigValidationError: bad indices or eps = 0
    """
    kind = MapKind(map_kind)
    a_i, a_j = _resolve_pair(spec, i1, i2)
    _check_nonsingular(spec.restrict([i1, i2]))

    if kind is MapKind.I2:
        if a_i * a_j <= 0:
            raise SignConditionViolated(kind.value, a_i, a_j, "needs a_i a_j > 0")
        e = _fixed_eps(kind, a_i, a_j, a_i / a_j, eps)
        value = lambda_i2(a_i, a_j)
    elif kind is MapKind.PI:
        e = _free_eps(abs(a_i / a_j), eps)
        value = lambda_pi(a_i, a_j, e)
    elif kind is MapKind.PSI:
        e = _fixed_eps(kind, a_i, a_j, psi_eps_sq(a_i, a_j), eps)
        value = mu_psi(a_i, a_j)
    else:
        optimal = upsilon_optimal_eps_sq(a_i, a_j) if eps == AUTO else 1.0
        e = _free_eps(optimal, eps)
        value = mu_upsilon(a_i, a_j, e)

    U_i, U_j = spec.group_columns(i1), spec.group_columns(i2)
    if spread:
        rng = rng or np.random.default_rng()
        w_i = U_i @ _unit(rng.standard_normal(U_i.shape[1]))
        w_j = U_j @ _unit(rng.standard_normal(U_j.shape[1]))
    else:
        w_i, w_j = U_i[:, 0], U_j[:, 0]

    return NepEigenpair(
        vector=w_i + e * w_j, value=value, map_kind=kind, i1=i1, i2=i2, eps=e, spread=spread
    )


def _unit(c: np.ndarray) -> np.ndarray:
    return c / np.linalg.norm(c)


def indefinite_unit_vector(spec: Spectrum, i: int, j: int) -> NepEigenpair:
    """u = u_i + t u_j with t^2 = -a_i / a_j, so <A u, u> = 0

    alpha(u) = 0, hence Pi(u) u = u: an eigenvector with eigenvalue one.

    Raises:
        SignConditionViolated: a_i and a_j have the same sign
    """
    a_i, a_j = _resolve_pair(spec, i, j)
    if a_i * a_j >= 0:
        raise SignConditionViolated("pi", a_i, a_j, "<Au, u> = 0 needs a_i a_j < 0")
    t = math.sqrt(-a_i / a_j)
    u = spec.group_columns(i)[:, 0] + t * spec.group_columns(j)[:, 0]
    return NepEigenpair(vector=u, value=1.0, map_kind=MapKind.PI, i1=i, i2=j, eps=t)


def apply_map(A: np.ndarray, map_kind: MapKind | str, u: np.ndarray) -> np.ndarray:
    """Evaluate map(u) u by composing Phi and M, never via closed forms

    Raises:
        Breakdown: an intermediate residual vanished (Pi, Upsilon)
    """
    kind = MapKind(map_kind)
    if kind is MapKind.I2:
        a = alpha(A, u)
        y = residual_update(u, a, matvec(A, u))
        return residual_update(y, a, matvec(A.T, y))
    if kind is MapKind.PI:
        y = phi_map(A, u)
        if norm2(y) < ZERO_THRESHOLD:
            raise Breakdown(1, "Phi(v) = 0, Pi(v) v is undefined")
        return phi_map(A, y)
    M = iteration_matrix(A)
    half = matvec(M, phi_map(A, u))
    if kind is MapKind.PSI:
        return half
    if norm2(half) < ZERO_THRESHOLD:
        raise Breakdown(2, "Psi(v) v = 0, Upsilon(v) v is undefined")
    return matvec(M, phi_map(A, half))


def verify_eigenpair(A: np.ndarray, pair: NepEigenpair) -> float:
    """Residual ||map(u) u - value u|| / ||u||"""
    u = pair.vector
    image = apply_map(A, pair.map_kind, u)
    return norm2(image - pair.value * u) / norm2(u)


def pi_ratio_sandwich(A: np.ndarray, samples: int = 100_000, seed: int = 0) -> SandwichReport:
    """Bracket max ||Pi(v) v|| / ||v|| for definite symmetric A

    Samples random v (vectorised) for the lower side and evaluates the
    constructed maximiser, the Pi eigenvector on the extreme eigenvalues,
    against the bound (rho*)^2.

    Raises:
        UnsupportedStructure: A is not symmetric definite
    """
    A = as_matrix(A)
    spec = eig_symmetric(A)
    if not spec.is_definite:
        raise UnsupportedStructure("pi_ratio_sandwich", "A must be definite")
    rho = worst_case_gmres1(spec).worst_case_rho

    rng = np.random.default_rng(seed)
    V = rng.standard_normal((A.shape[0], samples))
    Y = _phi_columns(A, V)
    Z = _phi_columns(A, Y)
    ratios = np.linalg.norm(Z, axis=0) / np.linalg.norm(V, axis=0)

    if spec.p >= 2:
        pair = construct_eigpair(spec, MapKind.PI, 0, spec.p - 1)
        attained = norm2(apply_map(A, MapKind.PI, pair.vector)) / norm2(pair.vector)
    else:
        attained = 0.0
    return SandwichReport(
        samples=samples, max_sampled=float(np.max(ratios)), attained=attained, bound=rho * rho
    )


def _phi_columns(A: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Phi applied to every column of V, alpha taken on unit columns"""
    U = V / np.linalg.norm(V, axis=0)
    AU = A @ U
    alphas = np.sum(U * AU, axis=0) / np.sum(AU * AU, axis=0)
    return V - alphas * (A @ V)
