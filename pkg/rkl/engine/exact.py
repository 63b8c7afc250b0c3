"""Exact rational arithmetic for the rAA(1) counterexamples

Rationals are fractions.Fraction (always reduced, unbounded integers);
vectors and matrices are tuples of them. Everything here recomputes the
counterexample intermediates from scratch, so printed values are only used
as cross-checks.
"""

import logging
import math
from fractions import Fraction
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from rkl.engine.exceptions import (
    DimensionMismatch,
    IntermediateBreakdown,
    MatrixParseError,
    RationalOverflow,
    SingularDirection,
    UnsupportedStructure,
    ZeroResidual,
)
from rkl.engine.models import (
    ConjectureCheck,
    CounterexampleIntermediates,
    ParityCertificate,
)

logger = logging.getLogger(__name__)

Rational = Fraction
RationalVector = Tuple[Fraction, ...]
RationalMatrix = Tuple[RationalVector, ...]
RationalLike = Union[int, str, Fraction]


def to_rational(text: RationalLike) -> Fraction:
    """Exact value of an int, Fraction, decimal string or 'p/q' string"""
    try:
        return Fraction(text.strip()) if isinstance(text, str) else Fraction(text)
    except (ValueError, ZeroDivisionError, TypeError):
        raise MatrixParseError(str(text), "not a decimal or p/q rational")


def to_float(q: Fraction) -> float:
    """Nearest double

    Raises:
        RationalOverflow: |q| exceeds the double range
    """
    try:
        return float(q)
    except OverflowError:
        raise RationalOverflow(f"{q.numerator}/{q.denominator}")


def rvec(values: Iterable[RationalLike]) -> RationalVector:
    v = tuple(to_rational(x) for x in values)
    if not v:
        raise DimensionMismatch("rvec", "n >= 1", 0)
    return v


def rmat(rows: Iterable[Iterable[RationalLike]]) -> RationalMatrix:
    A = tuple(rvec(row) for row in rows)
    n = len(A)
    if n == 0 or any(len(row) != n for row in A):
        raise DimensionMismatch("rmat", "(n, n)", [len(row) for row in A])
    return A


def rdiag(values: Iterable[RationalLike]) -> RationalMatrix:
    d = rvec(values)
    zero = Fraction(0)
    return tuple(tuple(d[i] if i == j else zero for j in range(len(d))) for i in range(len(d)))


def rdot(x: RationalVector, y: RationalVector) -> Fraction:
    if len(x) != len(y):
        raise DimensionMismatch("rdot", len(x), len(y))
    return sum((a * b for a, b in zip(x, y)), Fraction(0))


def rmatvec(A: RationalMatrix, x: RationalVector) -> RationalVector:
    if len(A) != len(x):
        raise DimensionMismatch("rmatvec", len(A), len(x))
    return tuple(rdot(row, x) for row in A)


def rsub(x: RationalVector, y: RationalVector) -> RationalVector:
    return tuple(a - b for a, b in zip(x, y))


def rscale(c: Fraction, x: RationalVector) -> RationalVector:
    return tuple(c * a for a in x)


def rnorm_sq(x: RationalVector) -> Fraction:
    return rdot(x, x)


def is_zero(x: RationalVector) -> bool:
    return all(a == 0 for a in x)


def riteration_matrix(A: RationalMatrix) -> RationalMatrix:
    """M = I - A"""
    n = len(A)
    return tuple(tuple((1 if i == j else 0) - A[i][j] for j in range(n)) for i in range(n))


def rational_sqrt(q: Fraction) -> Optional[Fraction]:
    """Exact square root when numerator and denominator are perfect squares"""
    if q < 0:
        return None
    num, den = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if num * num == q.numerator and den * den == q.denominator:
        return Fraction(num, den)
    return None


# ===== Maps =====


def alpha_exact(A: RationalMatrix, v: RationalVector) -> Fraction:
    """alpha(v) = <v, Av> / <Av, Av> as a reduced fraction

    Raises:
        ZeroResidual: v = 0
        SingularDirection: Av = 0
    """
    if is_zero(v):
        raise ZeroResidual(0.0)
    Av = rmatvec(A, v)
    if is_zero(Av):
        raise SingularDirection(math.sqrt(to_float(rnorm_sq(v))))
    return rdot(v, Av) / rdot(Av, Av)


def phi_exact(A: RationalMatrix, v: RationalVector) -> RationalVector:
    """(I - alpha(v) A) v"""
    return rsub(v, rscale(alpha_exact(A, v), rmatvec(A, v)))


def psi_exact(A: RationalMatrix, v: RationalVector) -> RationalVector:
    """M (I - alpha(v) A) v, two rAA(1) steps"""
    return rmatvec(riteration_matrix(A), phi_exact(A, v))


def upsilon_exact(A: RationalMatrix, v: RationalVector) -> RationalVector:
    """Upsilon(v) v = M (I - alpha(u) A) u with u = Psi(v) v

    Raises:
        IntermediateBreakdown: u = 0
    """
    u = psi_exact(A, v)
    if is_zero(u):
        raise IntermediateBreakdown("Psi(v) v")
    return psi_exact(A, u)


# ===== Lambda* =====


def _diagonal(A: RationalMatrix) -> RationalVector:
    n = len(A)
    if any(A[i][j] != 0 for i in range(n) for j in range(n) if i != j):
        raise UnsupportedStructure("lambda_star_exact", "exact spectra need a diagonal matrix")
    return tuple(A[i][i] for i in range(n))


def lambda_star_exact(A: RationalMatrix) -> Fraction:
    """Lambda* over the distinct diagonal entries of A, exactly"""
    a = sorted(set(_diagonal(A)))
    best = Fraction(0)
    for a_i, a_j in combinations(a, 2):
        denom = abs((1 - a_i) * a_i) + abs((1 - a_j) * a_j)
        if denom == 0:
            logger.warning(f"Lambda*: skipping pair ({a_i}, {a_j}), both in {{0, 1}}")
            continue
        term = ((1 - a_i) * (1 - a_j) * (a_i - a_j) / denom) ** 2
        best = max(best, term)
    return best


def skew_factor_exact(modulus: Fraction) -> Optional[Fraction]:
    """|m| / sqrt(1 + m^2) when it is rational (e.g. 3/4 -> 3/5), else None"""
    root = rational_sqrt(1 + modulus * modulus)
    return abs(modulus) / root if root is not None else None


# ===== Counterexamples =====

COUNTEREXAMPLES: Dict[int, Tuple[str, Tuple[str, ...], Tuple[int, ...]]] = {
    1: ("CA1", ("1", "2", "3"), (15, 5, 1)),
    2: ("CA2", ("-1/2", "-4", "2"), (38, 1, 45)),
    3: ("CA3", ("1/2", "3/2", "1/3", "-2"), (23, 60, 77, 1)),
}

PRINTED_ALPHA_U = (Fraction(1366050, 3482100), Fraction(27321, 69642))
PRINTED_W = (Fraction(0), Fraction(-1387500, 1938369), Fraction(205350, 193837))
PRINTED_PARITY_LHS = 16**2 * ((1387500 * 193837) ** 2 + (205350 * 1838369) ** 2)
PRINTED_PARITY_RHS = (15**2 + 5**2 + 1**2) * (1938369 * 193837) ** 2


def counterexample_case(case: int) -> Tuple[str, RationalMatrix, RationalVector]:
    """(name, A, v) for the three conjecture counterexamples"""
    if case not in COUNTEREXAMPLES:
        raise UnsupportedStructure("counterexample_case", f"unknown case {case}")
    name, diagonal, v = COUNTEREXAMPLES[case]
    return name, rdiag(diagonal), rvec(v)


def check_conjecture_violation(
    A: RationalMatrix, v: RationalVector, case: str = "custom"
) -> ConjectureCheck:
    """Is ||Upsilon(v) v|| / ||v|| > Lambda*? Compared squared, as exact rationals

    v with Upsilon(v) v undefined (an eigenvector of A, or A v = 0) is
    reported as not applicable.
    """
    lam = lambda_star_exact(A)
    try:
        w = upsilon_exact(A, v)
    except (IntermediateBreakdown, SingularDirection, ZeroResidual) as e:
        logger.info(f"{case}: conjecture check not applicable ({e.error_code})")
        return ConjectureCheck(
            case=case,
            ratio_sq=Fraction(0),
            lambda_star=lam,
            lambda_star_sq=lam * lam,
            violated=False,
            applicable=False,
        )
    ratio_sq = rnorm_sq(w) / rnorm_sq(v)
    violated = ratio_sq > lam * lam
    logger.debug(f"{case}: ratio^2 = {ratio_sq}, Lambda*^2 = {lam * lam}, violated={violated}")
    return ConjectureCheck(
        case=case, ratio_sq=ratio_sq, lambda_star=lam, lambda_star_sq=lam * lam, violated=violated
    )


def intermediates_case1() -> CounterexampleIntermediates:
    """alpha(v_1), u = Psi(v_1) v_1, alpha(u) and w = Upsilon(v_1) v_1 for A_1"""
    _, A, v = counterexample_case(1)
    alpha_v = alpha_exact(A, v)
    u = psi_exact(A, v)
    alpha_u = alpha_exact(A, u)
    w = psi_exact(A, u)
    return CounterexampleIntermediates(
        alpha_v=alpha_v,
        u=u,
        alpha_u=alpha_u,
        w=w,
        alpha_u_matches_printed=all(alpha_u == p for p in PRINTED_ALPHA_U),
        w_matches_printed=tuple(a == b for a, b in zip(w, PRINTED_W)),
    )


def _common_denominator(x: Sequence[Fraction]) -> int:
    lcm = 1
    for a in x:
        lcm = lcm * a.denominator // math.gcd(lcm, a.denominator)
    return lcm


def parity_certificate(A: RationalMatrix, v: RationalVector) -> ParityCertificate:
    """Certify ||Upsilon(v) v||^2 != (Lambda*)^2 ||v||^2 by parity

    With Lambda* = P/Q and common denominators L_w, L_v of w and v, the
    identity is equivalent to the integer equation

        Q^2 L_v^2 sum((L_w w_i)^2) = P^2 L_w^2 sum((L_v v_i)^2)

    Differing parities of the two sides certify the inequality without
    comparing magnitudes. The printed integer identity is checked the same way.
    """
    lam = lambda_star_exact(A)
    try:
        w = upsilon_exact(A, v)
    except (IntermediateBreakdown, SingularDirection, ZeroResidual):
        return ParityCertificate(applicable=False)

    L_w, L_v = _common_denominator(w), _common_denominator(v)
    W = [int(a * L_w) for a in w]
    V = [int(a * L_v) for a in v]
    P, Q = lam.numerator, lam.denominator
    lhs = Q * Q * L_v * L_v * sum(x * x for x in W)
    rhs = P * P * L_w * L_w * sum(x * x for x in V)
    return ParityCertificate(
        applicable=True,
        lhs=lhs,
        rhs=rhs,
        certified=(lhs - rhs) % 2 == 1,
        printed_lhs=PRINTED_PARITY_LHS,
        printed_rhs=PRINTED_PARITY_RHS,
        printed_certified=(PRINTED_PARITY_LHS - PRINTED_PARITY_RHS) % 2 == 1,
    )


def builtin_rational(name: str) -> RationalMatrix:
    """CA1..CA3 as exact matrices"""
    for case, (case_name, _, _) in COUNTEREXAMPLES.items():
        if case_name == name.upper():
            return counterexample_case(case)[1]
    raise UnsupportedStructure("builtin_rational", f"no exact form for '{name}'")


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_vector(v: Sequence[Fraction]) -> List[str]:
    return [format_rational(q) for q in v]
