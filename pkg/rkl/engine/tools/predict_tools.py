"""Convergence-factor prediction tools

Worst-case root-convergence factors of GMRES(1) for symmetric A and for
A = I - M with skew M, plus the rAA(1) quantity Lambda*.
"""

import json
import logging
from fractions import Fraction
from typing import Any, Dict, List, Optional

from tabulate import tabulate

from rkl.engine.exceptions import UnsupportedStructure
from rkl.engine.experiments import load_matrix
from rkl.engine.linalg import is_skew_symmetric, is_symmetric, iteration_matrix
from rkl.engine.spectral import eig_symmetric, schur_skew
from rkl.engine.theory import (
    lambda_star_raa1,
    restricted_worst_case,
    skew_factor,
    worst_case_gmres1,
    worst_case_skew,
)

logger = logging.getLogger(__name__)


def as_fraction_text(x: float, max_denominator: int = 1000, tol: float = 1e-12) -> str:
    """'15/17 ≈ 0.88235' when x is a small-denominator rational, else '0.70711'"""
    q = Fraction(x).limit_denominator(max_denominator)
    if q.denominator > 1 and abs(float(q) - x) <= tol:
        return f"{q.numerator}/{q.denominator} ≈ {x:.5f}"
    return f"{x:.5f}"


def _predict_symmetric(A, restrict: Optional[List[int]]) -> Dict[str, Any]:
    spec = eig_symmetric(A)
    if restrict:
        report = restricted_worst_case(spec, restrict)
        spec = spec.restrict(restrict)
    else:
        report = worst_case_gmres1(spec)
    return {
        "regime": report.regime.value,
        "rho_star": report.worst_case_rho,
        "lambda_star": lambda_star_raa1(spec),
        "eigenvalues": report.eigenvalues,
        "restricted_to": report.restricted_to,
        "attaining_pairs": report.attaining_pairs,
        "pairs": [row.model_dump() for row in report.per_pair_table],
    }


def _predict_skew(M, restrict: Optional[List[int]]) -> Dict[str, Any]:
    blocks = schur_skew(M)
    report = worst_case_skew(blocks, restrict)
    rho = report.subset_rho if report.subset_rho is not None else report.rho_star
    return {
        "regime": "SkewM",
        "rho_star": rho,
        "rho_star_ss": report.rho_star,
        "rho_star_raa1": report.rho_star_raa1,
        "alpha_range": list(report.alpha_range),
        "positive_definite_bound": report.positive_definite_bound,
        "restricted_to": report.subset,
        "blocks": [
            {"j": j, "modulus": m, "factor": skew_factor(m)} for j, m in enumerate(report.moduli)
        ],
    }


def predict_impl(matrix: str, restrict: Optional[List[int]] = None, format: str = "table") -> str:
    """Predict worst-case factors for a builtin or file matrix

    Args:
        matrix: Builtin name or matrix file
        restrict: Eigenvalue-group indices (symmetric A) or Schur-block indices (skew M)
        format: Output format ('table' or 'json')

    Returns:
        Summary line plus per-pair (or per-block) table, or JSON

    Raises:
        UnsupportedStructure: A is neither symmetric nor I - skew
    """
    A = load_matrix(matrix)
    M = iteration_matrix(A)
    if is_symmetric(A):
        data = _predict_symmetric(A, restrict)
    elif is_skew_symmetric(M):
        data = _predict_skew(M, restrict)
    else:
        raise UnsupportedStructure("predict", "A must be symmetric or I - skew")
    logger.info(f"predict {matrix}: rho* = {data['rho_star']:.6g} ({data['regime']})")

    if format == "json":
        return json.dumps({"matrix": matrix, **data}, indent=2)

    lines = [f"rho* = {as_fraction_text(data['rho_star'])}, regime={data['regime']}"]
    if data["regime"] == "SkewM":
        lines.append(f"rho*_ss = {as_fraction_text(data['rho_star_ss'])}")
        lines.append(f"rAA(1) comparator = {data['rho_star_raa1']:.5f}")
        low, high = data["alpha_range"]
        lines.append(f"alpha range = [{as_fraction_text(low)}, {as_fraction_text(high)}]")
        rows = [[b["j"], f"{b['modulus']:.6g}", f"{b['factor']:.6g}"] for b in data["blocks"]]
        table = tabulate(rows, headers=["Block", "|m_j|", "Factor"], tablefmt="simple")
    else:
        lines.append(f"Lambda* = {as_fraction_text(data['lambda_star'])}")
        rows = [
            [p["i"], p["j"], f"{p['a_i']:.6g}", f"{p['a_j']:.6g}", f"{p['value']:.6g}"]
            for p in data["pairs"]
        ]
        table = tabulate(rows, headers=["i", "j", "a_i", "a_j", "rho_ij"], tablefmt="simple")
    return "\n".join(lines) + ("\n\n" + table if rows else "")
