"""rAA(1) conjecture counterexample tools

Exact rational checks of ||Upsilon(v) v|| / ||v|| against Lambda* for the
built-in cases or a user-supplied diagonal matrix and vector.
"""

import json
import logging
from pathlib import Path
from typing import List, Optional, Tuple

from tabulate import tabulate

from rkl.engine.exact import (
    COUNTEREXAMPLES,
    check_conjecture_violation,
    counterexample_case,
    format_rational,
    format_vector,
    intermediates_case1,
    parity_certificate,
    rmat,
    rvec,
)
from rkl.engine.exceptions import ConfigValidationError
from rkl.engine.matrix_io import read_rational_matrix, read_rational_vector
from rkl.engine.models import ConjectureCheck

logger = logging.getLogger(__name__)


def _cases(case: str) -> List[int]:
    if case == "all":
        return sorted(COUNTEREXAMPLES)
    try:
        n = int(case)
    except ValueError:
        n = -1
    if n not in COUNTEREXAMPLES:
        raise ConfigValidationError(
            f"Unknown counterexample case '{case}'",
            field="case",
            value=case,
            valid_values=[*map(str, sorted(COUNTEREXAMPLES)), "all"],
        )
    return [n]


def _check_row(check: ConjectureCheck, exact_print: bool) -> list:
    row = [check.case, check.verdict, f"{check.ratio:.4f}", f"{float(check.lambda_star):.4f}"]
    if exact_print:
        row += [format_rational(check.ratio_sq), format_rational(check.lambda_star_sq)]
    return row


def _exact_details() -> dict:
    inter = intermediates_case1()
    _, A, v = counterexample_case(1)
    cert = parity_certificate(A, v)
    return {
        "alpha_v1": format_rational(inter.alpha_v),
        "u": format_vector(inter.u),
        "alpha_u": format_rational(inter.alpha_u),
        "alpha_u_matches_printed": inter.alpha_u_matches_printed,
        "w": format_vector(inter.w),
        "w_decimal": [round(float(q), 4) for q in inter.w],
        "w_matches_printed": list(inter.w_matches_printed),
        "parity_certified": cert.certified,
        "printed_parity_certified": cert.printed_certified,
    }


def counterexample_impl(
    case: str = "all",
    exact_print: bool = False,
    matrix_path: Optional[Path] = None,
    vector_path: Optional[Path] = None,
    format: str = "table",
) -> Tuple[str, bool]:
    """Check the conjecture on built-in or custom (A, v)

    Args:
        case: '1', '2', '3' or 'all' (ignored when matrix_path is given)
        exact_print: Also print exact squared ratios and the case-1 intermediates
        matrix_path: Rational diagonal matrix file for a custom check
        vector_path: Rational vector file for a custom check
        format: Output format ('table' or 'json')

    Returns:
        Tuple of (rendered verdicts, True iff every applicable case is VIOLATED
        and at least one case was applicable)
    """
    checks: List[ConjectureCheck] = []
    if matrix_path is not None:
        if vector_path is None:
            raise ConfigValidationError("--vector is required with --matrix", field="vector")
        A = rmat(read_rational_matrix(matrix_path))
        v = rvec(read_rational_vector(vector_path))
        checks.append(check_conjecture_violation(A, v, case=Path(matrix_path).stem))
        details = None
    else:
        for n in _cases(case):
            name, A, v = counterexample_case(n)
            checks.append(check_conjecture_violation(A, v, case=name))
        details = _exact_details() if exact_print and 1 in _cases(case) else None

    applicable = [c for c in checks if c.applicable]
    all_violated = bool(applicable) and all(c.violated for c in applicable)
    for c in checks:
        logger.info(f"{c.case}: {c.verdict}")

    if format == "json":
        data = {
            "cases": [
                {
                    "case": c.case,
                    "verdict": c.verdict,
                    "ratio": c.ratio,
                    "ratio_sq": format_rational(c.ratio_sq),
                    "lambda_star": format_rational(c.lambda_star),
                }
                for c in checks
            ],
            "all_violated": all_violated,
        }
        if details:
            data["case1"] = details
        return json.dumps(data, indent=2), all_violated

    headers = ["Case", "Verdict", "||Ups(v)v||/||v||", "Lambda*"]
    if exact_print:
        headers += ["ratio^2 (exact)", "Lambda*^2 (exact)"]
    text = tabulate([_check_row(c, exact_print) for c in checks], headers=headers, tablefmt="simple")
    if details:
        rows = [[key, json.dumps(value)] for key, value in details.items()]
        text += "\n\n" + tabulate(rows, headers=["CA1", "Value"], tablefmt="simple")
    return text, all_violated
