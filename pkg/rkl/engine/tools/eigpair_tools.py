"""Nonlinear eigenpair tools

Builds a two-mode eigenpair of I2, Pi, Psi or Upsilon in closed form and
checks it by applying the map directly.
"""

import json
import logging

import numpy as np
from tabulate import tabulate

from rkl.engine.exceptions import ConfigValidationError, NotSymmetric
from rkl.engine.experiments import load_matrix
from rkl.engine.linalg import STRUCTURE_TOL, asymmetry, is_symmetric
from rkl.engine.spectral import eig_symmetric
from rkl.engine.theory import AUTO, construct_eigpair, verify_eigenpair

logger = logging.getLogger(__name__)


def eigpair_impl(
    matrix: str,
    map_kind: str,
    i1: int,
    i2: int,
    eps: str = AUTO,
    spread: bool = False,
    seed: int = 0,
    format: str = "table",
) -> str:
    """Construct and verify an eigenpair for eigenvalue groups (i1, i2)

    Args:
        matrix: Builtin name or matrix file (symmetric)
        map_kind: i2, pi, psi or upsilon
        i1, i2: Distinct eigenvalue-group indices (ascending eigenvalue order)
        eps: Coefficient ratio c_i2 / c_i1, or 'auto'
        spread: Spread each mode over its whole eigenspace
        seed: Seed for the spread coefficients
        format: Output format ('table' or 'json')

    Returns:
        Eigenvalue, eps and verification residual

    Raises:
        NotSymmetric: A is not symmetric
        SignConditionViolated: no eigenpair exists for this pair/eps
    """
    if eps != AUTO:
        try:
            float(eps)
        except ValueError:
            raise ConfigValidationError(
                f"Invalid eps '{eps}'", field="eps", value=eps, valid_values=["auto", "<float>"]
            )
    A = load_matrix(matrix)
    if not is_symmetric(A):
        raise NotSymmetric(asymmetry(A), STRUCTURE_TOL)
    spec = eig_symmetric(A)
    pair = construct_eigpair(
        spec, map_kind, i1, i2, eps=eps, spread=spread, rng=np.random.default_rng(seed)
    )
    residual = verify_eigenpair(A, pair)
    logger.info(f"eigpair {map_kind}({i1},{i2}): value {pair.value:.6g}, residual {residual:.2e}")

    data = {
        "map": pair.map_kind.value,
        "pair": [i1, i2],
        "a_i": spec.distinct_eigenvalues[i1],
        "a_j": spec.distinct_eigenvalues[i2],
        "eps": pair.eps,
        "value": pair.value,
        "residual": residual,
        "vector": pair.vector.tolist(),
    }
    if format == "json":
        return json.dumps(data, indent=2)
    rows = [
        ["Map", data["map"]],
        ["a_i, a_j", f"{data['a_i']:.6g}, {data['a_j']:.6g}"],
        ["eps", f"{data['eps']:.12g}"],
        ["Eigenvalue", f"{data['value']:.12g}"],
        ["Residual", f"{residual:.3e}"],
    ]
    return tabulate(rows, tablefmt="simple")
