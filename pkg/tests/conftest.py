"""
Pytest configuration and shared fixtures for rkl tests.

This file contains fixtures that are available to all tests.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Make the package importable without installation
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from rkl.engine.experiments import builtin_matrix
from rkl.engine.linalg import iteration_matrix
from rkl.engine.spectral import eig_symmetric, schur_skew

# ===== Matrix Fixtures =====


@pytest.fixture
def a1():
    """A1 = diag(1, 2, 3)"""
    return builtin_matrix("A1")


@pytest.fixture
def a2():
    """A2 = diag(1/2, 1/4, 1/8, 1/16, 1/32)"""
    return builtin_matrix("A2")


@pytest.fixture
def a3():
    """A3 = diag(-1, 2, 3, 4), indefinite"""
    return builtin_matrix("A3")


@pytest.fixture
def a4():
    """A4 = I - M with 8x8 skew M, moduli 1, 3/4, 1/2, 1/4"""
    return builtin_matrix("A4")


@pytest.fixture
def a4_blocks(a4):
    """Real Schur blocks of the skew part of A4"""
    return schur_skew(iteration_matrix(a4))


@pytest.fixture
def a2_spectrum(a2):
    return eig_symmetric(a2)


@pytest.fixture
def rng():
    """Deterministic generator for randomized checks"""
    return np.random.default_rng(20240611)


# ===== Helpers =====


def random_symmetric(rng, eigenvalues):
    """Q diag(eigenvalues) Q^T with a random orthogonal Q"""
    n = len(eigenvalues)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    A = Q @ np.diag(eigenvalues) @ Q.T
    return (A + A.T) / 2


@pytest.fixture
def make_symmetric(rng):
    return lambda eigenvalues: random_symmetric(rng, eigenvalues)


@pytest.fixture
def write_text(tmp_path):
    """Write a text file under tmp_path and return its path"""

    def _write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write
