"""Shared matrix / vector text format

    3
    1   0   0
    0   1/2 0
    0   0   0.25

The first line holds n, followed by n rows of n whitespace-separated entries
(a vector file holds n entries after the size line, on one or more lines).
Entries are decimals or fractions p/q. Blank lines and lines starting with #
are ignored. Rational entries stay exact through read_rational_*; the float
readers convert them by division.
"""

import logging
from fractions import Fraction
from pathlib import Path
from typing import List

import numpy as np

from rkl.engine.exceptions import MatrixParseError
from rkl.engine.linalg import as_matrix, as_vector

logger = logging.getLogger(__name__)


def parse_entry(token: str, source: str = "<text>") -> Fraction:
    """Exact value of a decimal or p/q token"""
    try:
        return Fraction(token.strip())
    except (ValueError, ZeroDivisionError):
        raise MatrixParseError(source, f"invalid entry '{token}'")


def _tokens(text: str, source: str) -> tuple[int, List[str]]:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise MatrixParseError(source, "empty input")
    try:
        n = int(lines[0])
    except ValueError:
        raise MatrixParseError(source, f"first line must be the size n, got '{lines[0]}'")
    if n < 1:
        raise MatrixParseError(source, f"size must be positive, got {n}")
    return n, " ".join(lines[1:]).split()


def parse_rational_matrix(text: str, source: str = "<text>") -> List[List[Fraction]]:
    n, tokens = _tokens(text, source)
    if len(tokens) != n * n:
        raise MatrixParseError(source, f"expected {n * n} entries for n = {n}, found {len(tokens)}")
    values = [parse_entry(t, source) for t in tokens]
    return [values[i * n : (i + 1) * n] for i in range(n)]


def parse_rational_vector(text: str, source: str = "<text>") -> List[Fraction]:
    n, tokens = _tokens(text, source)
    if len(tokens) != n:
        raise MatrixParseError(source, f"expected {n} entries, found {len(tokens)}")
    return [parse_entry(t, source) for t in tokens]


def parse_matrix(text: str, source: str = "<text>") -> np.ndarray:
    rows = parse_rational_matrix(text, source)
    return as_matrix([[float(q) for q in row] for row in rows], name=source)


def parse_vector(text: str, source: str = "<text>") -> np.ndarray:
    return as_vector([float(q) for q in parse_rational_vector(text, source)], name=source)


def _read(path: Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise MatrixParseError(str(path), f"cannot read file ({e.strerror})")
    except UnicodeDecodeError as e:
        raise MatrixParseError(str(path), f"not UTF-8 text (byte {e.start})")


def read_matrix(path: Path) -> np.ndarray:
    logger.debug(f"Reading matrix from {path}")
    return parse_matrix(_read(path), source=str(path))


def read_vector(path: Path) -> np.ndarray:
    logger.debug(f"Reading vector from {path}")
    return parse_vector(_read(path), source=str(path))


def read_rational_matrix(path: Path) -> List[List[Fraction]]:
    return parse_rational_matrix(_read(path), source=str(path))


def read_rational_vector(path: Path) -> List[Fraction]:
    return parse_rational_vector(_read(path), source=str(path))


def format_matrix(A: np.ndarray) -> str:
    """Inverse of parse_matrix (repr-exact floats)"""
    n = A.shape[0]
    rows = [" ".join(repr(float(a)) for a in row) for row in A]
    return "\n".join([str(n), *rows]) + "\n"
