"""Unit tests for the matrix / vector text format"""

from fractions import Fraction

import numpy as np
import pytest

from rkl.engine.exceptions import MatrixParseError
from rkl.engine.matrix_io import (
    format_matrix,
    parse_entry,
    parse_matrix,
    parse_rational_matrix,
    parse_rational_vector,
    parse_vector,
    read_matrix,
    read_rational_vector,
    read_vector,
)

SAMPLE = """# comment line
3
1   0   0
0   1/2 0
0   0   0.25
"""


class TestParseEntry:
    @pytest.mark.parametrize(
        "token,expected",
        [("1", Fraction(1)), ("1/4", Fraction(1, 4)), ("0.25", Fraction(1, 4)), ("-3/6", Fraction(-1, 2))],
    )
    def test_valid(self, token, expected):
        assert parse_entry(token) == expected

    @pytest.mark.parametrize("token", ["abc", "1/0", "1//2"])
    def test_invalid(self, token):
        with pytest.raises(MatrixParseError):
            parse_entry(token)


class TestParseMatrix:
    """Tests for matrix and vector parsing"""

    def test_float_matrix(self):
        A = parse_matrix(SAMPLE)
        np.testing.assert_array_equal(A, np.diag([1.0, 0.5, 0.25]))

    def test_rational_matrix_stays_exact(self):
        rows = parse_rational_matrix(SAMPLE)
        assert rows[1][1] == Fraction(1, 2)
        assert all(isinstance(q, Fraction) for row in rows for q in row)

    def test_vector_over_several_lines(self):
        v = parse_rational_vector("3\n15 5\n1\n")
        assert v == [15, 5, 1]
        np.testing.assert_array_equal(parse_vector("2\n1/2 -1"), [0.5, -1.0])

    def test_wrong_entry_count(self):
        with pytest.raises(MatrixParseError, match="expected 4 entries"):
            parse_matrix("2\n1 2 3\n")

    def test_empty(self):
        with pytest.raises(MatrixParseError, match="empty"):
            parse_matrix("# nothing\n\n")

    def test_bad_size_line(self):
        with pytest.raises(MatrixParseError):
            parse_matrix("two\n1 0\n0 1\n")

    def test_non_positive_size(self):
        with pytest.raises(MatrixParseError):
            parse_vector("0\n")


class TestFiles:
    """Tests for file readers and the writer"""

    def test_read_write_matrix(self, tmp_path, a4):
        path = tmp_path / "a4.txt"
        path.write_text(format_matrix(a4), encoding="utf-8")
        np.testing.assert_array_equal(read_matrix(path), a4)

    def test_read_vector(self, write_text):
        path = write_text("v.txt", "3\n15 5 1\n")
        np.testing.assert_array_equal(read_vector(path), [15.0, 5.0, 1.0])
        assert read_rational_vector(path) == [15, 5, 1]

    def test_missing_file(self, tmp_path):
        with pytest.raises(MatrixParseError, match="cannot read"):
            read_matrix(tmp_path / "missing.txt")

    def test_binary_file(self, tmp_path):
        path = tmp_path / "binary.txt"
        path.write_bytes(b"\xff\xfe2\n1 0\n0 1\n")
        with pytest.raises(MatrixParseError, match="UTF-8") as exc_info:
            read_matrix(path)
        assert exc_info.value.error_code == "MATRIX_PARSE_ERROR"
        with pytest.raises(MatrixParseError):
            read_rational_vector(path)
