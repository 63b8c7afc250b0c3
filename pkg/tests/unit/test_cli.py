"""Unit tests for the command line interface

Runs main() in-process and checks output and exit status for each subcommand.
"""

import csv
import json
import os

import pytest

from rkl import __version__
from rkl.cli import build_parser, main


ENV_VARS = ("RKL_THREADS", "RKL_LOG_LEVEL", "RKL_OUTPUT_DIR")


@pytest.fixture(autouse=True)
def isolated_env(tmp_path, monkeypatch):
    """No stray .env and no inherited RKL_* settings"""
    monkeypatch.chdir(tmp_path)
    for var in ENV_VARS:
        monkeypatch.delenv(var, raising=False)
    yield
    # load_dotenv writes straight into os.environ
    for var in ENV_VARS:
        os.environ.pop(var, None)


def error_of(capsys):
    """The JSON error response, skipping any log lines before it"""
    lines = capsys.readouterr().err.splitlines()
    return json.loads("\n".join(lines[lines.index("{"):]))


# ===== Parser Tests =====


class TestParser:
    """Tests for argument parsing"""

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc_info:
            main(["--version"])
        assert exc_info.value.code == 0
        assert __version__ in capsys.readouterr().out

    def test_subcommand_required(self):
        with pytest.raises(SystemExit) as exc_info:
            main([])
        assert exc_info.value.code == 2

    def test_pair_needs_two_indices(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["eigpair", "--matrix", "A1", "--map", "pi", "--pair", "0"])

    def test_restrict_list(self):
        args = build_parser().parse_args(["predict", "--matrix", "A3", "--restrict", "1,2,3"])
        assert args.restrict == [1, 2, 3]

    def test_log_level_choices(self):
        args = build_parser().parse_args(["--log-level", "debug", "predict", "--matrix", "A1"])
        assert args.log_level == "DEBUG"
        with pytest.raises(SystemExit):
            build_parser().parse_args(["--log-level", "loud", "predict", "--matrix", "A1"])

    def test_missing_env_file(self, tmp_path, capsys):
        code = main(["--env-file", str(tmp_path / "missing.env"), "predict", "--matrix", "A1"])
        assert code == 2
        assert "not found" in capsys.readouterr().err

    def test_env_file_loaded(self, tmp_path, capsys, monkeypatch):
        env = tmp_path / "custom.env"
        env.write_text(f"RKL_OUTPUT_DIR={tmp_path / 'from_env'}\n", encoding="utf-8")
        cfg = tmp_path / "run.cfg"
        cfg.write_text("matrix=A1\ntrials=1\nmax_iters=5\n", encoding="utf-8")

        assert main(["--env-file", str(env), "measure", "--config", str(cfg)]) == 0
        assert (tmp_path / "from_env" / "run.csv").exists()


# ===== predict Tests =====


class TestPredict:
    def test_a1_table(self, capsys):
        assert main(["predict", "--matrix", "A1"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("rho* = 1/2 ≈ 0.50000, regime=SymmetricDefinite")
        assert "Lambda* = 1/16" in out

    def test_a2_json(self, capsys):
        assert main(["--format", "json", "predict", "--matrix", "A2"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["rho_star"] == pytest.approx(15 / 17)
        assert data["regime"] == "SymmetricDefinite"
        assert len(data["pairs"]) == 10

    def test_a3_indefinite_and_restricted(self, capsys):
        assert main(["predict", "--matrix", "A3"]) == 0
        assert "regime=SymmetricIndefinite" in capsys.readouterr().out
        assert main(["--format", "json", "predict", "--matrix", "A3", "--restrict", "1,2,3"]) == 0
        assert json.loads(capsys.readouterr().out)["rho_star"] == pytest.approx(1 / 3)

    def test_a4_skew(self, capsys):
        assert main(["predict", "--matrix", "A4", "--restrict", "1,2,3"]) == 0
        out = capsys.readouterr().out
        assert "regime=SkewM" in out
        assert "0.60000" in out
        assert "rho*_ss = " in out and "0.70711" in out

    def test_unknown_matrix(self, capsys):
        assert main(["predict", "--matrix", "A9"]) == 2
        assert error_of(capsys)["error_code"] == "UNKNOWN_MATRIX"

    def test_restrict_out_of_range(self, capsys):
        assert main(["predict", "--matrix", "A1", "--restrict", "0,7"]) == 2
        assert error_of(capsys)["error_code"] == "BLOCK_INDEX_OUT_OF_RANGE"

    def test_binary_matrix_file(self, tmp_path, capsys):
        path = tmp_path / "binary.txt"
        path.write_bytes(b"\xff\xfe\x00\x01")
        assert main(["predict", "--matrix", str(path)]) == 2
        assert error_of(capsys)["error_code"] == "MATRIX_PARSE_ERROR"

    def test_unsupported_structure(self, tmp_path, capsys):
        path = tmp_path / "upper.txt"
        path.write_text("2\n2 1\n0 3\n", encoding="utf-8")
        assert main(["predict", "--matrix", str(path)]) == 3
        assert error_of(capsys)["error_code"] == "UNSUPPORTED_STRUCTURE"

    def test_internal_error(self, capsys, mocker):
        mocker.patch(
            "rkl.engine.tools.predict_tools.predict_impl", side_effect=RuntimeError("boom")
        )
        assert main(["predict", "--matrix", "A1"]) == 1
        err = error_of(capsys)
        assert err["error_code"] == "INTERNAL_ERROR"
        assert "boom" in err["details"]


# ===== solve Tests =====


class TestSolve:
    def test_trace_written(self, tmp_path, capsys):
        trace = tmp_path / "traces" / "a1.csv"
        code = main(["solve", "--matrix", "A1", "--x0", "rand:3", "--trace", str(trace)])
        assert code == 0
        assert "Converged" in capsys.readouterr().out
        with open(trace, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        assert rows[0][:2] == ["trial", "k"]
        assert rows[-1][-1] == "Converged"

    def test_json_summary(self, capsys):
        assert main(["--format", "json", "solve", "--matrix", "A2", "--max-iters", "5"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["termination"] == "MaxIters"
        assert data["iterations"] == 5

    def test_divergence_writes_partial_trace(self, tmp_path, capsys):
        trace = tmp_path / "div.csv"
        code = main(
            ["solve", "--matrix", "A1", "--x0", "ones", "--method", "stationary", "--trace", str(trace)]
        )
        assert code == 3
        assert error_of(capsys)["error_code"] == "DIVERGED"
        assert trace.exists()

    def test_bad_vector_spec(self, capsys):
        assert main(["solve", "--matrix", "A1", "--x0", "rand:abc"]) == 2
        assert error_of(capsys)["error_code"] == "VALIDATION_ERROR"

    def test_vector_file(self, tmp_path, capsys):
        vec = tmp_path / "x0.txt"
        vec.write_text("3\n0 1 0\n", encoding="utf-8")
        assert main(["--format", "json", "solve", "--matrix", "A1", "--x0", str(vec)]) == 0
        assert json.loads(capsys.readouterr().out)["iterations"] == 1


# ===== measure / figure Tests =====


class TestMeasure:
    def test_writes_csv_and_metadata(self, tmp_path, capsys):
        cfg = tmp_path / "a3_masked.cfg"
        cfg.write_text("matrix=A3\ntrials=2\nseed=4\nmask=0\n", encoding="utf-8")
        out = tmp_path / "results"

        assert main(["--format", "json", "measure", "--config", str(cfg), "--out", str(out)]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["theoretical_rho"] == pytest.approx(1 / 3)
        assert summary["bound_violations"] == 0
        assert (out / "a3_masked.csv").exists()
        meta = json.loads((out / "a3_masked.json").read_text(encoding="utf-8"))
        assert meta["config"]["mask"] == [0]

    def test_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("matrix=A1\ntrails=2\n", encoding="utf-8")
        assert main(["measure", "--config", str(cfg), "--out", str(tmp_path)]) == 2
        assert error_of(capsys)["context"]["field"] == "trails"


class TestFigure:
    def test_structured_figure(self, tmp_path, capsys):
        out = tmp_path / "figs"
        assert main(["figure", "--name", "fig3", "--out", str(out)]) == 0
        for suffix in ("csv", "json", "svg"):
            assert (out / f"fig3_A2_structured.{suffix}").exists()
        assert "A2_structured" in capsys.readouterr().out

    def test_trials_must_be_positive(self, tmp_path, capsys):
        assert main(["figure", "--name", "fig1", "--trials", "0", "--out", str(tmp_path)]) == 2

    def test_unknown_figure(self, tmp_path, capsys):
        assert main(["figure", "--name", "fig7", "--out", str(tmp_path)]) == 2
        assert error_of(capsys)["error_code"] == "VALIDATION_ERROR"


# ===== eigpair Tests =====


class TestEigpair:
    def test_upsilon(self, capsys):
        code = main(["--format", "json", "eigpair", "--matrix", "A1", "--map", "upsilon", "--pair", "1,2"])
        assert code == 0
        data = json.loads(capsys.readouterr().out)
        assert data["value"] == pytest.approx(1 / 16)
        assert data["residual"] <= 1e-10

    def test_sign_condition(self, capsys):
        assert main(["eigpair", "--matrix", "A2", "--map", "psi", "--pair", "0,1"]) == 3
        assert error_of(capsys)["error_code"] == "SIGN_CONDITION_VIOLATED"

    def test_invalid_eps(self, capsys):
        assert main(["eigpair", "--matrix", "A1", "--map", "pi", "--pair", "0,1", "--eps", "x"]) == 2

    def test_not_symmetric(self, capsys):
        assert main(["eigpair", "--matrix", "A4", "--map", "pi", "--pair", "0,1"]) == 2
        assert error_of(capsys)["error_code"] == "NOT_SYMMETRIC"


# ===== counterexample Tests =====


class TestCounterexample:
    def test_all_violated(self, capsys):
        assert main(["counterexample", "--case", "all"]) == 0
        out = capsys.readouterr().out
        for name in ("CA1", "CA2", "CA3"):
            assert name in out
        assert out.count("VIOLATED") == 3

    def test_exact_print(self, capsys):
        assert main(["--format", "json", "counterexample", "--case", "1", "--exact-print"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["all_violated"]
        assert data["case1"]["alpha_v1"] == "139/167"
        assert data["case1"]["parity_certified"]
        assert data["cases"][0]["lambda_star"] == "1/16"

    def test_custom_not_violated(self, tmp_path, capsys):
        matrix = tmp_path / "A.txt"
        matrix.write_text("2\n2 0\n0 3\n", encoding="utf-8")
        vector = tmp_path / "v.txt"
        vector.write_text("2\n3 2\n", encoding="utf-8")

        code = main(["counterexample", "--matrix", str(matrix), "--vector", str(vector)])
        assert code == 3
        assert "NOT-VIOLATED" in capsys.readouterr().out

    def test_custom_needs_vector(self, tmp_path, capsys):
        matrix = tmp_path / "A.txt"
        matrix.write_text("2\n2 0\n0 3\n", encoding="utf-8")
        assert main(["counterexample", "--matrix", str(matrix)]) == 2

    def test_unknown_case(self, capsys):
        assert main(["counterexample", "--case", "9"]) == 2
        assert error_of(capsys)["error_code"] == "VALIDATION_ERROR"
