"""Unit tests for GMRES(1), rAA(1) and the stationary iteration"""

import math

import numpy as np
import pytest

from rkl.engine.exceptions import Breakdown, DimensionMismatch, Diverged
from rkl.engine.linalg import alpha, iteration_matrix
from rkl.engine.models import SolveConfig, SolverKind, Termination
from rkl.engine.solvers import gmres1, raa1, solve, stationary

# ===== GMRES(1) Tests =====


class TestGmres1:
    """Tests for the minimal residual iteration"""

    def test_converges_on_spd(self, a1, rng):
        b = rng.standard_normal(3)
        x, trace = gmres1(a1, b, np.zeros(3), SolveConfig(tol=1e-12))

        assert trace.termination is Termination.CONVERGED
        np.testing.assert_allclose(a1 @ x, b, atol=1e-11)
        assert trace.residual_norms[-1] <= 1e-12

    def test_residual_norms_non_increasing(self, a2, rng):
        _, trace = gmres1(a2, np.zeros(5), rng.uniform(-1, 1, 5), SolveConfig(max_iters=200))
        norms = trace.residual_norms
        assert all(norms[k + 1] <= norms[k] * (1 + 1e-14) for k in range(len(norms) - 1))

    def test_alphas_match_step_size(self, a1):
        x0 = np.array([15.0, 5.0, 1.0])
        _, trace = gmres1(a1, np.zeros(3), x0, SolveConfig(max_iters=1, record_vectors=True))
        assert trace.alphas[0] == pytest.approx(alpha(a1, a1 @ x0))
        assert len(trace.residual_vectors) == 2

    def test_eigenvector_converges_in_one_step(self, a1):
        _, trace = gmres1(a1, np.zeros(3), np.array([0.0, 1.0, 0.0]), SolveConfig(tol=1e-30))
        assert trace.termination is Termination.CONVERGED
        assert trace.iterations == 1

    def test_zero_initial_residual(self, a1):
        _, trace = gmres1(a1, np.zeros(3), np.zeros(3))
        assert trace.termination is Termination.CONVERGED
        assert trace.iterations == 0
        assert trace.rho_series == []

    def test_indefinite_stagnates(self):
        """<r, A r> = 0 gives alpha = 0, so GMRES(1) cannot move"""
        A = np.diag([-1.0, 1.0])
        _, trace = gmres1(A, np.zeros(2), np.array([1.0, 1.0]))
        assert trace.termination is Termination.STAGNATED
        assert trace.iterations == 0

    def test_max_iters(self, a2, rng):
        _, trace = gmres1(a2, np.zeros(5), rng.uniform(-1, 1, 5), SolveConfig(max_iters=5))
        assert trace.termination is Termination.MAX_ITERS
        assert trace.iterations == 5
        assert len(trace.alphas) == 5

    def test_breakdown_carries_trace(self):
        A = np.diag([1.0, 0.0])
        with pytest.raises(Breakdown) as exc_info:
            gmres1(A, np.array([0.0, 1.0]), np.zeros(2))
        assert exc_info.value.trace.termination is Termination.BREAKDOWN
        assert exc_info.value.trace.iterations == 0

    def test_tracks_drift(self, a2, rng):
        _, trace = gmres1(
            a2, rng.standard_normal(5), np.zeros(5), SolveConfig(tol=1e-10, track_drift=True)
        )
        assert trace.true_residual_drift is not None
        assert trace.true_residual_drift < 1e-10

    def test_rho_series_from_log_norms(self, a2, rng):
        _, trace = gmres1(a2, np.zeros(5), rng.uniform(-1, 1, 5), SolveConfig(max_iters=50))
        for k in (1, 10, 50):
            assert trace.rho(k) == pytest.approx(trace.residual_norms[k] ** (1.0 / k), rel=1e-12)
            assert math.isfinite(trace.log_residual_norms[k])

    def test_dimension_mismatch(self, a1):
        with pytest.raises(DimensionMismatch):
            gmres1(a1, np.zeros(2), np.zeros(3))

    def test_deep_tolerance_keeps_contracting(self, a1):
        """Runs to 1e-250 without a spurious stagnation from underflowing inner products"""
        x0 = np.array([0.3, -0.7, 0.5])
        _, trace = gmres1(a1, np.zeros(3), x0, SolveConfig(tol=1e-250, max_iters=2000))

        assert trace.termination is Termination.CONVERGED
        assert trace.residual_norms[-1] <= 1e-250
        assert all(ratio <= 0.5 + 1e-12 for ratio in trace.step_ratios())

    def test_tiny_initial_guess_matches_unit_run(self, a2, rng):
        x0 = rng.uniform(-1, 1, 5)
        cfg = SolveConfig(tol=1e-300, max_iters=30)
        _, unit = gmres1(a2, np.zeros(5), x0, cfg)
        _, tiny = gmres1(a2, np.zeros(5), 1e-200 * x0, cfg)

        assert tiny.termination is Termination.MAX_ITERS
        np.testing.assert_allclose(tiny.alphas, unit.alphas, rtol=1e-10)


# ===== rAA(1) Tests =====


class TestRaa1:
    """Tests for restarted Anderson acceleration with window one"""

    def test_even_steps_are_fixed_point(self, a2, rng):
        x0 = rng.uniform(-1, 1, 5)
        _, trace = raa1(a2, np.zeros(5), x0, SolveConfig(max_iters=6, record_vectors=True))
        M = iteration_matrix(a2)
        vectors = trace.residual_vectors
        for k in (0, 2, 4):
            np.testing.assert_allclose(vectors[k + 1], M @ vectors[k], atol=1e-15)
            assert trace.alphas[k] is None

    def test_two_step_identity(self, a2, rng):
        """r_{k+2} = M (I - alpha(r_k) A) r_k for even k"""
        _, trace = raa1(a2, np.zeros(5), rng.uniform(-1, 1, 5), SolveConfig(max_iters=8, record_vectors=True))
        M = iteration_matrix(a2)
        vectors = trace.residual_vectors
        for k in (0, 2, 4, 6):
            r = vectors[k]
            a = alpha(a2, r)
            expected = M @ (r - a * (a2 @ r))
            np.testing.assert_allclose(vectors[k + 2], expected, rtol=1e-10, atol=1e-14)
            assert trace.alphas[k + 1] == pytest.approx(a, rel=1e-10)

    def test_converges_on_a1(self, a1, rng):
        _, trace = raa1(a1, np.zeros(3), rng.uniform(-1, 1, 3), SolveConfig(tol=1e-20, max_iters=5000))
        assert trace.termination is Termination.CONVERGED

    def test_diverges(self):
        """r_1 = M r_0 = (-6, -20) passes the threshold on the first step"""
        A = np.diag([3.0, 5.0])
        cfg = SolveConfig(max_iters=500, divergence_threshold=10.0)
        with pytest.raises(Diverged) as exc_info:
            raa1(A, np.zeros(2), np.array([1.0, 1.0]), cfg)
        assert exc_info.value.details["step"] == 1
        assert exc_info.value.trace.termination is Termination.DIVERGED

    def test_single_mode_cycle_is_exact(self):
        """On one eigenvector the mixing step removes the residual"""
        _, trace = raa1(np.diag([3.0, 5.0]), np.zeros(2), np.array([0.0, 1.0]))
        assert trace.termination is Termination.CONVERGED
        assert trace.iterations == 2

    def test_identity_converges_in_one_step(self):
        """A = I gives M = 0, so r_1 = 0 before any difference is formed"""
        _, trace = raa1(np.eye(2), np.zeros(2), np.array([1.0, 2.0]))
        assert trace.termination is Termination.CONVERGED
        assert trace.iterations == 1

    def test_tiny_initial_guess_matches_unit_run(self, a1):
        """gamma stays finite when the residual differences are near 1e-200"""
        x0 = np.array([0.3, -0.7, 0.5])
        cfg = SolveConfig(tol=1e-300, max_iters=10)
        _, unit = raa1(a1, np.zeros(3), x0, cfg)
        _, tiny = raa1(a1, np.zeros(3), 1e-200 * x0, cfg)

        assert tiny.termination is Termination.MAX_ITERS
        for k in range(1, 10, 2):
            assert math.isfinite(tiny.alphas[k])
            assert tiny.alphas[k] == pytest.approx(unit.alphas[k], rel=1e-10)


# ===== Stationary Tests =====


class TestStationary:
    """Tests for the Richardson iteration"""

    def test_contracts_with_spectral_radius(self, a2, rng):
        _, trace = stationary(a2, np.zeros(5), rng.uniform(-1, 1, 5), SolveConfig(max_iters=300))
        assert trace.step_ratios()[-1] == pytest.approx(31 / 32, abs=1e-4)
        assert all(a is None for a in trace.alphas)

    def test_diverges(self, a1):
        cfg = SolveConfig(max_iters=1000, divergence_threshold=1e10)
        with pytest.raises(Diverged):
            stationary(a1, np.zeros(3), np.ones(3), cfg)


# ===== Dispatch Tests =====


class TestSolve:
    @pytest.mark.parametrize("method", ["gmres1", "raa1", "stationary"])
    def test_dispatch_by_name(self, a2, method):
        _, trace = solve(method, a2, np.zeros(5), np.ones(5), SolveConfig(max_iters=3))
        assert trace.method is SolverKind(method)

    def test_unknown_method(self, a2):
        with pytest.raises(ValueError):
            solve("cg", a2, np.zeros(5), np.ones(5))
