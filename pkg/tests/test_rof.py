"""Unit tests for the ROF solvers and the staircase experiment."""

import math

import numpy as np
import pytest

from src.restoration.errors import NumericalFailure, UnsatisfiableConditionError, ValidationError
from src.restoration.rof import (
    MonotoneDatum,
    c1c2_identity_residual,
    generalized_inverse,
    identity_ramp,
    rof_discrete_minimizer,
    rof_energy,
    rof_monotone_minimizer,
    solve_c1_c2,
    staircase_datum,
    staircase_experiment,
)
from src.restoration.signals import DiscreteSignal, Grid


class TestMonotoneData:
    """Tests for the ramp and staircase data."""

    def test_staircase_values(self):
        """Test g_n = i/n on [(i-1)/n, i/n[ and g_n(1) = 1."""
        g = staircase_datum(4)
        np.testing.assert_allclose(g.eval(np.array([0.0, 0.1, 0.25, 0.5, 0.99, 1.0])), [0.25, 0.25, 0.5, 0.75, 1.0, 1.0])
        g.validate()

    def test_staircase_inverse(self):
        """Test g_n^-1(c) = (ceil(c n) - 1)/n."""
        g = staircase_datum(10)
        assert generalized_inverse(g, 0.0) == 0.0
        assert generalized_inverse(g, 0.1) == pytest.approx(0.0)
        assert generalized_inverse(g, 0.35) == pytest.approx(0.3)
        assert generalized_inverse(g, 0.4) == pytest.approx(0.3)
        assert generalized_inverse(g, 1.0) == pytest.approx(0.9)

    def test_inverse_level_out_of_range(self):
        """Test levels outside [0, 1] are rejected."""
        with pytest.raises(ValidationError):
            generalized_inverse(identity_ramp(), 1.5)

    def test_staircase_excess_matches_quadrature(self):
        """Test the closed-form excess integrals against quadrature."""
        closed = staircase_datum(7)
        quad = MonotoneDatum(
            a=0.0,
            b=1.0,
            eval=closed.eval,
            generalized_inverse=closed.generalized_inverse,
            integral_of_inverse=closed.integral_of_inverse,
            breakpoints=closed.breakpoints,
        )
        for c in (0.2, 0.5, 0.61, 0.9):
            residual_closed = c1c2_identity_residual(closed, c)
            residual_quad = c1c2_identity_residual(quad, c)
            assert residual_closed["lower"] < 1e-12
            assert residual_closed["upper"] < 1e-12
            assert residual_quad["lower"] < 1e-9
            assert residual_quad["upper"] < 1e-9

    def test_bad_step_count(self):
        """Test n must be a positive integer."""
        with pytest.raises(ValidationError):
            staircase_datum(0)


class TestPlateauLevels:
    """Tests for the c1/c2 conditions and the exact minimizer."""

    def test_ramp_lambda_9(self):
        """Test c1 = 1/3 and c2 = 2/3 for the ramp at lambda = 9."""
        c1, c2 = solve_c1_c2(identity_ramp(), 9.0)
        assert c1 == pytest.approx(1.0 / 3.0, abs=1e-10)
        assert c2 == pytest.approx(2.0 / 3.0, abs=1e-10)

    def test_ramp_general_lambda(self):
        """Test c1 = 1/sqrt(lambda) for the ramp."""
        for lam in (16.0, 100.0):
            c1, c2 = solve_c1_c2(identity_ramp(), lam)
            assert c1 == pytest.approx(1.0 / math.sqrt(lam), abs=1e-10)
            assert c2 == pytest.approx(1.0 - 1.0 / math.sqrt(lam), abs=1e-10)

    def test_lambda_4_unsatisfiable(self):
        """Test the plateaus merge at lambda = 4."""
        with pytest.raises(UnsatisfiableConditionError):
            solve_c1_c2(identity_ramp(), 4.0)

    def test_small_lambda_unsatisfiable(self):
        """Test no root exists when lambda is too small."""
        with pytest.raises(UnsatisfiableConditionError):
            solve_c1_c2(identity_ramp(), 1.0)

    def test_nonpositive_lambda(self):
        """Test lambda must be positive."""
        with pytest.raises(ValidationError):
            solve_c1_c2(identity_ramp(), 0.0)

    def test_staircase_lambda_9(self):
        """Test c1, c2, a_n and b_n for g_10 at lambda = 9."""
        solution = rof_monotone_minimizer(staircase_datum(10), 9.0)
        assert solution.c1 == pytest.approx((1.0 / 18.0 + 0.06) / 0.3, abs=1e-10)
        assert solution.c2 == pytest.approx((2.7 - 10.0 / 18.0) / 3.0, abs=1e-10)
        assert solution.x_low == pytest.approx(0.3)
        assert solution.x_high == pytest.approx(0.7)

    def test_minimizer_clamps_datum(self):
        """Test u = clamp(g, c1, c2)."""
        solution = rof_monotone_minimizer(identity_ramp(), 9.0)
        np.testing.assert_allclose(solution.evaluate([0.0, 0.2, 0.5, 0.9]), [1 / 3, 1 / 3, 0.5, 2 / 3], atol=1e-10)
        assert solution.to_dict()["datum"] == "ramp"


class TestDiscreteOracle:
    """Tests for the taut-string solver of the discrete ROF problem."""

    def test_matches_exact_minimizer(self):
        """Test the oracle converges to the clamped ramp."""
        grid = Grid(0.0, 1.0, 1000)
        data = DiscreteSignal.from_function(grid, lambda x: x)
        oracle = rof_discrete_minimizer(data, 9.0)
        exact = rof_monotone_minimizer(identity_ramp(), 9.0).sample(grid)
        assert np.max(np.abs(oracle.values - exact.values)) < 5e-3

    def test_matches_exact_minimizer_fine_grid(self):
        """Test the oracle matches the clamped ramp for large tube widths."""
        grid = Grid(0.0, 1.0, 2000)
        data = DiscreteSignal.from_function(grid, lambda x: x)
        oracle = rof_discrete_minimizer(data, 9.0)
        exact = rof_monotone_minimizer(identity_ramp(), 9.0).sample(grid)
        assert np.max(np.abs(oracle.values - exact.values)) <= 5e-3

    def test_monotone_staircases_stay_monotone(self):
        """Test random monotone staircases give nondecreasing minimizers within the data range."""
        rng = np.random.default_rng(11)
        grid = Grid(0.0, 1.0, 300)
        for _ in range(50):
            steps = rng.integers(2, 40)
            levels = np.sort(rng.uniform(0.0, 1.0, steps))
            values = levels[np.minimum((np.arange(grid.n + 1) * steps) // grid.n, steps - 1)]
            data = DiscreteSignal(grid, values)
            oracle = rof_discrete_minimizer(data, rng.uniform(1.0, 50.0)).values
            assert oracle.min() >= values.min() - 1e-12
            assert oracle.max() <= values.max() + 1e-12
            assert np.all(np.diff(oracle) >= -1e-12)

    def test_maximum_principle(self):
        """Test the minimizer of noisy data stays within the data range."""
        rng = np.random.default_rng(3)
        grid = Grid(0.0, 1.0, 400)
        for lam in (0.5, 9.0, 200.0):
            data = DiscreteSignal(grid, rng.standard_normal(401))
            oracle = rof_discrete_minimizer(data, lam).values
            assert oracle.min() >= data.values.min() - 1e-12
            assert oracle.max() <= data.values.max() + 1e-12

    def test_affine_equivariance(self):
        """Test u(a g + b, lambda) = a u(g, a lambda) + b for a > 0."""
        rng = np.random.default_rng(5)
        grid = Grid(0.0, 1.0, 250)
        data = DiscreteSignal(grid, np.cos(4.0 * grid.nodes) + 0.1 * rng.standard_normal(251))
        scaled = data.with_values(2.0 * data.values - 0.5)
        left = rof_discrete_minimizer(scaled, 9.0).values
        right = 2.0 * rof_discrete_minimizer(data, 18.0).values - 0.5
        np.testing.assert_allclose(left, right, atol=1e-10)

    def test_vanishing_lambda_gives_mean(self):
        """Test a negligible fidelity flattens the signal to its mean."""
        rng = np.random.default_rng(9)
        grid = Grid(0.0, 1.0, 200)
        data = DiscreteSignal(grid, rng.uniform(-1.0, 3.0, 201))
        oracle = rof_discrete_minimizer(data, 1e-6)
        np.testing.assert_allclose(oracle.values, data.values.mean(), atol=1e-10)

    def test_constant_is_fixed_point(self):
        """Test constant data is returned unchanged."""
        data = DiscreteSignal(Grid(0.0, 1.0, 50), np.full(51, 0.7))
        np.testing.assert_allclose(rof_discrete_minimizer(data, 3.0).values, 0.7)

    def test_minimizes_energy(self):
        """Test the oracle beats the datum and random perturbations of itself."""
        rng = np.random.default_rng(7)
        grid = Grid(0.0, 1.0, 200)
        data = DiscreteSignal(grid, np.sin(6.0 * grid.nodes) + 0.2 * rng.standard_normal(201))
        oracle = rof_discrete_minimizer(data, 20.0)
        best = rof_energy(oracle, data, 20.0)
        assert best <= rof_energy(data, data, 20.0)
        for _ in range(20):
            trial = oracle.with_values(oracle.values + 1e-3 * rng.standard_normal(201))
            assert best <= rof_energy(trial, data, 20.0) + 1e-12

    def test_large_lambda_keeps_data(self):
        """Test the fidelity dominates for very large lambda."""
        grid = Grid(0.0, 1.0, 20)
        data = DiscreteSignal.from_function(grid, lambda x: x**2)
        oracle = rof_discrete_minimizer(data, 1e9)
        np.testing.assert_allclose(oracle.values, data.values, atol=1e-6)


class TestStaircaseExperiment:
    """Tests for the ROF staircase experiment on g_n."""

    def test_report_for_n_10(self):
        """Test the exact equality region and the plateau limits."""
        report = staircase_experiment(10, 9.0)
        assert report.error is None
        assert report.a_n == pytest.approx(0.3)
        assert report.b_n == pytest.approx(0.7)
        assert report.max_dev == 0.0
        assert report.breaks_in_region == report.steps_in_region == 3
        assert report.err_a <= 1.0 / 10

    def test_limits_as_n_grows(self):
        """Test a_n -> 1/sqrt(lambda) and b_n -> 1 - 1/sqrt(lambda) at rate 1/n."""
        for n in (10, 100, 1000):
            report = staircase_experiment(n, 9.0)
            assert report.err_a <= 1.0 / n + 1e-9
            assert report.err_b <= 1.0 / n + 1e-9
            assert report.breaks_in_region == report.steps_in_region

    def test_grid_is_multiple_of_n(self):
        """Test the sampling grid is rounded up to a multiple of n."""
        report = staircase_experiment(30, 16.0, grid_cells=1000)
        assert report.grid_cells % 30 == 0
        assert report.grid_cells >= 1000

    def test_lambda_at_most_4(self):
        """Test lambda <= 4 is a numerical failure."""
        with pytest.raises(NumericalFailure):
            staircase_experiment(100, 4.0)

    def test_report_dumps_lambda_key(self):
        """Test the report serializes lambda under its own name."""
        record = staircase_experiment(10, 9.0).model_dump(by_alias=True)
        assert record["lambda"] == 9.0
        assert record["error"] is None
        assert "lam" not in record
