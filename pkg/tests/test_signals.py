"""Unit tests for grids, discrete signals and piecewise BV functions."""

import numpy as np
import pandas as pd
import pytest

from src.restoration.errors import ValidationError
from src.restoration.extended import POS_INF
from src.restoration.signals import (
    DiscreteSignal,
    Grid,
    JumpRecord,
    Piece,
    PiecewiseBVFunction,
    derivative_samples,
    jump_detector,
    read_signal_csv,
    second_derivative_samples,
    total_variation,
    write_signal_csv,
)


def unit_step(cells_per_side: int = 50) -> PiecewiseBVFunction:
    left = Piece(0.0, 0.5, np.zeros(cells_per_side), 0.0)
    right = Piece(0.5, 1.0, np.zeros(cells_per_side), 1.0)
    return PiecewiseBVFunction((left, right), (JumpRecord(0.5, 1.0, 0.0, 0.0),))


class TestGrid:
    """Tests for the uniform grid."""

    def test_nodes_and_spacing(self):
        """Test nodes, midpoints and h."""
        grid = Grid(0.0, 2.0, 4)
        assert grid.h == 0.5
        np.testing.assert_allclose(grid.nodes, [0.0, 0.5, 1.0, 1.5, 2.0])
        np.testing.assert_allclose(grid.midpoints, [0.25, 0.75, 1.25, 1.75])

    def test_invalid_grids(self):
        """Test empty intervals and too few cells are rejected."""
        with pytest.raises(ValidationError):
            Grid(1.0, 1.0, 10)
        with pytest.raises(ValidationError):
            Grid(0.0, 1.0, 1)


class TestDiscreteSignal:
    """Tests for discrete signals and their difference operators."""

    def test_length_must_match_grid(self):
        """Test the value array needs n + 1 entries."""
        with pytest.raises(ValidationError):
            DiscreteSignal(Grid(0.0, 1.0, 10), np.zeros(10))

    def test_values_are_read_only(self):
        """Test the stored array cannot be modified."""
        signal = DiscreteSignal(Grid(0.0, 1.0, 4), np.zeros(5))
        with pytest.raises(ValueError):
            signal.values[0] = 1.0

    def test_differences_of_parabola(self):
        """Test forward slopes and second differences of x^2."""
        grid = Grid(0.0, 1.0, 100)
        signal = DiscreteSignal.from_function(grid, lambda x: x**2)
        np.testing.assert_allclose(derivative_samples(signal), 2.0 * grid.midpoints, atol=1e-12)
        np.testing.assert_allclose(second_derivative_samples(signal), 2.0, atol=1e-8)
        assert total_variation(signal) == pytest.approx(1.0)

    def test_constant_from_function(self):
        """Test scalar-valued functions are broadcast over the nodes."""
        signal = DiscreteSignal.from_function(Grid(0.0, 1.0, 8), lambda x: 3.0)
        assert np.all(signal.values == 3.0)
        assert total_variation(signal) == 0.0

    def test_add_requires_same_grid(self):
        """Test signals on different grids cannot be added."""
        a = DiscreteSignal(Grid(0.0, 1.0, 4), np.zeros(5))
        b = DiscreteSignal(Grid(0.0, 2.0, 4), np.ones(5))
        with pytest.raises(ValidationError):
            a + b
        assert np.all((a + a.with_values(np.ones(5))).values == 1.0)


class TestJumpDetector:
    """Tests for jump detection on discrete signals."""

    def test_single_step(self):
        """Test a unit step is reported once with its orientation."""
        grid = Grid(0.0, 1.0, 100)
        signal = DiscreteSignal(grid, np.where(grid.nodes < 0.5, 0.0, 1.0))
        records = jump_detector(signal)
        assert len(records) == 1
        assert records[0].jump == pytest.approx(1.0)
        assert records[0].nu == 1
        assert records[0].x == pytest.approx(0.495)
        assert records[0].left_slope.value == 0.0

    def test_smooth_signal_has_no_jumps(self):
        """Test a steep but resolved ramp is not flagged."""
        grid = Grid(0.0, 1.0, 200)
        signal = DiscreteSignal.from_function(grid, lambda x: np.tanh(10.0 * (x - 0.5)))
        assert jump_detector(signal) == []

    def test_downward_step(self):
        """Test a downward step has nu = -1."""
        grid = Grid(0.0, 1.0, 40)
        signal = DiscreteSignal(grid, np.where(grid.nodes < 0.3, 2.0, 0.5))
        records = jump_detector(signal)
        assert [r.nu for r in records] == [-1]

    def test_kappa_must_be_positive(self):
        """Test the threshold factor is validated."""
        with pytest.raises(ValidationError):
            jump_detector(DiscreteSignal(Grid(0.0, 1.0, 4), np.zeros(5)), kappa=0.0)


class TestPiecewiseBVFunction:
    """Tests for the finite BV representation."""

    def test_unit_step_variation(self):
        """Test |u'| of a unit step is 1."""
        assert unit_step().total_variation() == pytest.approx(1.0)

    def test_evaluate_is_right_continuous(self):
        """Test values on both sides of the jump."""
        u = unit_step()
        assert u.evaluate(0.25) == 0.0
        assert u.evaluate(0.5) == 1.0
        assert u.evaluate(1.0) == 1.0
        with pytest.raises(ValidationError):
            u.evaluate(1.5)

    def test_evaluate_linear_piece(self):
        """Test reconstruction from slopes."""
        piece = Piece.from_values(0.0, 1.0, np.linspace(1.0, 3.0, 11))
        u = PiecewiseBVFunction((piece,))
        assert u.evaluate(0.5) == pytest.approx(2.0)
        assert u.evaluate(0.55) == pytest.approx(2.1)

    def test_jump_value_mismatch(self):
        """Test a recorded jump must match the values on both sides."""
        left = Piece(0.0, 0.5, np.zeros(4), 0.0)
        right = Piece(0.5, 1.0, np.zeros(4), 2.0)
        with pytest.raises(ValidationError):
            PiecewiseBVFunction((left, right), (JumpRecord(0.5, 1.0, 0.0, 0.0),))
        with pytest.raises(ValidationError):
            PiecewiseBVFunction((left, right))

    def test_pieces_must_partition(self):
        """Test gaps between pieces are rejected."""
        with pytest.raises(ValidationError):
            PiecewiseBVFunction((Piece(0.0, 0.4, [0.0]), Piece(0.5, 1.0, [0.0])))

    def test_jump_off_boundary(self):
        """Test jumps must sit at interior piece boundaries."""
        with pytest.raises(ValidationError):
            PiecewiseBVFunction((Piece(0.0, 1.0, [0.0]),), (JumpRecord(0.3, 1.0, 0.0, 0.0),))

    def test_cantor_atoms(self):
        """Test atoms add to values and to the variation."""
        left = Piece(0.0, 0.5, [0.0], 0.0)
        right = Piece(0.5, 1.0, [0.0], 0.25)
        u = PiecewiseBVFunction((left, right), (), ((0.25, 0.25),))
        assert u.evaluate(0.2) == 0.0
        assert u.evaluate(0.3) == 0.25
        assert u.total_variation() == pytest.approx(0.25)

    def test_dict_round_trip(self):
        """Test the JSON description used by energy-eval."""
        data = {
            "pieces": [
                {"left": -1.0, "right": 0.0, "values": [0.0, 0.5, 1.0]},
                {"left": 0.0, "right": 1.0, "slopes": [1.0, 1.0], "start_value": 3.0},
            ],
            "jumps": [{"x": 0.0, "jump": 2.0, "left_slope": "+inf", "right_slope": "+inf"}],
        }
        u = PiecewiseBVFunction.from_dict(data)
        assert u.jumps[0].left_slope == POS_INF
        again = PiecewiseBVFunction.from_dict(u.to_dict())
        assert again.total_variation() == pytest.approx(u.total_variation())
        assert again.evaluate(0.5) == pytest.approx(3.5)


class TestSignalCsv:
    """Tests for reading and writing signal CSV files."""

    def test_write_then_read(self, tmp_path):
        """Test values survive a write and a read."""
        grid = Grid(0.0, 1.0, 10)
        signal = DiscreteSignal.from_function(grid, np.sin)
        path = tmp_path / "signal.csv"
        write_signal_csv(signal, path)
        back = read_signal_csv(path)
        assert back.grid.n == 10
        np.testing.assert_array_equal(back.values, signal.values)

    def test_bad_header(self, tmp_path):
        """Test the header must be x,value."""
        path = tmp_path / "bad.csv"
        pd.DataFrame({"t": [0.0, 0.5, 1.0], "y": [0.0, 0.0, 0.0]}).to_csv(path, index=False)
        with pytest.raises(ValidationError):
            read_signal_csv(path)

    def test_non_uniform_spacing(self, tmp_path):
        """Test non-uniform x columns are rejected."""
        path = tmp_path / "uneven.csv"
        pd.DataFrame({"x": [0.0, 0.1, 0.5, 1.0], "value": [0.0] * 4}).to_csv(path, index=False)
        with pytest.raises(ValidationError):
            read_signal_csv(path)

    def test_too_short(self, tmp_path):
        """Test at least three rows are needed."""
        path = tmp_path / "short.csv"
        pd.DataFrame({"x": [0.0, 1.0], "value": [0.0, 1.0]}).to_csv(path, index=False)
        with pytest.raises(ValidationError):
            read_signal_csv(path)
