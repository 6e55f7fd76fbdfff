"""Unit tests for the discrete and relaxed higher-order energies."""

import numpy as np
import pytest

from src.restoration.errors import ValidationError
from src.restoration.extended import NEG_INF, POS_INF
from src.restoration.relaxed_energy import (
    cusp_example,
    energy_F1_discrete,
    energy_F1_relaxed,
    energy_Fp_discrete,
    energy_Fp_relaxed,
    membership_diagnostics,
)
from src.restoration.signals import DiscreteSignal, Grid, JumpRecord, Piece, PiecewiseBVFunction
from src.restoration.weights import make_builtin_weight


def step_function(left_slope=0.0, right_slope=0.0, jump=1.0, cells=50) -> PiecewiseBVFunction:
    left = Piece(0.0, 0.5, np.zeros(cells), 0.0)
    right = Piece(0.5, 1.0, np.zeros(cells), jump)
    return PiecewiseBVFunction((left, right), (JumpRecord(0.5, jump, left_slope, right_slope),))


class TestDiscreteEnergies:
    """Tests for the Riemann-sum energies on signals."""

    def test_constant_signal(self):
        """Test constants have zero energy."""
        signal = DiscreteSignal(Grid(0.0, 1.0, 20), np.full(21, 2.5))
        assert energy_F1_discrete(signal, make_builtin_weight(2.0)) == 0.0
        assert energy_Fp_discrete(signal, make_builtin_weight(3.0, 2.0)) == 0.0

    def test_linear_signal(self):
        """Test a line has only the total variation term."""
        signal = DiscreteSignal.from_function(Grid(0.0, 1.0, 100), lambda x: 3.0 * x)
        assert energy_F1_discrete(signal, make_builtin_weight(2.0)) == pytest.approx(3.0, abs=1e-9)

    def test_parabola_p1(self):
        """Test F_1(x^2) = 1 + int_0^2 psi = 2.5 for alpha = 2."""
        signal = DiscreteSignal.from_function(Grid(0.0, 1.0, 1000), lambda x: x**2)
        assert energy_F1_discrete(signal, make_builtin_weight(2.0)) == pytest.approx(2.5, abs=5e-3)

    def test_parabola_p2(self):
        """Test F_2(x^2) = 1 + 4 int_0^1 psi(2x) dx = 3.75 for alpha = 3."""
        signal = DiscreteSignal.from_function(Grid(0.0, 1.0, 4000), lambda x: x**2)
        assert energy_Fp_discrete(signal, make_builtin_weight(3.0, 2.0)) == pytest.approx(3.75, abs=2e-3)

    def test_sine_p1(self):
        """Test F_1(sin) on [0, pi] = 2 + int_-1^1 psi = 4 for alpha = 2."""
        signal = DiscreteSignal.from_function(Grid(0.0, np.pi, 4000), np.sin)
        assert energy_F1_discrete(signal, make_builtin_weight(2.0)) == pytest.approx(4.0, abs=2e-3)

    def test_exponent_checks(self):
        """Test each discrete energy checks the weight exponent."""
        signal = DiscreteSignal(Grid(0.0, 1.0, 4), np.zeros(5))
        with pytest.raises(ValidationError):
            energy_F1_discrete(signal, make_builtin_weight(3.0, 2.0))
        with pytest.raises(ValidationError):
            energy_Fp_discrete(signal, make_builtin_weight(2.0, 1.0))


class TestRelaxedF1:
    """Tests for the p = 1 relaxation."""

    def test_unit_jump_zero_slopes(self):
        """Test a unit jump between flat pieces costs |Du| + Phi(1, 0, 0) = 1 + 4."""
        breakdown = energy_F1_relaxed(step_function(), make_builtin_weight(2.0))
        assert breakdown.tv_term == pytest.approx(1.0)
        assert breakdown.diffuse_term == pytest.approx(0.0)
        assert breakdown.jump_term == pytest.approx(4.0)
        assert breakdown.total.value == pytest.approx(5.0)

    def test_accountings_agree(self):
        """Test the Phi and Phi_hat accountings give the same total."""
        w = make_builtin_weight(2.0)
        for left_slope, right_slope in ((0.0, 0.0), (-0.5, 2.0), (NEG_INF, 3.0)):
            u = step_function(left_slope, right_slope)
            phi = energy_F1_relaxed(u, w, accounting="phi")
            phi_hat = energy_F1_relaxed(u, w, accounting="phi_hat")
            assert phi.total.value == pytest.approx(phi_hat.total.value, abs=1e-12)

    def test_linear_slopes(self):
        """Test slopes rising from 0 to 1 contribute Psi_1(1) - Psi_1(0) = 1."""
        u = PiecewiseBVFunction((Piece(0.0, 1.0, np.linspace(0.0, 1.0, 1001)),))
        breakdown = energy_F1_relaxed(u, make_builtin_weight(2.0))
        assert breakdown.diffuse_term == pytest.approx(1.0)
        assert breakdown.tv_term == pytest.approx(0.5)
        assert breakdown.jump_term == 0.0

    def test_matches_discrete_on_smooth_data(self):
        """Test relaxed and discrete energies agree for a smooth signal."""
        w = make_builtin_weight(2.0)
        signal = DiscreteSignal.from_function(Grid(0.0, 1.0, 1000), lambda x: x**2)
        relaxed = energy_F1_relaxed(PiecewiseBVFunction.smooth_from_signal(signal), w)
        assert relaxed.total.value == pytest.approx(2.5, abs=5e-3)
        assert relaxed.total.value == pytest.approx(energy_F1_discrete(signal, w), abs=5e-3)

    def test_continuous_boundary(self):
        """Test a continuous kink between pieces adds the jump of v."""
        left = Piece(0.0, 0.5, np.zeros(10), 0.0)
        right = Piece(0.5, 1.0, np.ones(10), 0.0)
        breakdown = energy_F1_relaxed(PiecewiseBVFunction((left, right)), make_builtin_weight(2.0))
        assert breakdown.diffuse_term == pytest.approx(1.0)
        assert breakdown.jump_term == 0.0

    def test_bad_accounting(self):
        """Test unknown accountings are rejected."""
        with pytest.raises(ValidationError):
            energy_F1_relaxed(step_function(), make_builtin_weight(2.0), accounting="other")


class TestRelaxedFp:
    """Tests for the p > 1 relaxation."""

    def test_finite_slope_jump_is_infinite(self):
        """Test a jump with finite one-sided slopes has infinite energy."""
        breakdown = energy_Fp_relaxed(step_function(), make_builtin_weight(3.0, 2.0))
        assert breakdown.total == POS_INF
        assert "finite" in breakdown.reason

    def test_wrong_sign_is_infinite(self):
        """Test an upward jump approached by -inf slopes has infinite energy."""
        breakdown = energy_Fp_relaxed(step_function(NEG_INF, NEG_INF), make_builtin_weight(3.0, 2.0))
        assert breakdown.total == POS_INF
        assert "wrong sign" in breakdown.reason

    def test_slope_discontinuity_is_infinite(self):
        """Test a kink without a jump is outside the p > 1 domain."""
        left = Piece(0.0, 0.5, np.zeros(10), 0.0)
        right = Piece(0.5, 1.0, np.ones(10), 0.0)
        breakdown = energy_Fp_relaxed(PiecewiseBVFunction((left, right)), make_builtin_weight(3.0, 2.0))
        assert breakdown.total == POS_INF

    def test_parabola(self):
        """Test the relaxed F_2 of x^2 is 3.75 for alpha = 3."""
        signal = DiscreteSignal.from_function(Grid(0.0, 1.0, 2000), lambda x: x**2)
        breakdown = energy_Fp_relaxed(PiecewiseBVFunction.smooth_from_signal(signal), make_builtin_weight(3.0, 2.0))
        assert breakdown.is_finite
        assert breakdown.total.value == pytest.approx(3.75, abs=5e-3)

    def test_cusp_is_finite_and_stable(self):
        """Test the cusp jump has finite energy that settles under refinement."""
        w = make_builtin_weight(3.0, 1.5)
        coarse = energy_Fp_relaxed(cusp_example(w, 0.5, cells_per_side=2000), w)
        fine = energy_Fp_relaxed(cusp_example(w, 0.5, cells_per_side=4000), w)
        assert coarse.is_finite and fine.is_finite
        assert coarse.total.value == pytest.approx(fine.total.value, rel=0.05)
        assert fine.tv_term == pytest.approx(3.0, abs=1e-9)

    def test_cusp_parameter_checks(self):
        """Test cusp_example validates p and beta."""
        with pytest.raises(ValidationError):
            cusp_example(make_builtin_weight(3.0, 2.5), 0.5)
        with pytest.raises(ValidationError):
            cusp_example(make_builtin_weight(3.0, 1.5), 0.9)


class TestMembershipDiagnostics:
    """Tests for the domain membership report."""

    def test_cusp_in_domain(self):
        """Test the cusp passes the p > 1 checks."""
        w = make_builtin_weight(3.0, 1.5)
        report = membership_diagnostics(cusp_example(w, 0.5, cells_per_side=500), w)
        assert report.in_domain is True
        assert report.jumps[0].compatible is True
        assert report.error is None

    def test_flat_jump_out_of_domain(self):
        """Test a flat-sided jump fails the p > 1 checks but passes for p = 1."""
        u = step_function()
        report = membership_diagnostics(u, make_builtin_weight(3.0, 2.0))
        assert report.in_domain is False
        assert report.jumps[0].reason is not None
        assert membership_diagnostics(u, make_builtin_weight(2.0)).in_domain is True

    def test_cantor_atoms_reported(self):
        """Test atoms are counted but not verified."""
        piece = Piece(0.0, 1.0, np.zeros(4), 0.0)
        right = Piece(1.0, 2.0, np.zeros(4), 0.5)
        u = PiecewiseBVFunction((piece, right), (), ((0.5, 0.5),))
        report = membership_diagnostics(u, make_builtin_weight(2.0))
        assert report.cantor_atoms == {"count": 1, "verified": False}
