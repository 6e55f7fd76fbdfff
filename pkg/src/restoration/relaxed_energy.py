"""Higher-order energies on discrete signals and their relaxations on BV functions.

The discrete energies are Riemann sums of int |u'| + int psi(u') |u''|^p. The
relaxed energies act on PiecewiseBVFunction values through v = Psi_p(u'):
for p = 1 the curvature cost is the variation of v plus the jump penalty Phi
at every jump; for p > 1 it is int |v'|^p, and the energy is +inf unless every
jump is approached by slopes that diverge in the direction of the jump.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from src.restoration.errors import ValidationError
from src.restoration.extended import POS_INF, ExtendedReal
from src.restoration.signals import (
    DiscreteSignal,
    JumpRecord,
    Piece,
    PiecewiseBVFunction,
    derivative_samples,
    second_derivative_samples,
)
from src.restoration.weights import (
    WeightFunction,
    jump_penalty,
    jump_penalty_hat,
    psi_transform,
    psi_transform_array,
)

logger = logging.getLogger(__name__)

DIVERGENCE_SAMPLES = 5
CONTINUITY_FACTOR = 10.0
CONTINUITY_FLOOR = 1e-12


@dataclass(frozen=True)
class EnergyBreakdown:
    """The three summands of a relaxed energy and their total."""

    tv_term: float
    diffuse_term: float
    jump_term: float
    total: ExtendedReal
    reason: Optional[str] = None

    @classmethod
    def finite(cls, tv_term: float, diffuse_term: float, jump_term: float) -> "EnergyBreakdown":
        return cls(tv_term, diffuse_term, jump_term, ExtendedReal.finite(tv_term + diffuse_term + jump_term))

    @property
    def is_finite(self) -> bool:
        return self.total.is_finite

    def to_dict(self) -> dict:
        return {
            "tv_term": self.tv_term,
            "diffuse_term": self.diffuse_term,
            "jump_term": self.jump_term,
            "total": self.total.to_json(),
            "reason": self.reason,
        }


def _curvature_sum(u: DiscreteSignal, w: WeightFunction, p: float) -> float:
    """h * sum psi(m_j) |c_j|^p with m_j the mean of the two slopes around c_j."""
    d = derivative_samples(u)
    c = second_derivative_samples(u)
    m = 0.5 * (d[:-1] + d[1:])
    return u.grid.h * float(np.sum(w.eval(m) * np.abs(c) ** p))


def energy_F1_discrete(u: DiscreteSignal, w: WeightFunction) -> float:
    """Riemann sum h*sum |u'_i| + h*sum psi(u'_i) |u''_i| for p = 1."""
    if w.p != 1.0:
        raise ValidationError(f"energy_F1_discrete needs a p=1 weight, got p={w.p}")
    return float(np.sum(np.abs(np.diff(u.values)))) + _curvature_sum(u, w, 1.0)


def energy_Fp_discrete(u: DiscreteSignal, w: WeightFunction) -> float:
    """Riemann sum h*sum |u'_i| + h*sum psi(u'_i) |u''_i|^p for p > 1."""
    if not w.p > 1.0:
        raise ValidationError(f"energy_Fp_discrete needs p > 1, got p={w.p}")
    return float(np.sum(np.abs(np.diff(u.values)))) + _curvature_sum(u, w, w.p)


def _piece_v(piece: Piece, w: WeightFunction) -> np.ndarray:
    return psi_transform_array(w, piece.slopes)


def energy_F1_relaxed(u: PiecewiseBVFunction, w: WeightFunction, accounting: str = "phi") -> EnergyBreakdown:
    """Relaxed energy for p = 1.

    With accounting="phi" the variation of v is taken off the jump set and
    each jump costs Phi(nu, t1, t2). With accounting="phi_hat" the variation
    of v includes its jumps between the one-sided limits and each jump costs
    Phi_hat. The two totals agree.

    Args:
        u: Finite representation of the function.
        w: A p=1 weight.
        accounting: "phi" or "phi_hat".

    Returns:
        The EnergyBreakdown, always finite.
    """
    if w.p != 1.0:
        raise ValidationError(f"energy_F1_relaxed needs a p=1 weight, got p={w.p}")
    if accounting not in ("phi", "phi_hat"):
        raise ValidationError(f"accounting must be 'phi' or 'phi_hat', got {accounting!r}")

    diffuse = 0.0
    for piece in u.pieces:
        diffuse += float(np.sum(np.abs(np.diff(_piece_v(piece, w)))))

    jump_term = 0.0
    for _, left, right, record in u.boundaries():
        v_left = psi_transform(w, float(left.slopes[-1]))
        v_right = psi_transform(w, float(right.slopes[0]))
        if record is None:
            diffuse += abs(v_right - v_left)
            continue
        v_minus = psi_transform(w, record.left_slope)
        v_plus = psi_transform(w, record.right_slope)
        diffuse += abs(v_minus - v_left) + abs(v_right - v_plus)
        if accounting == "phi":
            jump_term += jump_penalty(w, record.nu, record.left_slope, record.right_slope)
        else:
            diffuse += abs(v_plus - v_minus)
            jump_term += jump_penalty_hat(w, record.nu, record.left_slope, record.right_slope)

    breakdown = EnergyBreakdown.finite(u.total_variation(), diffuse, jump_term)
    logger.debug(f"energy_F1_relaxed({accounting}): {breakdown.to_dict()}")
    return breakdown


def _jump_domain_violation(record: JumpRecord) -> Optional[str]:
    expected = POS_INF if record.nu == 1 else -POS_INF
    for side, slope in (("left", record.left_slope), ("right", record.right_slope)):
        if slope.is_finite:
            return f"jump at x={record.x} has a finite {side} slope {slope.value}"
        if slope != expected:
            return f"jump at x={record.x} is approached by {side} slopes of the wrong sign"
    return None


def energy_Fp_relaxed(u: PiecewiseBVFunction, w: WeightFunction) -> EnergyBreakdown:
    """Relaxed energy for p > 1: |u'| + int |v'|^p on its domain, +inf elsewhere.

    The Sobolev term is a difference-quotient sum over the derivative samples
    of each piece. At a jump v reaches M (upward) or 0 (downward) at the jump
    point, half a cell away from the nearest sample.
    """
    p = w.p
    if not p > 1.0:
        raise ValidationError(f"energy_Fp_relaxed needs p > 1, got p={p}")
    tv = u.total_variation()

    for record in u.jumps:
        reason = _jump_domain_violation(record)
        if reason is not None:
            return EnergyBreakdown(tv, 0.0, 0.0, POS_INF, reason)
    violations = _slope_continuity_violations(u)
    if violations:
        return EnergyBreakdown(
            tv, 0.0, 0.0, POS_INF, f"derivative is discontinuous at x={violations[0]}"
        )

    diffuse = 0.0
    for piece in u.pieces:
        dv = np.diff(_piece_v(piece, w))
        diffuse += float(np.sum(np.abs(dv) ** p)) * piece.spacing ** (1.0 - p)

    for _, left, right, record in u.boundaries():
        v_left = psi_transform(w, float(left.slopes[-1]))
        v_right = psi_transform(w, float(right.slopes[0]))
        if record is None:
            distance = 0.5 * (left.spacing + right.spacing)
            diffuse += abs(v_right - v_left) ** p * distance ** (1.0 - p)
            continue
        v_minus = psi_transform(w, record.left_slope)
        v_plus = psi_transform(w, record.right_slope)
        diffuse += abs(v_minus - v_left) ** p * (0.5 * left.spacing) ** (1.0 - p)
        diffuse += abs(v_right - v_plus) ** p * (0.5 * right.spacing) ** (1.0 - p)

    return EnergyBreakdown.finite(tv, diffuse, 0.0)


def _slope_continuity_violations(u: PiecewiseBVFunction) -> list:
    """Continuous piece boundaries where the slope jumps beyond the local scale."""
    violations = []
    for x, left, right, record in u.boundaries():
        if record is not None:
            continue
        local = [CONTINUITY_FLOOR]
        if left.slopes.size > 1:
            local.append(abs(float(left.slopes[-1] - left.slopes[-2])))
        if right.slopes.size > 1:
            local.append(abs(float(right.slopes[1] - right.slopes[0])))
        mismatch = abs(float(right.slopes[0] - left.slopes[-1]))
        if mismatch > CONTINUITY_FACTOR * max(local) + CONTINUITY_FLOOR:
            violations.append(x)
    return violations


def _diverges_towards(samples: np.ndarray, direction: int) -> bool:
    """True when the samples move strictly in `direction` as they approach the jump."""
    if samples.size < 2:
        return False
    steps = np.diff(samples) * direction
    return bool(np.all(steps > 0))


class JumpCompatibility(BaseModel):
    """Whether one jump belongs to the domain of the relaxation."""

    x: float = Field(description="Jump position")
    nu: int = Field(description="Jump orientation, +1 or -1")
    compatible: bool = Field(default=True, description="Whether the jump is admissible")
    reason: Optional[str] = Field(default=None, description="Why the jump is not admissible")


class MembershipReport(BaseModel):
    """Finite-resolution domain diagnostics of a piecewise function."""

    p: float = Field(description="Regularization exponent")
    v_variation: float = Field(description="Variation of v = Psi_p(u')")
    v_sobolev_p: float = Field(description="Discrete integral of |v'|^p")
    slope_continuity_violations: List[float] = Field(
        default_factory=list, description="Continuous boundaries where u' jumps"
    )
    jumps: List[JumpCompatibility] = Field(default_factory=list, description="One entry per jump")
    cantor_atoms: dict = Field(default_factory=dict, description="Atom count; atoms are never verified")
    in_domain: bool = Field(description="Whether every check passed")
    error: Optional[str] = Field(default=None, description="Error message if the diagnostics failed")


def membership_diagnostics(u: PiecewiseBVFunction, w: WeightFunction) -> MembershipReport:
    """Finite-resolution checks of membership in the domain of the relaxation.

    Args:
        u: Finite representation of the function.
        w: The weight, whose p selects the p=1 or p>1 domain.

    Returns:
        The variation of v, the discrete int |v'|^p, slope continuity
        violations (p > 1), per-jump compatibility, the Cantor atom status
        and an overall `in_domain` flag.
    """
    p = w.p
    v_variation = 0.0
    v_sobolev = 0.0
    for piece in u.pieces:
        dv = np.diff(_piece_v(piece, w))
        v_variation += float(np.sum(np.abs(dv)))
        v_sobolev += float(np.sum(np.abs(dv) ** p)) * piece.spacing ** (1.0 - p)

    continuity = _slope_continuity_violations(u) if p > 1 else []

    jumps = []
    for _, left, right, record in u.boundaries():
        if record is None:
            continue
        reason = None
        if p > 1:
            reason = _jump_domain_violation(record)
            if reason is None:
                tail = left.slopes[-DIVERGENCE_SAMPLES:]
                head = right.slopes[:DIVERGENCE_SAMPLES][::-1]
                if not (_diverges_towards(tail, record.nu) and _diverges_towards(head, record.nu)):
                    reason = f"slopes next to x={record.x} do not diverge towards the jump"
        jumps.append(JumpCompatibility(x=record.x, nu=record.nu, compatible=reason is None, reason=reason))

    return MembershipReport(
        p=p,
        v_variation=v_variation,
        v_sobolev_p=v_sobolev,
        slope_continuity_violations=[float(x) for x in continuity],
        jumps=jumps,
        cantor_atoms={"count": len(u.cantor_atoms), "verified": False},
        in_domain=not continuity and all(entry.compatible for entry in jumps),
    )


def cusp_example(weight: WeightFunction, beta: float, cells_per_side: int = 2000) -> PiecewiseBVFunction:
    """u = -|x|^beta on ]-1, 0[ and 1 + x^beta on ]0, 1[.

    A function with a jump whose relaxed p>1 energy is finite: both one-sided
    slopes blow up to +inf at the jump.

    Raises:
        ValidationError: Unless 1 < p < (alpha+1)/2 and
            0 < beta < 1 - (p-1)/(alpha-p) for the built-in weight.
    """
    if weight.alpha is None:
        raise ValidationError("cusp_example needs a weight from the built-in family")
    alpha, p = weight.alpha, weight.p
    if not 1.0 < p < (alpha + 1.0) / 2.0:
        raise ValidationError(f"cusp_example needs 1 < p < (alpha+1)/2, got p={p}, alpha={alpha}")
    beta_max = 1.0 - (p - 1.0) / (alpha - p)
    if not 0.0 < beta < beta_max:
        raise ValidationError(f"cusp_example needs 0 < beta < {beta_max}, got {beta}")

    x_left = np.linspace(-1.0, 0.0, cells_per_side + 1)
    x_right = np.linspace(0.0, 1.0, cells_per_side + 1)
    left = Piece.from_values(-1.0, 0.0, -np.abs(x_left) ** beta)
    right = Piece.from_values(0.0, 1.0, 1.0 + x_right**beta)
    record = JumpRecord(x=0.0, jump=1.0, left_slope=POS_INF, right_slope=POS_INF)
    return PiecewiseBVFunction((left, right), (record,))
