"""Generalized Cantor sets and the fixtures built on them.

At level n the construction removes, from each of the 2^(n-1) closed
intervals of length delta^(n-1) left by level n-1, the open middle interval
of length delta^(n-1) * (1 - 2 delta). Geometry is kept in exact rational
arithmetic.

The fixture w_delta is 2^(s n) + phi(...) on each removed interval of level
n and +inf on the remaining set; Psi_1(w_delta) has bounded variation when
alpha > (s+1)/s and delta < 1/2^(s+1).
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, List, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field
from scipy import integrate

from src.restoration.errors import ValidationError
from src.restoration.extended import POS_INF, ExtendedReal
from src.restoration.signals import Piece, PiecewiseBVFunction
from src.restoration.weights import WeightFunction, psi_transform_array, tail_integral_upper

logger = logging.getLogger(__name__)

MAX_DENOMINATOR = 10**9
VARIATION_SAMPLES = 257

Rational = Union[Fraction, float, int, str]


@dataclass(frozen=True)
class RemovedInterval:
    level: int
    index: int
    left: Fraction
    right: Fraction

    @property
    def length(self) -> Fraction:
        return self.right - self.left

    @property
    def midpoint(self) -> Fraction:
        return (self.left + self.right) / 2


@dataclass(frozen=True, eq=False)
class CantorFixture:
    delta: Fraction
    depth: int
    removed_intervals: tuple
    s: Optional[float] = None
    alpha: Optional[float] = None
    phi: Optional[Callable] = None

    def level(self, n: int) -> list:
        return [interval for interval in self.removed_intervals if interval.level == n]

    def remaining_intervals(self) -> list:
        """Closed intervals (left, right) left after the last level."""
        edges = [Fraction(0)]
        for interval in sorted(self.removed_intervals, key=lambda i: i.left):
            edges.extend([interval.left, interval.right])
        edges.append(Fraction(1))
        return list(zip(edges[0::2], edges[1::2]))


def _as_fraction(value: Rational) -> Fraction:
    if isinstance(value, float):
        return Fraction(value).limit_denominator(MAX_DENOMINATOR)
    return Fraction(value)


def check_pairing(delta: Rational, s: float, alpha: float) -> None:
    """Reject (alpha, s, delta) unless alpha > (s+1)/s and delta < 1/2^(s+1)."""
    if not s > 0:
        raise ValidationError(f"The growth exponent s must be positive, got {s}")
    if not alpha > (s + 1.0) / s:
        raise ValidationError(f"Need alpha > (s+1)/s = {(s + 1.0) / s}, got alpha={alpha}")
    if not float(delta) < 2.0 ** -(s + 1.0):
        raise ValidationError(f"Need delta < 1/2^(s+1) = {2.0 ** -(s + 1.0)}, got delta={float(delta)}")


def build_cantor_intervals(
    delta: Rational,
    depth: int,
    s: Optional[float] = None,
    alpha: Optional[float] = None,
    phi: Optional[Callable] = None,
) -> CantorFixture:
    """Enumerate all removed intervals up to `depth`.

    Args:
        delta: Scale factor in ]0, 1/2[; floats are converted to the nearest
            fraction with denominator at most 1e9.
        depth: Number of levels m >= 1.
        s: Growth exponent of w_delta (optional).
        alpha: Exponent of the paired weight (optional, needs s).
        phi: Convex bump on ]0, 1[; defaults to default_phi.

    Returns:
        The CantorFixture.
    """
    delta = _as_fraction(delta)
    if not 0 < delta < Fraction(1, 2):
        raise ValidationError(f"delta must lie in ]0, 1/2[, got {delta}")
    if int(depth) != depth or depth < 1:
        raise ValidationError(f"depth must be a positive integer, got {depth}")
    if alpha is not None:
        if s is None:
            raise ValidationError("Pairing a weight exponent alpha needs the growth exponent s")
        check_pairing(delta, s, alpha)
    elif s is not None and not s > 0:
        raise ValidationError(f"The growth exponent s must be positive, got {s}")

    removed = []
    remaining = [(Fraction(0), Fraction(1))]
    for n in range(1, int(depth) + 1):
        cut = delta**n
        next_remaining = []
        for k, (left, right) in enumerate(remaining, start=1):
            removed.append(RemovedInterval(n, k, left + cut, right - cut))
            next_remaining.extend([(left, left + cut), (right - cut, right)])
        remaining = next_remaining
    logger.debug(f"Cantor construction delta={delta}, depth={depth}: {len(removed)} removed intervals")
    return CantorFixture(delta, int(depth), tuple(removed), s, alpha, phi)


def remaining_measure(fix: CantorFixture) -> Fraction:
    """Exact measure of the closed set left at the fixture depth, (2 delta)^m."""
    return 1 - sum((interval.length for interval in fix.removed_intervals), Fraction(0))


def intervals_frame(fix: CantorFixture) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "level": [i.level for i in fix.removed_intervals],
            "index": [i.index for i in fix.removed_intervals],
            "left": [float(i.left) for i in fix.removed_intervals],
            "right": [float(i.right) for i in fix.removed_intervals],
            "length": [float(i.length) for i in fix.removed_intervals],
        }
    )


def cantor_function(fix: CantorFixture, x):
    """f_m(x) = int_0^x g_m, the prelimit Cantor function at the fixture depth.

    Uses self-similarity: on [0, delta] f_m is half of f_{m-1} rescaled, on
    [1 - delta, 1] it is 1/2 plus the same, and 1/2 in between.
    """
    values = np.asarray(x, dtype=float)
    if np.any(values < 0.0) or np.any(values > 1.0):
        raise ValidationError("cantor_function is defined on [0, 1]")
    delta = float(fix.delta)
    y = values.copy()
    offset = np.zeros_like(y)
    scale = np.ones_like(y)
    settled = np.zeros(y.shape, dtype=bool)
    for _ in range(fix.depth):
        left = ~settled & (y < delta)
        right = ~settled & (y > 1.0 - delta)
        middle = ~settled & ~left & ~right
        offset = np.where(middle | right, offset + scale / 2.0, offset)
        settled = settled | middle
        y = np.where(left, y / delta, np.where(right, (y - (1.0 - delta)) / delta, y))
        scale = np.where(settled, scale, scale / 2.0)
    result = np.where(settled, offset, offset + scale * y)
    return float(result) if result.ndim == 0 else result


@lru_cache(maxsize=1)
def _phi_normalizer() -> float:
    value, _ = integrate.quad(lambda x: -math.log(4.0 * x * (1.0 - x)), 0.0, 1.0, epsabs=1e-13, epsrel=1e-13)
    return 1.0 / value


def default_phi(x):
    """c0 * (-log(4x(1-x))): convex on ]0, 1[, zero at 1/2, unit integral."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        result = -_phi_normalizer() * np.log(4.0 * x * (1.0 - x))
    return float(result) if result.ndim == 0 else result


def _require_growth(fix: CantorFixture) -> float:
    if fix.s is None:
        raise ValidationError("This fixture operation needs the growth exponent s")
    return fix.s


def _phi_kn(fix: CantorFixture, interval: RemovedInterval, x):
    phi = fix.phi or default_phi
    local = (np.asarray(x, dtype=float) - float(interval.midpoint)) / float(interval.length) + 0.5
    return 2.0 ** (fix.s * interval.level) + phi(local)


def w_delta(fix: CantorFixture, x: float) -> ExtendedReal:
    """w_delta truncated at the fixture depth, +inf on the remaining set."""
    _require_growth(fix)
    if not 0.0 < x < 1.0:
        raise ValidationError(f"w_delta is defined on ]0, 1[, got {x}")
    point = Fraction(x)
    for interval in fix.removed_intervals:
        if interval.left < point < interval.right:
            return ExtendedReal.finite(float(_phi_kn(fix, interval, x)))
    return POS_INF


def w_delta_integral(fix: CantorFixture) -> float:
    """Truncated integral sum_{n<=m} 2^(n-1) (2^(s n) + 1) delta^(n-1) (1 - 2 delta)."""
    s = _require_growth(fix)
    delta = float(fix.delta)
    return sum(
        2.0 ** (n - 1) * (2.0 ** (s * n) + 1.0) * delta ** (n - 1) * (1.0 - 2.0 * delta)
        for n in range(1, fix.depth + 1)
    )


def w_delta_integral_limit(fix: CantorFixture) -> float:
    """Limit of w_delta_integral as the depth grows; finite for delta < 1/2^(s+1)."""
    s = _require_growth(fix)
    delta = float(fix.delta)
    ratio = 2.0 ** (s + 1.0) * delta
    if ratio >= 1.0:
        return math.inf
    return (1.0 - 2.0 * delta) * (2.0**s / (1.0 - ratio) + 1.0 / (1.0 - 2.0 * delta))


def interval_variation(fix: CantorFixture, w: WeightFunction, interval: RemovedInterval) -> float:
    """Variation of v_m = Psi_1(phi_kn) over one removed interval, summed on samples.

    v_m equals M at both ends of the interval, so the samples are closed by M.
    """
    x = np.linspace(float(interval.left), float(interval.right), VARIATION_SAMPLES)[1:-1]
    v = psi_transform_array(w, _phi_kn(fix, interval, x))
    v = np.concatenate(([w.total_mass], v, [w.total_mass]))
    return float(np.sum(np.abs(np.diff(v))))


def series_bound(alpha: float, s: float, c: float = 1.0) -> float:
    """(2c/(alpha-1)) * sum_{n>=1} 2^-(s n (alpha-1) - n + 1), in closed form."""
    exponent = s * (alpha - 1.0) - 1.0
    if exponent <= 0:
        return math.inf
    return 2.0 * c / (alpha - 1.0) * 2.0 ** -(s * (alpha - 1.0)) / (1.0 - 2.0**-exponent)


class LevelVariation(BaseModel):
    """Variation of Psi_1(w_delta) over the removed intervals of one level."""

    level: int = Field(description="Construction level n")
    intervals: int = Field(description="Removed intervals at this level")
    per_interval_variation: float = Field(description="Largest sampled variation over one interval")
    closed_form: float = Field(description="2 * integral of psi over [2^(s n), +inf[")
    abs_error: float = Field(description="Largest |sampled - closed form|")


class VariationReport(BaseModel):
    """Var(v_m) against the series bound for one fixture and weight."""

    delta: float = Field(description="Cantor ratio")
    s: Optional[float] = Field(default=None, description="Growth exponent")
    alpha: Optional[float] = Field(default=None, description="Tail exponent of psi")
    depth: int = Field(description="Number of levels m")
    levels: List[LevelVariation] = Field(default_factory=list, description="One entry per level")
    total_variation: Optional[float] = Field(default=None, description="Var(v_m)")
    series_bound: Optional[float] = Field(default=None, description="Closed-form bound on Var(v_m)")
    within_bound: Optional[bool] = Field(default=None, description="Whether Var(v_m) <= bound")
    removed_count: Optional[int] = Field(default=None, description="Removed intervals up to the fixture depth")
    remaining_measure: Optional[str] = Field(default=None, description="Exact measure of the remaining set")
    remaining_measure_float: Optional[float] = Field(default=None, description="Measure of the remaining set")
    w_integral: Optional[float] = Field(default=None, description="Truncated integral of w_delta")
    w_integral_limit: Optional[float] = Field(default=None, description="Limit of the truncated integral")
    error: Optional[str] = Field(default=None, description="Why the bound does not apply")


def variation_bound_check(fix: CantorFixture, w: WeightFunction, depth: Optional[int] = None) -> VariationReport:
    """Compare Var(v_m) with the per-interval closed form and the series bound.

    Args:
        fix: A fixture with growth exponent s.
        w: A p=1 weight with algebraic tail psi(t) <= c/t^alpha (c=1 for the
            built-in family).
        depth: Number of levels m, at most the fixture depth.

    Returns:
        The report; `error` describes an incompatible (alpha, s, delta).
    """
    m = fix.depth if depth is None else int(depth)
    report = VariationReport(delta=float(fix.delta), s=fix.s, alpha=w.alpha, depth=m)
    if w.p != 1.0 or w.alpha is None:
        report.error = "variation bound needs a p=1 weight with a power-law tail"
        return report
    if not 1 <= m <= fix.depth:
        report.error = f"depth must lie in [1, {fix.depth}], got {m}"
        return report
    try:
        check_pairing(fix.delta, _require_growth(fix), w.alpha)
    except ValidationError as e:
        report.error = str(e)
        return report

    total = 0.0
    for n in range(1, m + 1):
        closed_form = 2.0 * tail_integral_upper(w, 2.0 ** (fix.s * n))
        variations = [interval_variation(fix, w, interval) for interval in fix.level(n)]
        total += sum(variations)
        report.levels.append(
            LevelVariation(
                level=n,
                intervals=len(variations),
                per_interval_variation=max(variations),
                closed_form=closed_form,
                abs_error=max(abs(v - closed_form) for v in variations),
            )
        )
    bound = series_bound(w.alpha, fix.s)
    report.total_variation = total
    report.series_bound = bound
    report.within_bound = total <= bound
    logger.info(f"Cantor variation depth={m}: Var={total:.12g}, bound={bound:.12g}")
    return report


def to_piecewise(fix: CantorFixture, cells: int = 4096, cap: float = 1e6) -> PiecewiseBVFunction:
    """Prelimit u_delta = int w_delta + f_delta as a PiecewiseBVFunction.

    Slopes are w_delta at cell midpoints, capped at `cap`; the Cantor part is
    one atom of mass 2^-m at the midpoint of every remaining interval.
    """
    s = _require_growth(fix)
    if not cap > 0:
        raise ValidationError(f"cap must be positive, got {cap}")
    ordered = sorted(fix.removed_intervals, key=lambda i: i.left)
    lefts = np.array([float(i.left) for i in ordered])
    rights = np.array([float(i.right) for i in ordered])
    levels = np.array([i.level for i in ordered], dtype=float)

    centers = (np.arange(cells) + 0.5) / cells
    slot = np.clip(np.searchsorted(lefts, centers, side="right") - 1, 0, None)
    inside = (centers > lefts[slot]) & (centers < rights[slot])
    local = (centers - lefts[slot]) / (rights[slot] - lefts[slot])
    phi = fix.phi or default_phi
    slopes = np.full(cells, cap)
    slopes[inside] = np.minimum(2.0 ** (s * levels[slot[inside]]) + phi(local[inside]), cap)

    mass = 2.0 ** -fix.depth
    atoms = tuple((float((left + right) / 2), mass) for left, right in fix.remaining_intervals())
    return PiecewiseBVFunction((Piece(0.0, 1.0, slopes),), (), atoms)
