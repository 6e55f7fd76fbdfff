"""ROF total-variation model in 1D.

Two solvers live here:
  - an exact minimizer for normalized monotone data, where the solution is
    the datum clamped between two plateau levels c1 < c2;
  - a grid-exact discrete oracle for arbitrary data, minimizing
    sum |u_{i+1} - u_i| + lambda * h * sum (u_i - g_i)^2 by the taut-string
    method. The h weighting makes the fidelity a Riemann sum, so discrete
    minimizers converge to continuum ones as h -> 0.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate, optimize

from src.restoration.errors import (
    NumericalFailure,
    UnsatisfiableConditionError,
    ValidationError,
)
from src.restoration.signals import DiscreteSignal, Grid

logger = logging.getLogger(__name__)

BISECTION_XTOL = 1e-12
BISECTION_MAXITER = 200
QUAD_TOL = 1e-13
QUAD_LIMIT = 400
PLATEAU_GAP = 1e-9
BREAK_TOL = 1e-12
MONOTONE_CHECK_POINTS = 2049
TAUT_WINDOW = 64


@dataclass(frozen=True, eq=False)
class MonotoneDatum:
    """A nondecreasing datum g: [a, b] -> [0, 1].

    `lower_excess(c)` and `upper_excess(c)` are the left-hand sides
    int_a^{g^-1(c)} (c - g) dx and int_{g^-1(c)}^b (g - c) dx; when absent
    they are computed by adaptive quadrature.
    """

    a: float
    b: float
    eval: Callable[[np.ndarray], np.ndarray]
    generalized_inverse: Callable[[float], float]
    integral_of_inverse: Callable[[float], float]
    lower_excess: Optional[Callable[[float], float]] = None
    upper_excess: Optional[Callable[[float], float]] = None
    breakpoints: tuple = ()
    name: str = "custom"

    def __post_init__(self):
        if not self.a < self.b:
            raise ValidationError(f"A monotone datum needs a < b, got [{self.a}, {self.b}]")

    def validate(self) -> None:
        """Check monotonicity and range on a dense sample."""
        x = np.linspace(self.a, self.b, MONOTONE_CHECK_POINTS)
        values = np.asarray(self.eval(x), dtype=float)
        if np.any(np.diff(values) < -1e-14):
            raise ValidationError(f"Datum {self.name} is not nondecreasing")
        if values.min() < -1e-14 or values.max() > 1 + 1e-14:
            raise ValidationError(f"Datum {self.name} leaves [0, 1]")


@dataclass(frozen=True, eq=False)
class RofSolution:
    """u = c1 on [a, x_low], g on ]x_low, x_high], c2 on ]x_high, b]."""

    c1: float
    c2: float
    x_low: float
    x_high: float
    lam: float
    datum: MonotoneDatum

    def evaluate(self, x):
        return np.clip(self.datum.eval(np.asarray(x, dtype=float)), self.c1, self.c2)

    def sample(self, grid: Grid) -> DiscreteSignal:
        return DiscreteSignal(grid, self.evaluate(grid.nodes))

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "c1": self.c1,
            "c2": self.c2,
            "x_low": self.x_low,
            "x_high": self.x_high,
            "datum": self.datum.name,
        }


def identity_ramp(a: float = 0.0, b: float = 1.0) -> MonotoneDatum:
    """g(x) = (x - a) / (b - a) with closed-form excess integrals."""
    length = b - a

    def g(x):
        return np.clip((np.asarray(x, dtype=float) - a) / length, 0.0, 1.0)

    return MonotoneDatum(
        a=a,
        b=b,
        eval=g,
        generalized_inverse=lambda c: a + c * length,
        integral_of_inverse=lambda c: a * c + length * c * c / 2.0,
        lower_excess=lambda c: length * c * c / 2.0,
        upper_excess=lambda c: length * (1.0 - c) ** 2 / 2.0,
        name="ramp",
    )


def staircase_datum(n: int) -> MonotoneDatum:
    """g_n(x) = i/n on [(i-1)/n, i/n[, i = 1..n, and g_n(1) = 1."""
    if int(n) != n or n < 1:
        raise ValidationError(f"Staircase needs a positive integer step count, got {n}")
    n = int(n)

    def g(x):
        # The guard keeps nodes such as i/n that round below the step on it.
        k = np.floor(n * np.asarray(x, dtype=float) + 1e-9)
        return np.clip(k + 1.0, 1.0, n) / n

    def step_index(c: float) -> int:
        return max(math.ceil(c * n - 1e-12), 1)

    def inverse(c: float) -> float:
        return 0.0 if c == 0 else (step_index(c) - 1) / n

    def integral_of_inverse(c: float) -> float:
        if c == 0:
            return 0.0
        k = step_index(c)
        # steps 1..k-1 contribute (i-1)/n over a width 1/n each, step k the rest
        full = (k - 1) * (k - 2) / (2.0 * n * n)
        return full + (k - 1) / n * (c - (k - 1) / n)

    def lower_excess(c: float) -> float:
        if c == 0:
            return 0.0
        k = step_index(c)
        return (k - 1) * c / n - (k - 1) * k / (2.0 * n * n)

    def upper_excess(c: float) -> float:
        k = step_index(c) if c > 0 else 1
        step_sum = (n * (n + 1) - (k - 1) * k) / 2.0
        return (step_sum / n - (n - k + 1) * c) / n

    return MonotoneDatum(
        a=0.0,
        b=1.0,
        eval=g,
        generalized_inverse=inverse,
        integral_of_inverse=integral_of_inverse,
        lower_excess=lower_excess,
        upper_excess=upper_excess,
        breakpoints=tuple(i / n for i in range(1, n)),
        name=f"staircase_{n}",
    )


def generalized_inverse(g: MonotoneDatum, c: float) -> float:
    """g^-1(c) = inf{x in [a, b] : g(x) >= c}, left-continuous."""
    if not 0.0 <= c <= 1.0:
        raise ValidationError(f"Level c must lie in [0, 1], got {c}")
    if c == 0:
        return g.a
    return float(g.generalized_inverse(c))


def _lower_lhs(g: MonotoneDatum, c: float) -> float:
    if g.lower_excess is not None:
        return float(g.lower_excess(c))
    upper = generalized_inverse(g, c)
    if upper <= g.a:
        return 0.0
    points = [p for p in g.breakpoints if g.a < p < upper] or None
    value, _ = integrate.quad(
        lambda x: c - float(g.eval(x)),
        g.a,
        upper,
        points=points,
        epsabs=QUAD_TOL,
        epsrel=QUAD_TOL,
        limit=QUAD_LIMIT,
    )
    return value


def _upper_lhs(g: MonotoneDatum, c: float) -> float:
    if g.upper_excess is not None:
        return float(g.upper_excess(c))
    lower = generalized_inverse(g, c)
    if lower >= g.b:
        return 0.0
    points = [p for p in g.breakpoints if lower < p < g.b] or None
    value, _ = integrate.quad(
        lambda x: float(g.eval(x)) - c,
        lower,
        g.b,
        points=points,
        epsabs=QUAD_TOL,
        epsrel=QUAD_TOL,
        limit=QUAD_LIMIT,
    )
    return value


def solve_c1_c2(g: MonotoneDatum, lam: float) -> tuple:
    """Solve the two plateau conditions by bisection.

    c1 solves 2*lam*int_a^{g^-1(c)} (c - g) dx = 1 and c2 solves
    2*lam*int_{g^-1(c)}^b (g - c) dx = 1.

    Args:
        g: Normalized monotone datum.
        lam: Fidelity parameter (> 0).

    Returns:
        The pair (c1, c2) with 0 < c1 < c2 < 1.

    Raises:
        UnsatisfiableConditionError: If a left-hand side never reaches 1 on
            ]0, 1[ or the roots do not satisfy c1 < c2.
    """
    if not lam > 0 or not math.isfinite(lam):
        raise ValidationError(f"lambda must be positive and finite, got {lam}")

    def lower_residual(c):
        return 2.0 * lam * _lower_lhs(g, c) - 1.0

    def upper_residual(c):
        return 2.0 * lam * _upper_lhs(g, c) - 1.0

    if lower_residual(1.0) <= 0:
        raise UnsatisfiableConditionError(
            f"Condition for c1 unsatisfiable at lambda={lam}: left-hand side stays below 1"
        )
    if upper_residual(0.0) <= 0:
        raise UnsatisfiableConditionError(
            f"Condition for c2 unsatisfiable at lambda={lam}: left-hand side stays below 1"
        )

    c1 = optimize.bisect(lower_residual, 0.0, 1.0, xtol=BISECTION_XTOL, maxiter=BISECTION_MAXITER)
    c2 = optimize.bisect(upper_residual, 0.0, 1.0, xtol=BISECTION_XTOL, maxiter=BISECTION_MAXITER)
    logger.debug(f"solve_c1_c2({g.name}, lambda={lam}): c1={c1!r}, c2={c2!r}")

    if c2 - c1 <= PLATEAU_GAP or not 0 < c1 < c2 < 1:
        raise UnsatisfiableConditionError(
            f"Condition unsatisfiable at lambda={lam}: need 0 < c1 < c2 < 1, got c1={c1}, c2={c2}"
        )
    return c1, c2


def c1c2_identity_residual(g: MonotoneDatum, c: float) -> dict:
    """Cross-check the plateau integrals against inverse-function identities.

    int_a^{g^-1(c)} (c - g) dx = int_0^c (g^-1(y) - a) dy and
    int_{g^-1(c)}^b (g - c) dx = int_c^1 (b - g^-1(y)) dy. On [0, 1] the
    first reduces to int_0^c g^-1.
    """
    if not 0.0 <= c <= 1.0:
        raise ValidationError(f"Level c must lie in [0, 1], got {c}")
    inverse_lower = float(g.integral_of_inverse(c)) - g.a * c
    inverse_upper = g.b * (1.0 - c) - (float(g.integral_of_inverse(1.0)) - float(g.integral_of_inverse(c)))
    return {
        "lower": abs(_lower_lhs(g, c) - inverse_lower),
        "upper": abs(_upper_lhs(g, c) - inverse_upper),
    }


def rof_monotone_minimizer(g: MonotoneDatum, lam: float) -> RofSolution:
    """Exact minimizer of |u'|(]a,b[) + lam * int (u - g)^2 for monotone g."""
    c1, c2 = solve_c1_c2(g, lam)
    return RofSolution(
        c1=c1,
        c2=c2,
        x_low=generalized_inverse(g, c1),
        x_high=generalized_inverse(g, c2),
        lam=lam,
        datum=g,
    )


def rof_energy(u: DiscreteSignal, g: DiscreteSignal, lam: float) -> float:
    """Discrete ROF energy sum |u_{i+1} - u_i| + lam * h * sum (u_i - g_i)^2."""
    if u.grid != g.grid:
        raise ValidationError("u and g must share a grid")
    residual = u.values - g.values
    return float(np.sum(np.abs(np.diff(u.values))) + lam * g.grid.h * np.sum(residual * residual))


def _taut_string(y: np.ndarray, weight: float) -> np.ndarray:
    """Exact solution of min 1/2 sum (x - y)^2 + weight * sum |x_{i+1} - x_i|.

    The running sum X_k = x_0 + ... + x_{k-1} of the minimizer is the
    shortest path from (0, 0) to (n, Y_n) inside the tube |X_k - Y_k| <= weight
    around the running sum Y of the data. The path is built segment by
    segment: from the current anchor, the feasible slopes towards the lower
    and upper tube walls form a funnel, and the first index where the funnel
    closes tells on which wall the string bends.
    """
    n = y.size
    cum = np.concatenate(([0.0], np.cumsum(y)))
    lower = cum - weight
    upper = cum + weight
    lower[0] = upper[0] = 0.0
    lower[-1] = upper[-1] = cum[-1]

    x = np.empty(n)
    anchor, height = 0, 0.0
    while anchor < n:
        width = min(TAUT_WINDOW, n - anchor)
        while True:
            stop = anchor + width
            steps = np.arange(1, width + 1)
            lo = (lower[anchor + 1 : stop + 1] - height) / steps
            hi = (upper[anchor + 1 : stop + 1] - height) / steps
            lo_max = np.maximum.accumulate(lo)
            hi_min = np.minimum.accumulate(hi)
            clash = np.flatnonzero(lo_max > hi_min)
            if clash.size or stop == n:
                break
            width = min(2 * width, n - anchor)

        if clash.size == 0:
            x[anchor:] = (cum[n] - height) / (n - anchor)
            break

        # lo[0] <= hi[0], so the funnel closes at k >= 1 and on one wall only
        k = clash[0]
        if lo[k] > hi_min[k - 1]:
            j = int(np.argmin(hi[:k]))
            slope, height_next = hi[j], upper[anchor + j + 1]
        else:
            j = int(np.argmax(lo[:k]))
            slope, height_next = lo[j], lower[anchor + j + 1]
        end = anchor + j + 1
        x[anchor:end] = slope
        anchor, height = end, height_next
    return x


def rof_discrete_minimizer(g: DiscreteSignal, lam: float) -> DiscreteSignal:
    """Exact minimizer of sum |u_{i+1} - u_i| + lam * h * sum (u_i - g_i)^2.

    Dividing by 2*lam*h turns the functional into a 1D TV proximal problem
    with weight 1 / (2*lam*h), solved exactly by the taut-string method.
    """
    if not lam > 0 or not math.isfinite(lam):
        raise ValidationError(f"lambda must be positive and finite, got {lam}")
    weight = 1.0 / (2.0 * lam * g.grid.h)
    values = _taut_string(np.asarray(g.values, dtype=float), weight)
    return g.with_values(values)


class StaircaseReport(BaseModel):
    """ROF reconstruction of the staircase datum g_n at one (n, lambda)."""

    model_config = ConfigDict(populate_by_name=True)

    lam: float = Field(alias="lambda", description="Fidelity parameter")
    n: int = Field(description="Number of steps of g_n")
    c1: float = Field(description="Lower plateau level")
    c2: float = Field(description="Upper plateau level")
    a_n: float = Field(description="Left end of the equality region u = g_n")
    b_n: float = Field(description="Right end of the equality region u = g_n")
    err_a: float = Field(description="|a_n - 1/sqrt(lambda)|")
    err_b: float = Field(description="|b_n - (1 - 1/sqrt(lambda))|")
    max_dev: float = Field(description="max |u - g_n| on the equality region")
    plateau_low: float = Field(description="Value of u left of a_n")
    plateau_high: float = Field(description="Value of u right of b_n")
    breaks_in_region: int = Field(description="Plateau breaks of u inside [a_n, b_n]")
    steps_in_region: int = Field(description="Steps of g_n inside [a_n, b_n]")
    grid_cells: int = Field(description="Sampling grid size")
    error: Optional[str] = Field(default=None, description="Error message if the experiment failed")


def staircase_experiment(n: int, lam: float, grid_cells: Optional[int] = None) -> StaircaseReport:
    """Staircase effect of ROF on the staircase datum g_n.

    The minimizer equals g_n on [a_n, b_n] and is constant outside, with
    a_n -> 1/sqrt(lam) and b_n -> 1 - 1/sqrt(lam).

    Args:
        n: Number of steps of g_n.
        lam: Fidelity parameter (> 4).
        grid_cells: Sampling grid size; rounded up to a multiple of n.

    Returns:
        The report with a_n, b_n, c1, c2, the limit errors, the maximal
        deviation from g_n on the equality region and the plateau values.
    """
    if not lam > 4:
        raise NumericalFailure(f"The staircase effect needs lambda > 4, got {lam}")
    if int(n) != n or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n}")
    n = int(n)
    cells = grid_cells or max(1000, n)
    cells = n * max(1, math.ceil(cells / n))

    datum = staircase_datum(n)
    solution = rof_monotone_minimizer(datum, lam)
    grid = Grid(0.0, 1.0, cells)

    # integer arithmetic keeps the step positions exact on the grid
    j = np.arange(cells + 1)
    g_values = (np.minimum((j * n) // cells, n - 1) + 1) / n
    u_values = np.clip(g_values, solution.c1, solution.c2)

    x = grid.nodes
    region = (x >= solution.x_low - BREAK_TOL) & (x < solution.x_high - BREAK_TOL)
    deviation = np.abs(u_values - g_values)
    max_dev = float(deviation[region].max()) if region.any() else 0.0

    # cells with both ends in the region
    inner = region[:-1] & region[1:]
    u_breaks = int(np.count_nonzero(np.abs(np.diff(u_values))[inner] > BREAK_TOL))
    g_steps = int(np.count_nonzero(np.abs(np.diff(g_values))[inner] > BREAK_TOL))

    root = math.sqrt(lam)
    report = StaircaseReport(
        lam=lam,
        n=n,
        c1=solution.c1,
        c2=solution.c2,
        a_n=solution.x_low,
        b_n=solution.x_high,
        err_a=abs(solution.x_low - 1.0 / root),
        err_b=abs(solution.x_high - (1.0 - 1.0 / root)),
        max_dev=max_dev,
        plateau_low=solution.c1,
        plateau_high=solution.c2,
        breaks_in_region=u_breaks,
        steps_in_region=g_steps,
        grid_cells=cells,
    )
    logger.info(
        f"staircase n={n} lambda={lam}: a_n={solution.x_low:.6f}, b_n={solution.x_high:.6f}, max_dev={max_dev:.2e}"
    )
    return report
