"""Admissible weights psi and the transforms built on them.

A weight is a positive Borel function psi with a finite integral of
psi^(1/p). Everything downstream works through the two tail integrals

    lower(t) = integral of psi^(1/p) over ]-inf, t]   (this is Psi_p)
    upper(t) = integral of psi^(1/p) over [t, +inf[

which are closed-form for the built-in family

    psi(t) = 1            for |t| <= 1
    psi(t) = 1 / |t|^alpha for |t| > 1

and quadrature-backed for user weights.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import integrate, optimize

from src.restoration.errors import NumericalFailure, ValidationError
from src.restoration.extended import NEG_INF, POS_INF, ExtendedReal

logger = logging.getLogger(__name__)

QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-13
QUAD_LIMIT = 400
ROOT_XTOL = 1e-13

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class WeightFunction:
    """An admissible weight together with its tail integrals.

    The callables are vectorized over numpy arrays of finite reals; use the
    module-level functions for extended-real arguments.
    """

    psi: Callable[[ArrayLike], ArrayLike]
    p: float
    tail_upper: Callable[[ArrayLike], ArrayLike]
    tail_lower: Callable[[ArrayLike], ArrayLike]
    total_mass: float
    alpha: Optional[float] = None
    psi_derivative: Optional[Callable[[ArrayLike], ArrayLike]] = None
    inverse: Optional[Callable[[float], float]] = None
    psi_sup: float = 1.0
    name: str = "custom"

    def eval(self, t: ArrayLike) -> ArrayLike:
        """Evaluate psi at the signed argument t."""
        return self.psi(t)

    def root(self, t: ArrayLike) -> ArrayLike:
        """Evaluate psi^(1/p)."""
        values = self.psi(t)
        return values if self.p == 1 else np.power(values, 1.0 / self.p)

    def derivative(self, t: ArrayLike) -> ArrayLike:
        """psi', analytic when available and a central difference otherwise."""
        if self.psi_derivative is not None:
            return self.psi_derivative(t)
        t = np.asarray(t, dtype=float)
        step = 1e-7 * np.maximum(1.0, np.abs(t))
        return (self.psi(t + step) - self.psi(t - step)) / (2.0 * step)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "p": self.p,
            "alpha": self.alpha,
            "total_mass": self.total_mass,
        }


def _builtin_psi(alpha: float) -> Callable[[ArrayLike], ArrayLike]:
    def psi(t):
        t = np.asarray(t, dtype=float)
        magnitude = np.abs(t)
        safe = np.maximum(magnitude, 1.0)
        result = np.where(magnitude <= 1.0, 1.0, safe ** (-alpha))
        return float(result) if result.ndim == 0 else result

    return psi


def _builtin_psi_derivative(alpha: float) -> Callable[[ArrayLike], ArrayLike]:
    # |t| == 1 takes the inner (constant) branch
    def derivative(t):
        t = np.asarray(t, dtype=float)
        magnitude = np.abs(t)
        safe = np.maximum(magnitude, 1.0)
        result = np.where(magnitude <= 1.0, 0.0, -alpha * np.sign(t) * safe ** (-alpha - 1.0))
        return float(result) if result.ndim == 0 else result

    return derivative


def make_builtin_weight(alpha: float, p: float = 1.0) -> WeightFunction:
    """Build the power-law weight psi = min(1, |t|^-alpha).

    Args:
        alpha: Tail exponent of psi.
        p: Regularization exponent (p >= 1).

    Returns:
        A WeightFunction with closed-form tail integrals and inverse.

    Raises:
        ValidationError: If p < 1 or alpha <= p, i.e. when the integral of
            psi^(1/p) over the real line diverges.
    """
    alpha = float(alpha)
    p = float(p)
    if not p >= 1.0:
        raise ValidationError(f"The regularization exponent must satisfy p >= 1, got p={p}")
    if not alpha > p:
        raise ValidationError(
            f"Integrability condition violated: the integral of psi^(1/p) is finite "
            f"only for alpha > p, got alpha={alpha}, p={p}"
        )

    q = alpha / p
    tail = 1.0 / (q - 1.0)
    total_mass = 2.0 + 2.0 * tail

    def upper(t):
        t = np.asarray(t, dtype=float)
        far_right = np.maximum(t, 1.0) ** (1.0 - q) * tail
        middle = (1.0 - t) + tail
        far_left = (1.0 - np.maximum(-t, 1.0) ** (1.0 - q)) * tail + 2.0 + tail
        result = np.where(t >= 1.0, far_right, np.where(t >= -1.0, middle, far_left))
        return float(result) if result.ndim == 0 else result

    def lower(t):
        return upper(-np.asarray(t, dtype=float))

    def inverse(y: float) -> float:
        if y <= tail:
            return -((q - 1.0) * y) ** (1.0 / (1.0 - q))
        if y <= tail + 2.0:
            return y - tail - 1.0
        return ((q - 1.0) * (total_mass - y)) ** (1.0 / (1.0 - q))

    return WeightFunction(
        psi=_builtin_psi(alpha),
        p=p,
        tail_upper=upper,
        tail_lower=lower,
        total_mass=total_mass,
        alpha=alpha,
        psi_derivative=_builtin_psi_derivative(alpha),
        inverse=inverse,
        psi_sup=1.0,
        name="builtin",
    )


def make_weight(
    psi: Callable[[ArrayLike], ArrayLike],
    p: float = 1.0,
    horizon: Optional[float] = None,
    breakpoints: Sequence[float] = (),
    tail_alpha: Optional[float] = None,
    tail_upper: Optional[Callable[[ArrayLike], ArrayLike]] = None,
    tail_lower: Optional[Callable[[ArrayLike], ArrayLike]] = None,
    psi_derivative: Optional[Callable[[ArrayLike], ArrayLike]] = None,
    psi_sup: Optional[float] = None,
) -> WeightFunction:
    """Wrap a user-supplied weight.

    Either both tail integrals are given, or a truncation horizon T is.
    With a horizon, psi^(1/p) is integrated adaptively over [-T, T] and the
    tails beyond +-T are extrapolated as c|t|^-tail_alpha matched at +-T
    (or dropped when tail_alpha is None).

    Args:
        psi: Vectorized positive weight.
        p: Regularization exponent.
        horizon: Truncation horizon T > 0 for the quadrature path.
        breakpoints: Kinks of psi inside [-T, T], passed to the quadrature.
        tail_alpha: Power-law exponent used to integrate the tails analytically.
        tail_upper: User-supplied t -> integral over [t, +inf[ of psi^(1/p).
        tail_lower: User-supplied t -> integral over ]-inf, t] of psi^(1/p).
        psi_derivative: Optional analytic psi'.
        psi_sup: Optional supremum of psi, used for the Lipschitz constant.

    Returns:
        A WeightFunction.
    """
    p = float(p)
    if not p >= 1.0:
        raise ValidationError(f"The regularization exponent must satisfy p >= 1, got p={p}")

    if tail_upper is not None and tail_lower is not None:
        total_mass = float(tail_lower(0.0)) + float(tail_upper(0.0))
        return WeightFunction(
            psi=psi,
            p=p,
            tail_upper=tail_upper,
            tail_lower=tail_lower,
            total_mass=total_mass,
            psi_derivative=psi_derivative,
            psi_sup=_estimate_sup(psi, 50.0) if psi_sup is None else float(psi_sup),
        )

    if horizon is None or not horizon > 0:
        raise ValidationError("A user weight needs both tail integrals or a positive truncation horizon")
    horizon = float(horizon)

    samples = np.asarray(psi(np.linspace(-horizon, horizon, 2001)), dtype=float)
    if np.any(~np.isfinite(samples)) or np.any(samples <= 0):
        raise ValidationError("psi must be finite and strictly positive on its truncation window")

    def root(t):
        value = psi(t)
        return value if p == 1 else value ** (1.0 / p)

    if tail_alpha is not None:
        q = float(tail_alpha) / p
        if not q > 1.0:
            raise ValidationError(
                f"Integrability condition violated: power-law tails need tail_alpha > p, "
                f"got tail_alpha={tail_alpha}, p={p}"
            )
        right_scale = float(root(horizon)) * horizon**q
        left_scale = float(root(-horizon)) * horizon**q

        def right_tail(x: float) -> float:
            return right_scale * x ** (1.0 - q) / (q - 1.0)

        def left_tail(x: float) -> float:
            return left_scale * x ** (1.0 - q) / (q - 1.0)

    else:
        estimate = horizon * max(float(root(horizon)), float(root(-horizon)))
        logger.warning(
            f"Dropping weight tails beyond +-{horizon}; truncation estimate {estimate:.3e}"
        )

        def right_tail(x: float) -> float:
            return 0.0

        def left_tail(x: float) -> float:
            return 0.0

    kinks = sorted(float(b) for b in breakpoints if -horizon < b < horizon)

    def segment(lo: float, hi: float) -> float:
        if hi <= lo:
            return 0.0
        points = [b for b in kinks if lo < b < hi] or None
        value, abserr = integrate.quad(
            root, lo, hi, points=points, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT
        )
        logger.debug(f"quad [{lo:.6g}, {hi:.6g}] = {value:.15g} (abserr {abserr:.2e})")
        return value

    window_mass = segment(-horizon, horizon)
    total_mass = window_mass + right_tail(horizon) + left_tail(horizon)

    def upper_scalar(t: float) -> float:
        if t >= horizon:
            return right_tail(t)
        if t >= -horizon:
            return segment(t, horizon) + right_tail(horizon)
        return window_mass + right_tail(horizon) + left_tail(horizon) - left_tail(-t)

    def lower_scalar(t: float) -> float:
        if t <= -horizon:
            return left_tail(-t)
        if t <= horizon:
            return segment(-horizon, t) + left_tail(horizon)
        return window_mass + left_tail(horizon) + right_tail(horizon) - right_tail(t)

    return WeightFunction(
        psi=psi,
        p=p,
        tail_upper=_vectorize(upper_scalar),
        tail_lower=_vectorize(lower_scalar),
        total_mass=total_mass,
        alpha=None if tail_alpha is None else float(tail_alpha),
        psi_derivative=psi_derivative,
        psi_sup=_estimate_sup(psi, horizon) if psi_sup is None else float(psi_sup),
    )


def _vectorize(scalar: Callable[[float], float]) -> Callable[[ArrayLike], ArrayLike]:
    vectorized = np.vectorize(scalar, otypes=[float])

    def evaluate(t):
        result = vectorized(np.asarray(t, dtype=float))
        return float(result) if result.ndim == 0 else result

    return evaluate


def _estimate_sup(psi: Callable[[ArrayLike], ArrayLike], horizon: float) -> float:
    return float(np.max(psi(np.linspace(-horizon, horizon, 20001))))


def tail_integral_upper(w: WeightFunction, t) -> float:
    """Integral of psi^(1/p) over [t, +inf[ for an extended-real t."""
    t = ExtendedReal.coerce(t)
    if t.is_pos_inf:
        return 0.0
    if t.is_neg_inf:
        return w.total_mass
    return float(w.tail_upper(t.value))


def tail_integral_lower(w: WeightFunction, t) -> float:
    """Integral of psi^(1/p) over ]-inf, t] for an extended-real t."""
    t = ExtendedReal.coerce(t)
    if t.is_neg_inf:
        return 0.0
    if t.is_pos_inf:
        return w.total_mass
    return float(w.tail_lower(t.value))


def psi_transform(w: WeightFunction, t) -> float:
    """Psi_p(t), the antiderivative of psi^(1/p) vanishing at -inf."""
    return tail_integral_lower(w, t)


def psi_transform_array(w: WeightFunction, values: np.ndarray) -> np.ndarray:
    """Psi_p applied elementwise; +-inf entries map to M and 0."""
    values = np.asarray(values, dtype=float)
    result = np.empty_like(values)
    finite = np.isfinite(values)
    if np.any(finite):
        result[finite] = w.tail_lower(values[finite])
    result[values == np.inf] = w.total_mass
    result[values == -np.inf] = 0.0
    return result


def psi_inverse(w: WeightFunction, y: float) -> ExtendedReal:
    """Inverse of Psi_p on [0, M].

    Args:
        w: The weight.
        y: A level in [0, M].

    Returns:
        The extended real t with Psi_p(t) = y; -inf at 0 and +inf at M.

    Raises:
        ValidationError: If y lies outside [0, M].
    """
    y = float(y)
    if not 0.0 <= y <= w.total_mass:
        raise ValidationError(f"psi_inverse needs 0 <= y <= M={w.total_mass}, got y={y}")
    if y == 0.0:
        return NEG_INF
    if y == w.total_mass:
        return POS_INF
    if w.inverse is not None:
        return ExtendedReal.finite(w.inverse(y))

    lo, hi = -1.0, 1.0
    for _ in range(200):
        if float(w.tail_lower(lo)) < y:
            break
        lo *= 2.0
    else:
        raise NumericalFailure(f"Could not bracket psi_inverse({y}) from below")
    for _ in range(200):
        if float(w.tail_lower(hi)) > y:
            break
        hi *= 2.0
    else:
        raise NumericalFailure(f"Could not bracket psi_inverse({y}) from above")

    root = optimize.brentq(lambda t: float(w.tail_lower(t)) - y, lo, hi, xtol=ROOT_XTOL, maxiter=500)
    return ExtendedReal.finite(root)


def lipschitz_constant(w: WeightFunction) -> float:
    """Lipschitz constant of Psi_p, i.e. the supremum of psi^(1/p)."""
    return w.psi_sup ** (1.0 / w.p)


def _require_p1(w: WeightFunction, operation: str) -> None:
    if w.p != 1.0:
        raise ValidationError(f"{operation} belongs to the p=1 relaxation, got p={w.p}")


def _require_orientation(nu: int) -> int:
    if nu not in (1, -1):
        raise ValidationError(f"The jump orientation must be +1 or -1, got {nu}")
    return nu


def jump_penalty(w: WeightFunction, nu: int, t1, t2) -> float:
    """Relaxed cost Phi(nu, t1, t2) of a jump with one-sided slopes t1, t2.

    Phi(1, t1, t2) sums the upper tails at t1 and t2; Phi(-1, t1, t2) sums
    the lower tails.
    """
    _require_p1(w, "jump_penalty")
    if _require_orientation(nu) == 1:
        return tail_integral_upper(w, t1) + tail_integral_upper(w, t2)
    return tail_integral_lower(w, t1) + tail_integral_lower(w, t2)


def jump_penalty_hat(w: WeightFunction, nu: int, t1, t2) -> float:
    """Jump cost net of the jump of v = Psi_1(u') at the same point.

    Satisfies Phi(nu, t1, t2) = |Psi_1(t1) - Psi_1(t2)| + Phi_hat(nu, t1, t2):
    twice the upper tail at max(t1, t2) for nu = 1, twice the lower tail at
    min(t1, t2) for nu = -1.
    """
    _require_p1(w, "jump_penalty_hat")
    t1, t2 = ExtendedReal.coerce(t1), ExtendedReal.coerce(t2)
    if _require_orientation(nu) == 1:
        return 2.0 * tail_integral_upper(w, max(t1, t2))
    return 2.0 * tail_integral_lower(w, min(t1, t2))
