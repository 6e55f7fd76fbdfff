"""Higher-order total variation (HOT) denoising and the anti-staircase experiments.

The objective is the discretized F_p energy plus fidelity, with |.| replaced
by s(t) = sqrt(t^2 + eps^2) - eps so that it is differentiable and constants
still have zero energy:

    E(u) = h*sum s(d_i) + h*sum psi(m_j) s(c_j)^p + lam*h*sum (u_i - g_i)^2

where d are forward slopes, c central second differences at interior nodes
and m_j the mean of the two slopes around c_j. With the built-in weight the
objective is non-convex; minimize_hot returns a stationary point.

The descent is a damped Newton method on the banded curvature of the convex
part of E (the psi' coupling is left out of the model), with an
iteratively-reweighted fallback step when the Newton step is rejected, and a
continuation in eps from 100*eps down to eps. Started from the data, it first
solves the convex problem with psi replaced by 1 and only then switches the
weight on.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_serializer
from scipy.linalg import LinAlgError, solveh_banded

from src.restoration.errors import NumericalFailure, ValidationError
from src.restoration.rof import rof_monotone_minimizer, staircase_datum, staircase_experiment
from src.restoration.signals import DiscreteSignal, Grid, JumpRecord, jump_detector
from src.restoration.weights import WeightFunction

logger = logging.getLogger(__name__)

DEFAULT_EPS_FACTOR = 1e-4
EXPERIMENT_GRID_CELLS = 800
NOISE_KINDS = ("staircase_residual", "square_wave")

CONTINUATION_FACTORS = (100.0, 10.0, 1.0)
CONTINUATION_REL_TOL = 1e-8
ARMIJO_C = 1e-4
NEWTON_BACKTRACKS = 8
MAX_BACKTRACKS = 60
DIAGONAL_SHIFT = 1e-12


class HotConfig(BaseModel):
    """Parameters of a HOT solve. eps_abs=None selects 1e-4 * range(g) / (b - a)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True, populate_by_name=True)

    lam: float = Field(alias="lambda", gt=0, allow_inf_nan=False, description="Fidelity parameter")
    weight: WeightFunction = Field(description="Weight psi and exponent p")
    eps_abs: Optional[float] = Field(default=None, gt=0, description="Smoothing width of |.|")
    max_iters: int = Field(default=5000, ge=1, description="Descent steps over all continuation stages")
    grad_tol: float = Field(default=1e-6, gt=0, description="Bound on max |grad E| / h")
    energy_rel_tol: float = Field(default=1e-10, gt=0, description="Bound on the relative energy decrease")
    kappa: float = Field(default=10.0, gt=0, description="Jump detector threshold factor")

    @field_serializer("weight")
    def _describe_weight(self, weight: WeightFunction) -> dict:
        return weight.describe()

    def resolve_eps(self, g: DiscreteSignal) -> float:
        if self.eps_abs is not None:
            return self.eps_abs
        spread = float(np.ptp(g.values)) or 1.0
        return DEFAULT_EPS_FACTOR * spread / g.grid.length


class HotResult(BaseModel):
    """Minimizer of the smoothed objective with convergence and staircase diagnostics."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    minimizer: DiscreteSignal = Field(description="Returned iterate")
    energy: float = Field(description="Smoothed objective at the minimizer")
    start_energy: float = Field(description="Smoothed objective at the starting point")
    iterations: int = Field(description="Accepted descent steps over all stages")
    grad_norm_final: float = Field(description="max |grad E| / h at the minimizer")
    max_abs_slope: float = Field(description="Largest |u'| over the cells")
    jump_records: List[JumpRecord] = Field(default_factory=list, description="Detected jumps")
    converged: bool = Field(description="Whether the last stage met a stopping tolerance")
    energy_history: List[float] = Field(
        default_factory=list, description="Energies of the last stage, one per accepted step"
    )
    message: str = Field(default="", description="Stopping reason of the last stage")

    @computed_field
    @property
    def jump_count(self) -> int:
        return len(self.jump_records)

    @field_serializer("minimizer")
    def _minimizer_values(self, minimizer: DiscreteSignal) -> list:
        return minimizer.values.tolist()

    @field_serializer("jump_records")
    def _jump_dicts(self, jump_records: List[JumpRecord]) -> list:
        return [record.to_dict() for record in jump_records]


def _smooth_abs(t: np.ndarray, eps: float) -> np.ndarray:
    # sqrt(fl(eps^2)) may round below eps
    return np.maximum(np.sqrt(t * t + eps * eps) - eps, 0.0)


def _smooth_abs_derivative(t: np.ndarray, eps: float) -> np.ndarray:
    return t / np.sqrt(t * t + eps * eps)


def _check_grids(u: DiscreteSignal, g: DiscreteSignal) -> None:
    if u.grid != g.grid:
        raise ValidationError("u and g must share a grid")


@dataclass(frozen=True, eq=False)
class _Objective:
    """Smoothed objective on node values; `convexified` replaces psi by 1."""

    data: np.ndarray
    h: float
    lam: float
    weight: WeightFunction
    eps: float
    convexified: bool = False

    @property
    def p(self) -> float:
        return self.weight.p

    def _psi(self, m: np.ndarray) -> np.ndarray:
        return np.ones_like(m) if self.convexified else self.weight.eval(m)

    def _psi_derivative(self, m: np.ndarray) -> np.ndarray:
        return np.zeros_like(m) if self.convexified else self.weight.derivative(m)

    def value_and_gradient(self, u: np.ndarray) -> tuple:
        h, p, eps = self.h, self.p, self.eps
        d = np.diff(u) / h
        c = np.diff(d) / h
        m = 0.5 * (d[:-1] + d[1:])
        residual = u - self.data

        s_d = _smooth_abs(d, eps)
        s_c = _smooth_abs(c, eps)
        psi_m = self._psi(m)
        energy = (
            h * float(np.sum(s_d))
            + h * float(np.sum(psi_m * s_c**p))
            + self.lam * h * float(np.sum(residual * residual))
        )

        grad = 2.0 * self.lam * h * residual
        ds = _smooth_abs_derivative(d, eps)
        grad[1:] += ds
        grad[:-1] -= ds

        coef_m = self._psi_derivative(m) * s_c**p / 2.0
        grad[2:] += coef_m
        grad[:-2] -= coef_m

        coef_c = psi_m * p * s_c ** (p - 1.0) * _smooth_abs_derivative(c, eps) / h
        grad[:-2] += coef_c
        grad[1:-1] -= 2.0 * coef_c
        grad[2:] += coef_c
        return energy, grad

    def value(self, u: np.ndarray) -> float:
        return self.value_and_gradient(u)[0]

    def _curvature_weight(self, c: np.ndarray, exact: bool) -> np.ndarray:
        """Second derivative of s^p (exact) or its reweighted majorant."""
        eps, p = self.eps, self.p
        root = np.sqrt(c * c + eps * eps)
        if p == 1.0:
            return eps * eps / root**3 if exact else 1.0 / root
        s = np.maximum(root - eps, 0.0)
        ds = c / root
        with np.errstate(divide="ignore", invalid="ignore"):
            low = np.where(s > 0.0, s ** (p - 2.0), 0.0)
        second = p * (p - 1.0) * low * ds * ds + p * s ** (p - 1.0) * eps * eps / root**3
        second = np.nan_to_num(second, nan=0.0, posinf=0.0)
        if exact:
            return second
        return np.maximum(second, p * s ** (p - 1.0) / root)

    def bands(self, u: np.ndarray, exact: bool) -> np.ndarray:
        """Upper banded form of 2*lam*h*I + D1' A D1 + D2' B D2 for solveh_banded."""
        h, eps = self.h, self.eps
        d = np.diff(u) / h
        c = np.diff(d) / h
        m = 0.5 * (d[:-1] + d[1:])
        root_d = np.sqrt(d * d + eps * eps)
        a = (eps * eps / root_d**3 if exact else 1.0 / root_d) / h
        b = self._psi(m) * self._curvature_weight(c, exact) / h**3

        size = u.size
        diag0 = np.full(size, 2.0 * self.lam * h)
        diag0[:-1] += a
        diag0[1:] += a
        diag1 = -a.copy()
        diag0[:-2] += b
        diag0[1:-1] += 4.0 * b
        diag0[2:] += b
        diag1[:-1] -= 2.0 * b
        diag1[1:] -= 2.0 * b

        ab = np.zeros((3, size))
        ab[0, 2:] = b
        ab[1, 1:] = diag1
        ab[2] = diag0
        return ab


@dataclass(frozen=True, eq=False)
class _Step:
    u: np.ndarray
    energy: float
    grad: np.ndarray
    length: float


@dataclass(frozen=True, eq=False)
class _Descent:
    u: np.ndarray
    energy: float
    grad: np.ndarray
    steps: int
    history: list
    converged: bool
    message: str


def _newton_direction(ab: np.ndarray, grad: np.ndarray) -> Optional[np.ndarray]:
    for shift in (0.0, DIAGONAL_SHIFT):
        system = ab
        if shift:
            system = ab.copy()
            system[2] += shift * float(np.max(ab[2]))
        try:
            direction = -solveh_banded(system, grad, check_finite=False)
        except (LinAlgError, ValueError):
            continue
        if np.all(np.isfinite(direction)):
            return direction
    return None


def _line_search(objective: _Objective, u, energy, grad, direction, backtracks: int) -> Optional[_Step]:
    """Armijo backtracking from the unit step, halving up to `backtracks` times."""
    if direction is None:
        return None
    slope = float(grad @ direction)
    if not slope < 0.0:
        return None
    length = 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(backtracks + 1):
            trial = u + length * direction
            trial_energy, trial_grad = objective.value_and_gradient(trial)
            if trial_energy <= energy + ARMIJO_C * length * slope:
                return _Step(trial, trial_energy, trial_grad, length)
            length *= 0.5
    return None


def _descend(objective: _Objective, u: np.ndarray, budget: int, rel_tol: float, grad_tol: float) -> _Descent:
    """Damped Newton descent on one stage of the continuation."""
    energy, grad = objective.value_and_gradient(u)
    history = [energy]
    steps = 0
    while True:
        if float(np.max(np.abs(grad))) / objective.h <= grad_tol:
            return _Descent(u, energy, grad, steps, history, True, "gradient tolerance reached")
        if steps >= budget:
            return _Descent(u, energy, grad, steps, history, False, "iteration limit reached")

        newton = _newton_direction(objective.bands(u, exact=True), grad)
        if newton is not None:
            decrement = -float(grad @ newton)
            if 0.0 <= decrement <= 2.0 * rel_tol * max(abs(energy), 1.0):
                return _Descent(u, energy, grad, steps, history, True, "Newton decrement below tolerance")
        step = _line_search(objective, u, energy, grad, newton, NEWTON_BACKTRACKS)
        full_newton = step is not None and step.length == 1.0
        if step is None:
            ab = objective.bands(u, exact=False)
            fallback = _newton_direction(ab, grad)
            if fallback is None:
                fallback = -grad / ab[2]
            step = _line_search(objective, u, energy, grad, fallback, MAX_BACKTRACKS)
        if step is None:
            return _Descent(u, energy, grad, steps, history, False, "line search stalled")

        rel_decrease = (energy - step.energy) / max(abs(energy), abs(step.energy), 1.0)
        u, energy, grad = step.u, step.energy, step.grad
        steps += 1
        history.append(energy)
        if full_newton and rel_decrease <= rel_tol:
            return _Descent(u, energy, grad, steps, history, True, "relative energy decrease below tolerance")


def minimize_hot(g: DiscreteSignal, cfg: HotConfig, u0: Optional[DiscreteSignal] = None) -> HotResult:
    """Minimize the smoothed HOT objective.

    Started from the data (u0=None), the descent first runs the eps
    continuation on the convex objective with psi = 1 and then descends on
    the true objective. From an explicit u0 it runs the continuation on the
    true objective directly.

    Args:
        g: The datum.
        cfg: Solver configuration.
        u0: Starting point, defaults to g.

    Returns:
        The best iterate found. Non-convergence is reported through
        `converged`, never raised.
    """
    start = g if u0 is None else u0
    _check_grids(start, g)
    h = g.grid.h
    eps = cfg.resolve_eps(g)
    data = np.asarray(g.values, dtype=float)
    u_start = np.asarray(start.values, dtype=float)

    def objective(factor: float, convexified: bool) -> _Objective:
        return _Objective(data, h, cfg.lam, cfg.weight, eps * factor, convexified)

    target = objective(1.0, False)
    start_energy = target.value(u_start)

    stages = [(factor, False) for factor in CONTINUATION_FACTORS]
    if u0 is None:
        stages = [(factor, True) for factor in CONTINUATION_FACTORS] + [(1.0, False)]

    u = u_start
    iterations = 0
    for index, (factor, convexified) in enumerate(stages):
        last = index == len(stages) - 1
        descent = _descend(
            objective(factor, convexified),
            u,
            cfg.max_iters - iterations,
            cfg.energy_rel_tol if last else CONTINUATION_REL_TOL,
            cfg.grad_tol,
        )
        iterations += descent.steps
        u = descent.u
        logger.debug(
            f"minimize_hot stage eps={eps * factor:.3e} psi={'1' if convexified else 'weight'}: "
            f"{descent.steps} steps, energy={descent.energy:.12g}, {descent.message}"
        )

    if descent.energy > start_energy:
        direct = _descend(target, u_start, cfg.max_iters, cfg.energy_rel_tol, cfg.grad_tol)
        iterations += direct.steps
        if direct.energy < descent.energy:
            logger.info("minimize_hot: direct descent from the start beat the continuation")
            descent = direct

    grad_norm = float(np.max(np.abs(descent.grad))) / h
    minimizer = g.with_values(descent.u)
    slopes = np.diff(descent.u) / h
    jumps = jump_detector(minimizer, cfg.kappa)
    if not descent.converged:
        logger.warning(
            f"minimize_hot did not converge after {iterations} steps: grad_norm={grad_norm:.3e}, {descent.message}"
        )
    logger.debug(f"minimize_hot: energy={descent.energy:.10g}, iterations={iterations}, jumps={len(jumps)}")
    return HotResult(
        minimizer=minimizer,
        energy=descent.energy,
        start_energy=start_energy,
        iterations=iterations,
        grad_norm_final=grad_norm,
        max_abs_slope=float(np.max(np.abs(slopes))),
        jump_records=jumps,
        converged=descent.converged,
        energy_history=[float(value) for value in descent.history],
        message=descent.message,
    )


def smoothed_objective(u: DiscreteSignal, g: DiscreteSignal, cfg: HotConfig) -> float:
    """Smoothed F_p energy of u plus lam * h * sum (u - g)^2."""
    _check_grids(u, g)
    objective = _Objective(np.asarray(g.values, dtype=float), g.grid.h, cfg.lam, cfg.weight, cfg.resolve_eps(g))
    return objective.value(np.asarray(u.values, dtype=float))


def objective_gradient(u: DiscreteSignal, g: DiscreteSignal, cfg: HotConfig) -> np.ndarray:
    """Exact gradient of smoothed_objective with respect to the node values."""
    _check_grids(u, g)
    objective = _Objective(np.asarray(g.values, dtype=float), g.grid.h, cfg.lam, cfg.weight, cfg.resolve_eps(g))
    return objective.value_and_gradient(np.asarray(u.values, dtype=float))[1]


def _cell_index(grid: Grid, n: int) -> np.ndarray:
    """k_j = floor(n * (x_j - a) / (b - a)) in exact integer arithmetic, capped at n-1."""
    j = np.arange(grid.n + 1)
    return np.minimum((j * n) // grid.n, n - 1)


def noise_family(kind: str, n: int, amplitude: float, grid: Grid) -> DiscreteSignal:
    """Weak*-null noise on cells of width (b - a)/n.

    staircase_residual is h_n = i/n - x on the i-th cell (scaled by b - a),
    with sup-norm 1/n and `amplitude` unused; square_wave alternates
    +amplitude and -amplitude from cell to cell.
    """
    if int(n) != n or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n}")
    if not amplitude > 0:
        raise ValidationError(f"amplitude must be positive, got {amplitude}")
    n = int(n)
    k = _cell_index(grid, n)
    if kind == "staircase_residual":
        t = np.arange(grid.n + 1) / grid.n
        values = ((k + 1) / n - t) * grid.length
    elif kind == "square_wave":
        values = amplitude * np.where(k % 2 == 0, 1.0, -1.0)
    else:
        raise ValidationError(f"Unknown noise kind {kind!r}, expected one of {NOISE_KINDS}")
    return DiscreteSignal(grid, values)


def clean_ramp(grid: Grid) -> DiscreteSignal:
    """The identity ramp (x - a)/(b - a) sampled on the grid."""
    return DiscreteSignal(grid, np.arange(grid.n + 1) / grid.n)


def staircase_signal(grid: Grid, n: int) -> DiscreteSignal:
    """g_n = ramp + staircase residual, computed directly as (k+1)/n."""
    k = _cell_index(grid, int(n))
    return DiscreteSignal(grid, (k + 1) / int(n))


def c1_proxy(u: DiscreteSignal, reference: DiscreteSignal) -> float:
    """max |u - ref| + max |u' - ref'| over the grid."""
    _check_grids(u, reference)
    h = u.grid.h
    node_error = float(np.max(np.abs(u.values - reference.values)))
    slope_error = float(np.max(np.abs(np.diff(u.values - reference.values)))) / h
    return node_error + slope_error


class AntiStaircaseRow(BaseModel):
    """HOT reconstructions of g_n from the data and from the clean minimizer, next to ROF."""

    model_config = ConfigDict(populate_by_name=True)

    n: int = Field(description="Staircase step count")
    lam: float = Field(alias="lambda", description="Fidelity parameter")
    max_abs_slope: float = Field(description="Largest |u'| of the descent started from the data")
    jump_count: int = Field(description="Jumps of the descent started from the data")
    distance_to_clean: float = Field(description="max |u_n - u_clean| for the descent started from the data")
    energy: float = Field(description="Energy reached from the data")
    iterations: int = Field(description="Descent steps from the data")
    converged: bool = Field(description="Convergence of the descent started from the data")
    warm_max_abs_slope: float = Field(description="Largest |u'| of the descent started from u_clean")
    warm_jump_count: int = Field(description="Jumps of the descent started from u_clean")
    warm_energy: float = Field(description="Energy reached from u_clean")
    warm_converged: bool = Field(description="Convergence of the descent started from u_clean")
    rof_breaks: Optional[int] = Field(default=None, description="ROF plateau breaks inside [a_n, b_n]")
    rof_steps: Optional[int] = Field(default=None, description="Steps of g_n inside [a_n, b_n]")
    rof_detections: Optional[int] = Field(default=None, description="Jumps detected in the ROF minimizer")
    rof_grid_cells: Optional[int] = Field(default=None, description="Grid the ROF minimizer is sampled on")


class AntiStaircaseReport(BaseModel):
    """Summary of an anti-staircase sweep over n."""

    model_config = ConfigDict(populate_by_name=True)

    lam: float = Field(alias="lambda", description="Fidelity parameter")
    p: float = Field(description="Regularization exponent")
    grid_cells: int = Field(description="HOT grid size")
    clean_max_abs_slope: float = Field(description="Largest |u'| of the clean-ramp minimizer")
    clean_converged: bool = Field(description="Convergence of the clean-ramp solve")
    rows: List[AntiStaircaseRow] = Field(default_factory=list, description="One row per n")
    slope_ratio: float = Field(description="Largest row slope over the clean slope, both starts")
    jump_free: bool = Field(description="No jumps for any n from either start")
    non_converged: list = Field(default_factory=list, description="Solves that did not converge")
    error: Optional[str] = Field(default=None, description="Error message if the sweep failed")


def anti_staircase_experiment(
    lam: float,
    n_list: Sequence[int],
    cfg: HotConfig,
    grid_cells: int = EXPERIMENT_GRID_CELLS,
) -> AntiStaircaseReport:
    """HOT and ROF reconstructions of the staircase data g_n = ramp + h_n.

    For each n the HOT minimizer is computed twice, from the data and from
    the clean-ramp minimizer, and both are checked for jumps and their
    maximal slope; the ROF minimizer of the same data is checked for plateau
    breaks inside [a_n, b_n].

    Args:
        lam: Fidelity parameter, overriding cfg.lam.
        n_list: Staircase step counts.
        cfg: Solver configuration.
        grid_cells: Sampling grid size.

    Returns:
        The sweep report with one row per n and summary flags.
    """
    cfg = cfg.model_copy(update={"lam": lam})
    grid = Grid(0.0, 1.0, grid_cells)
    clean = minimize_hot(clean_ramp(grid), cfg)
    logger.info(f"anti-staircase lambda={lam}: clean max slope {clean.max_abs_slope:.6f}")

    rows = []
    non_converged = [] if clean.converged else ["clean"]
    for n in sorted(n_list):
        data = staircase_signal(grid, n)
        cold = minimize_hot(data, cfg)
        warm = minimize_hot(data, cfg, u0=clean.minimizer)
        if not cold.converged:
            non_converged.append(f"{n}:data")
        if not warm.converged:
            non_converged.append(f"{n}:warm")
        rows.append(
            AntiStaircaseRow(
                n=int(n),
                lam=lam,
                max_abs_slope=cold.max_abs_slope,
                jump_count=cold.jump_count,
                distance_to_clean=float(np.max(np.abs(cold.minimizer.values - clean.minimizer.values))),
                energy=cold.energy,
                iterations=cold.iterations,
                converged=cold.converged,
                warm_max_abs_slope=warm.max_abs_slope,
                warm_jump_count=warm.jump_count,
                warm_energy=warm.energy,
                warm_converged=warm.converged,
                **_rof_side(int(n), lam, grid, cfg.kappa),
            )
        )
        logger.info(
            f"anti-staircase n={n}: data start energy={cold.energy:.8f} jumps={cold.jump_count}, "
            f"warm start energy={warm.energy:.8f} jumps={warm.jump_count}"
        )

    largest = max((max(row.max_abs_slope, row.warm_max_abs_slope) for row in rows), default=0.0)
    if non_converged:
        logger.warning(f"anti-staircase: non-converged solves for {non_converged}")
    return AntiStaircaseReport(
        lam=lam,
        p=cfg.weight.p,
        grid_cells=grid_cells,
        clean_max_abs_slope=clean.max_abs_slope,
        clean_converged=clean.converged,
        rows=rows,
        slope_ratio=largest / max(clean.max_abs_slope, 1e-300),
        jump_free=all(row.jump_count == 0 and row.warm_jump_count == 0 for row in rows),
        non_converged=non_converged,
    )


def _rof_side(n: int, lam: float, grid: Grid, kappa: float) -> dict:
    """ROF breaks and detections of g_n on a grid fine enough to resolve steps of height 1/n."""
    cells = max(grid.n, math.ceil(2.0 * kappa * n))
    cells = n * math.ceil(cells / n)
    try:
        report = staircase_experiment(n, lam, grid_cells=cells)
        rof_sample = rof_monotone_minimizer(staircase_datum(n), lam).sample(Grid(grid.a, grid.b, cells))
    except NumericalFailure as e:
        logger.info(f"ROF side skipped for n={n}: {e}")
        return {}
    return {
        "rof_breaks": report.breaks_in_region,
        "rof_steps": report.steps_in_region,
        "rof_detections": len(jump_detector(rof_sample, kappa)),
        "rof_grid_cells": cells,
    }


class SweepRow(BaseModel):
    """C1 distance between the HOT reconstruction of g_n and the clean ramp at one lambda."""

    model_config = ConfigDict(populate_by_name=True)

    lam: float = Field(alias="lambda", description="Fidelity parameter")
    n: int = Field(description="Staircase step count")
    c1_proxy: float = Field(description="max |u - ramp| + max |u' - ramp'|")
    converged: bool = Field(description="Convergence of the HOT solve")


def lambda_sweep(
    lambdas: Sequence[float],
    n: int,
    cfg: HotConfig,
    grid_cells: int = EXPERIMENT_GRID_CELLS,
) -> List[SweepRow]:
    """C1 distance between the HOT reconstruction of g_n and the clean ramp, per lambda."""
    grid = Grid(0.0, 1.0, grid_cells)
    ramp = clean_ramp(grid)
    data = staircase_signal(grid, n)
    rows = []
    for lam in sorted(lambdas):
        result = minimize_hot(data, cfg.model_copy(update={"lam": lam}))
        rows.append(SweepRow(lam=lam, n=int(n), c1_proxy=c1_proxy(result.minimizer, ramp), converged=result.converged))
        logger.info(f"lambda sweep: lambda={lam}, n={n}, C1 proxy={rows[-1].c1_proxy:.6f}")
    return rows
