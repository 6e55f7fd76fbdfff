"""Subcommand handlers.

Each handler takes a resolved RunConfig and returns (result, frame): a JSON
serializable result dict carrying an "error" key (None on success) and an
optional DataFrame for the CSV output.
"""

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from src.harness.config import RunConfig
from src.restoration.cantor import (
    build_cantor_intervals,
    intervals_frame,
    remaining_measure,
    variation_bound_check,
    w_delta_integral,
    w_delta_integral_limit,
)
from src.restoration.hot import (
    HotConfig,
    clean_ramp,
    minimize_hot,
    noise_family,
    staircase_signal,
)
from src.restoration.relaxed_energy import (
    energy_F1_discrete,
    energy_F1_relaxed,
    energy_Fp_discrete,
    energy_Fp_relaxed,
    membership_diagnostics,
)
from src.restoration.rof import (
    c1c2_identity_residual,
    identity_ramp,
    rof_discrete_minimizer,
    rof_energy,
    rof_monotone_minimizer,
    staircase_datum,
    staircase_experiment,
)
from src.restoration.signals import (
    DiscreteSignal,
    Grid,
    PiecewiseBVFunction,
    jump_detector,
    read_signal_csv,
    total_variation,
)
from src.restoration.weights import make_builtin_weight

logger = logging.getLogger(__name__)

NOISE_KINDS = {"staircase": "staircase_residual", "square": "square_wave"}


def fan_out(fn: Callable, arguments: list, jobs: int) -> list:
    """Apply fn to each argument tuple, in a process pool when jobs > 1."""
    if jobs <= 1 or len(arguments) <= 1:
        return [fn(*args) for args in arguments]
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(fn, *zip(*arguments)))


def _signal_frame(signal: DiscreteSignal, **columns) -> pd.DataFrame:
    frame = signal.to_frame()
    for name, values in columns.items():
        frame[name] = values
    return frame


def _hot_config(params: dict, lam: float) -> HotConfig:
    return HotConfig(
        lam=lam,
        weight=make_builtin_weight(params["alpha"], params["p"]),
        eps_abs=params["eps_abs"],
        max_iters=params["max_iters"],
        grad_tol=params["grad_tol"],
        energy_rel_tol=params["energy_rel_tol"],
        kappa=params["kappa"],
    )


def rof_exact(cfg: RunConfig) -> tuple:
    """Exact monotone ROF minimizer, cross-checked against the discrete oracle."""
    datum = identity_ramp() if cfg["datum"] == "ramp" else staircase_datum(cfg["n"])
    solution = rof_monotone_minimizer(datum, cfg["lambda"])
    grid = Grid(datum.a, datum.b, cfg["grid_cells"])
    exact = solution.sample(grid)
    data = DiscreteSignal(grid, datum.eval(grid.nodes))
    oracle = rof_discrete_minimizer(data, cfg["lambda"])

    result = solution.to_dict()
    result.update(
        identity_residual_c1=c1c2_identity_residual(datum, solution.c1),
        identity_residual_c2=c1c2_identity_residual(datum, solution.c2),
        oracle_max_deviation=float(np.max(np.abs(oracle.values - exact.values))),
        error=None,
    )
    return result, _signal_frame(exact, datum=data.values, oracle=oracle.values)


def rof_staircase(cfg: RunConfig) -> tuple:
    """Staircase experiment over every (n, lambda) pair."""
    pairs = [(n, lam, cfg["grid_cells"]) for n in cfg["n"] for lam in cfg["lambda"]]
    reports = fan_out(staircase_experiment, pairs, cfg.jobs)
    records = [report.model_dump(by_alias=True) for report in sorted(reports, key=lambda r: (r.n, r.lam))]
    return {"records": records, "error": None}, pd.DataFrame(records)


def hot_denoise(cfg: RunConfig) -> tuple:
    """HOT minimizer of a (noisy) ramp or of a signal read from CSV."""
    if cfg["input"]:
        base = read_signal_csv(cfg["input"])
    else:
        base = clean_ramp(Grid(0.0, 1.0, cfg["grid_cells"]))
    data = base
    if cfg["noise"] != "none":
        data = base + noise_family(NOISE_KINDS[cfg["noise"]], cfg["n"], cfg["amplitude"], base.grid)

    result = minimize_hot(data, _hot_config(cfg.params, cfg["lambda"]))
    report = result.model_dump(exclude={"minimizer", "energy_history"})
    report["error"] = None if result.converged else f"HOT descent did not converge: {result.message}"
    return report, _signal_frame(result.minimizer, datum=data.values)


def energy_eval(cfg: RunConfig) -> tuple:
    """Discrete and relaxed energies of a signal CSV or a piecewise JSON description."""
    weight = make_builtin_weight(cfg["alpha"], cfg["p"])
    path = Path(cfg["input"])
    report = {"input": str(path), "weight": weight.describe()}

    if path.suffix.lower() == ".json":
        function = PiecewiseBVFunction.from_dict(json.loads(path.read_text(encoding="utf-8")))
        report["kind"] = "piecewise"
        report["discrete_energy"] = None
    else:
        signal = read_signal_csv(path)
        function = PiecewiseBVFunction.smooth_from_signal(signal)
        report["kind"] = "signal"
        if weight.p == 1.0:
            report["discrete_energy"] = energy_F1_discrete(signal, weight)
        else:
            report["discrete_energy"] = energy_Fp_discrete(signal, weight)

    if weight.p == 1.0:
        breakdown = energy_F1_relaxed(function, weight, accounting=cfg["accounting"])
    else:
        breakdown = energy_Fp_relaxed(function, weight)
    report["breakdown"] = breakdown.to_dict()
    report["total"] = breakdown.total
    report["diagnostics"] = membership_diagnostics(function, weight).model_dump()
    report["error"] = None
    return report, None


def cantor_fixture(cfg: RunConfig) -> tuple:
    """Cantor intervals and the variation bound of Psi_1(w_delta)."""
    delta = Fraction(cfg["delta"])
    fixture = build_cantor_intervals(delta, cfg["depth"], s=cfg["s"], alpha=cfg["alpha"])
    weight = make_builtin_weight(cfg["alpha"], 1.0)
    measure = remaining_measure(fixture)
    report = variation_bound_check(fixture, weight).model_copy(
        update={
            "removed_count": len(fixture.removed_intervals),
            "remaining_measure": str(measure),
            "remaining_measure_float": float(measure),
            "w_integral": w_delta_integral(fixture),
            "w_integral_limit": w_delta_integral_limit(fixture),
        }
    )
    return report.model_dump(), intervals_frame(fixture)


class ReconstructionMetrics(BaseModel):
    """Staircase diagnostics of one reconstruction."""

    jump_count: int = Field(description="Jumps found by the detector")
    max_abs_slope: float = Field(description="Largest |u'| over the cells")
    total_variation: float = Field(description="Sum of |u_{i+1} - u_i|")
    distance_to_ramp: float = Field(description="max |u - ramp|")


class CompareRow(BaseModel):
    """ROF and HOT reconstructions of the same g_n."""

    model_config = ConfigDict(populate_by_name=True)

    n: int = Field(description="Staircase step count")
    lam: float = Field(alias="lambda", description="Fidelity parameter")
    rof: ReconstructionMetrics = Field(description="ROF minimizer diagnostics")
    rof_energy: float = Field(description="Discrete ROF energy")
    hot: ReconstructionMetrics = Field(description="HOT minimizer diagnostics")
    hot_energy: float = Field(description="Smoothed HOT energy")
    hot_converged: bool = Field(description="Convergence of the HOT descent")

    def flat(self) -> dict:
        """One CSV row: rof_* and hot_* columns side by side."""
        row = {"n": self.n, "lambda": self.lam}
        row.update({f"rof_{key}": value for key, value in self.rof.model_dump().items()})
        row["rof_energy"] = self.rof_energy
        row.update({f"hot_{key}": value for key, value in self.hot.model_dump().items()})
        row["hot_energy"] = self.hot_energy
        row["hot_converged"] = self.hot_converged
        return row


def compare_job(n: int, lam: float, params: dict, grid_cells: int) -> CompareRow:
    """ROF and HOT reconstructions of the same staircase data g_n.

    The HOT descent starts from the data. Takes plain parameters so that it
    can run in a worker process.
    """
    grid = Grid(0.0, 1.0, grid_cells)
    data = staircase_signal(grid, n)
    ramp = clean_ramp(grid)
    hot_cfg = _hot_config(params, lam)
    rof = rof_discrete_minimizer(data, lam)
    hot = minimize_hot(data, hot_cfg)

    def metrics(signal: DiscreteSignal) -> ReconstructionMetrics:
        return ReconstructionMetrics(
            jump_count=len(jump_detector(signal, hot_cfg.kappa)),
            max_abs_slope=float(np.max(np.abs(np.diff(signal.values)))) / grid.h,
            total_variation=total_variation(signal),
            distance_to_ramp=float(np.max(np.abs(signal.values - ramp.values))),
        )

    return CompareRow(
        n=n,
        lam=lam,
        rof=metrics(rof),
        rof_energy=rof_energy(rof, data, lam),
        hot=metrics(hot.minimizer),
        hot_energy=hot.energy,
        hot_converged=hot.converged,
    )


def compare(cfg: RunConfig) -> tuple:
    """Side-by-side ROF versus HOT metrics over every (n, lambda) pair."""
    params = {key: cfg[key] for key in ("alpha", "p", "eps_abs", "max_iters", "grad_tol", "energy_rel_tol", "kappa")}
    arguments = [(n, lam, params, cfg["grid_cells"]) for n in cfg["n"] for lam in cfg["lambda"]]
    rows = sorted(fan_out(compare_job, arguments, cfg.jobs), key=lambda row: (row.n, row.lam))
    stalled = [(row.n, row.lam) for row in rows if not row.hot_converged]
    error = f"HOT descent did not converge for (n, lambda) in {stalled}" if stalled else None
    result = {"rows": [row.model_dump(by_alias=True) for row in rows], "error": error}
    return result, pd.DataFrame([row.flat() for row in rows])


HANDLERS = {
    "rof-exact": rof_exact,
    "rof-staircase": rof_staircase,
    "hot-denoise": hot_denoise,
    "energy-eval": energy_eval,
    "cantor-fixture": cantor_fixture,
    "compare": compare,
}


def handler_for(command: str) -> Optional[Callable]:
    return HANDLERS.get(command)
