"""Run configuration: CLI flags > config file > defaults.

The config file is a flat KEY=value text file (read with python-dotenv).
Keys are case-insensitive and '-' and '_' are interchangeable, so
`LAMBDA=9` and `grid-cells=800` both work. Every subcommand declares its
parameters as a pydantic model; the model validates the merged raw values.
"""

import logging
import os
from fractions import Fraction
from typing import Annotated, Any, List, Literal, Optional, Type

from dotenv import dotenv_values
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PositiveInt, field_validator
from pydantic import ValidationError as PydanticValidationError

from src.restoration.errors import ValidationError

logger = logging.getLogger(__name__)

LOG_LEVEL_ENV = "STAIRCASE_LOG_LEVEL"
JOBS_ENV = "STAIRCASE_JOBS"
DEFAULT_LOG_LEVEL = "INFO"


class UsageError(ValidationError):
    """Bad command line: unknown flag, missing value, unknown subcommand."""


def normalize_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def _split_list(value: Any) -> Any:
    """'10, 20' -> ['10', '20']; lists and scalars pass through as lists."""
    if isinstance(value, str):
        return [part.strip() for part in value.split(",") if part.strip()]
    if isinstance(value, (int, float)):
        return [value]
    return value


def _blank_to_none(value: Any) -> Any:
    if value is None or str(value).strip().lower() in ("", "none", "auto"):
        return None
    return value


PositiveReal = Annotated[float, Field(gt=0, allow_inf_nan=False)]
GridCells = Annotated[int, Field(ge=2)]
RealList = Annotated[List[PositiveReal], BeforeValidator(_split_list), Field(min_length=1)]
CountList = Annotated[List[PositiveInt], BeforeValidator(_split_list), Field(min_length=1)]
OptionalReal = Annotated[Optional[PositiveReal], BeforeValidator(_blank_to_none)]
OptionalPath = Annotated[Optional[str], BeforeValidator(_blank_to_none)]


class CommandParams(BaseModel):
    """Base for the per-subcommand parameter models."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True, frozen=True)

    @classmethod
    def keys(cls) -> List[str]:
        """External parameter names: the alias when there is one."""
        return [field.alias or name for name, field in cls.model_fields.items()]

    @classmethod
    def flag(cls, key: str) -> str:
        return "--" + key.replace("_", "-")


class SolverParams(CommandParams):
    """Descent settings shared by the HOT subcommands."""

    eps_abs: OptionalReal = Field(default=None, description="smoothing width (auto when omitted)")
    max_iters: PositiveInt = Field(default=5000, description="step cap of the descent")
    grad_tol: PositiveReal = Field(default=1e-6, description="gradient tolerance")
    energy_rel_tol: PositiveReal = Field(default=1e-10, description="relative energy decrease tolerance")
    kappa: PositiveReal = Field(default=10.0, description="jump detector threshold factor")


class RofExactParams(CommandParams):
    lam: PositiveReal = Field(default=9.0, alias="lambda", description="fidelity parameter")
    datum: Literal["ramp", "staircase"] = Field(default="ramp", description="monotone datum")
    n: PositiveInt = Field(default=100, description="steps of the staircase datum")
    grid_cells: GridCells = Field(default=1000, description="number of grid cells")


class RofStaircaseParams(CommandParams):
    lam: RealList = Field(default=[9.0], alias="lambda", description="fidelity parameter(s), comma separated")
    n: CountList = Field(default=[100], description="step count(s), comma separated")
    grid_cells: GridCells = Field(default=1000, description="number of grid cells")


class HotDenoiseParams(SolverParams):
    lam: PositiveReal = Field(default=9.0, alias="lambda", description="fidelity parameter")
    p: PositiveReal = Field(default=1.0, description="regularization exponent p >= 1")
    alpha: PositiveReal = Field(default=2.0, description="tail exponent of the built-in weight")
    n: PositiveInt = Field(default=100, description="noise cell count")
    grid_cells: GridCells = Field(default=400, description="number of grid cells")
    noise: Literal["none", "staircase", "square"] = Field(default="staircase", description="noise family")
    amplitude: PositiveReal = Field(default=0.01, description="square wave amplitude")
    input: OptionalPath = Field(default=None, description="signal CSV used instead of the ramp")


class EnergyEvalParams(CommandParams):
    input: str = Field(min_length=1, description="signal CSV or piecewise-function JSON")
    p: PositiveReal = Field(default=1.0, description="regularization exponent p >= 1")
    alpha: PositiveReal = Field(default=2.0, description="tail exponent of the built-in weight")
    accounting: Literal["phi", "phi_hat"] = Field(default="phi", description="jump cost accounting for p=1")


class CantorFixtureParams(CommandParams):
    delta: str = Field(default="1/16", description="scale factor in ]0, 1/2[")
    depth: PositiveInt = Field(default=8, description="construction depth")
    s: PositiveReal = Field(default=2.0, description="growth exponent")
    alpha: PositiveReal = Field(default=2.0, description="tail exponent of the built-in weight")

    @field_validator("delta", mode="before")
    @classmethod
    def _rational(cls, value: Any) -> str:
        text = str(value).strip()
        Fraction(text)
        return text


class CompareParams(SolverParams):
    lam: RealList = Field(default=[9.0], alias="lambda", description="fidelity parameter(s), comma separated")
    n: CountList = Field(default=[10, 50, 100, 200], description="step count(s), comma separated")
    p: PositiveReal = Field(default=1.0, description="regularization exponent p >= 1")
    alpha: PositiveReal = Field(default=2.0, description="tail exponent of the built-in weight")
    grid_cells: GridCells = Field(default=800, description="number of grid cells")


COMMAND_PARAMS = {
    "rof-exact": RofExactParams,
    "rof-staircase": RofStaircaseParams,
    "hot-denoise": HotDenoiseParams,
    "energy-eval": EnergyEvalParams,
    "cantor-fixture": CantorFixtureParams,
    "compare": CompareParams,
}

RUN_OPTIONS = ("seed", "jobs", "out", "csv_out")


class RunConfig(BaseModel):
    """Fully resolved parameters of one harness run."""

    model_config = ConfigDict(frozen=True)

    command: str = Field(description="Subcommand name")
    params: dict = Field(default_factory=dict, description="Validated parameters keyed by flag name")
    seed: int = Field(default=0, ge=0, description="Seed recorded with the run")
    jobs: PositiveInt = Field(default=1, description="Worker processes for sweeps")
    out: Optional[str] = Field(default=None, description="JSON output path, stdout when None")
    csv_out: Optional[str] = Field(default=None, description="CSV output path")
    config_file: Optional[str] = Field(default=None, description="Config file the values came from")
    sources: dict = Field(default_factory=dict, description="cli, file or default per parameter")

    def __getitem__(self, name: str) -> Any:
        return self.params[name]


def _describe(error: PydanticValidationError, model: Type[BaseModel]) -> str:
    problems = []
    for item in error.errors():
        key = str(item["loc"][0]) if item["loc"] else "value"
        flag = CommandParams.flag(key) if issubclass(model, CommandParams) else key
        problems.append(f"{flag}: {item['msg']}")
    return "; ".join(problems)


def load_config_file(path: Optional[str]) -> dict:
    """Read a flat KEY=value file into a dict with normalized keys."""
    if path is None:
        return {}
    if not os.path.isfile(path):
        raise ValidationError(f"Config file not found: {path}")
    values = dotenv_values(path)
    return {normalize_key(key): value for key, value in values.items() if value is not None}


def resolve_config(command: str, cli_values: dict, file_values: dict) -> RunConfig:
    """Merge CLI flags, config file entries and defaults for `command`.

    Args:
        command: Subcommand name.
        cli_values: Parsed flags; None means "not given".
        file_values: Normalized config file entries.

    Returns:
        The RunConfig, every parameter validated.

    Raises:
        ValidationError: If a value fails validation or a required value is missing.
    """
    model = COMMAND_PARAMS.get(command)
    if model is None:
        raise UsageError(f"Unknown subcommand {command!r}")
    keys = model.keys()
    unknown = sorted(set(file_values) - set(keys) - set(RUN_OPTIONS))
    if unknown:
        logger.warning(f"Ignoring config file keys not used by {command}: {unknown}")

    raw, sources = {}, {}
    for key in keys:
        if cli_values.get(key) is not None:
            raw[key], sources[key] = cli_values[key], "cli"
        elif key in file_values:
            raw[key], sources[key] = file_values[key], "file"
        else:
            sources[key] = "default"
    try:
        params = model.model_validate(raw)
    except PydanticValidationError as e:
        raise ValidationError(f"Invalid value for {_describe(e, model)}") from e

    def pick(name: str, env: Optional[str] = None) -> Any:
        if cli_values.get(name) is not None:
            return cli_values[name]
        if name in file_values:
            return file_values[name]
        if env and os.getenv(env):
            return os.getenv(env)
        return None

    options = {name: pick(name, JOBS_ENV if name == "jobs" else None) for name in RUN_OPTIONS}
    try:
        return RunConfig(
            command=command,
            params=params.model_dump(by_alias=True),
            config_file=cli_values.get("config"),
            sources=sources,
            **{name: value for name, value in options.items() if value is not None},
        )
    except PydanticValidationError as e:
        raise ValidationError(f"Invalid run option {_describe(e, RunConfig)}") from e


def resolve_log_level(cli_level: Optional[str]) -> int:
    name = (cli_level or os.getenv(LOG_LEVEL_ENV) or DEFAULT_LOG_LEVEL).upper()
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        raise UsageError(f"Unknown log level {name!r}")
    return level
