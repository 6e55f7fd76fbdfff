"""Grids, discrete signals and finite representations of BV functions."""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.restoration.errors import ValidationError
from src.restoration.extended import ExtendedReal

logger = logging.getLogger(__name__)

DEFAULT_KAPPA = 10.0
SPACING_RTOL = 1e-9
PARTITION_TOL = 1e-12
VALUE_TOL = 1e-9


@dataclass(frozen=True)
class Grid:
    """Uniform partition of [a, b] into n cells."""

    a: float
    b: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise ValidationError(f"A grid needs finite a < b, got [{self.a}, {self.b}]")
        if int(self.n) != self.n or self.n < 2:
            raise ValidationError(f"A grid needs n >= 2 cells, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def nodes(self) -> np.ndarray:
        return self.a + self.h * np.arange(self.n + 1)

    @property
    def midpoints(self) -> np.ndarray:
        return self.a + self.h * (np.arange(self.n) + 0.5)

    @property
    def length(self) -> float:
        return self.b - self.a


@dataclass(frozen=True, eq=False)
class DiscreteSignal:
    """Nodal values of a function on a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n + 1,):
            raise ValidationError(
                f"Signal length {values.shape} does not match grid with {self.grid.n + 1} nodes"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid, f: Callable[[np.ndarray], np.ndarray]) -> "DiscreteSignal":
        return cls(grid, np.asarray(f(grid.nodes), dtype=float) * np.ones(grid.n + 1))

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    def with_values(self, values: np.ndarray) -> "DiscreteSignal":
        return DiscreteSignal(self.grid, values)

    def __add__(self, other: "DiscreteSignal") -> "DiscreteSignal":
        if other.grid != self.grid:
            raise ValidationError("Cannot add signals on different grids")
        return self.with_values(self.values + other.values)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"x": self.x, "value": self.values})


@dataclass(frozen=True)
class JumpRecord:
    """A jump point with its one-sided slope limits."""

    x: float
    jump: float
    left_slope: ExtendedReal
    right_slope: ExtendedReal

    def __post_init__(self):
        if self.jump == 0 or not math.isfinite(self.jump):
            raise ValidationError(f"A jump record needs a finite non-zero jump, got {self.jump}")
        object.__setattr__(self, "left_slope", ExtendedReal.coerce(self.left_slope))
        object.__setattr__(self, "right_slope", ExtendedReal.coerce(self.right_slope))

    @property
    def nu(self) -> int:
        return 1 if self.jump > 0 else -1

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "jump": self.jump,
            "nu": self.nu,
            "left_slope": self.left_slope.to_json(),
            "right_slope": self.right_slope.to_json(),
        }


@dataclass(frozen=True, eq=False)
class Piece:
    """A smooth piece on [left, right].

    `slopes` are samples of the absolutely continuous derivative at the
    midpoints of a uniform subdivision of the piece into len(slopes) cells.
    """

    left: float
    right: float
    slopes: np.ndarray
    start_value: float = 0.0

    def __post_init__(self):
        slopes = np.array(self.slopes, dtype=float).ravel()
        if not self.left < self.right:
            raise ValidationError(f"A piece needs left < right, got [{self.left}, {self.right}]")
        if slopes.size == 0 or not np.all(np.isfinite(slopes)):
            raise ValidationError("A piece needs at least one finite derivative sample")
        slopes.setflags(write=False)
        object.__setattr__(self, "slopes", slopes)

    @classmethod
    def from_function(
        cls, left: float, right: float, derivative: Callable, start_value: float = 0.0, cells: int = 1000
    ) -> "Piece":
        spacing = (right - left) / cells
        centers = left + spacing * (np.arange(cells) + 0.5)
        return cls(left, right, np.asarray(derivative(centers), dtype=float), start_value)

    @classmethod
    def from_values(cls, left: float, right: float, values: Sequence[float]) -> "Piece":
        """Difference quotients of node values, so increments telescope exactly."""
        values = np.asarray(values, dtype=float)
        if values.size < 2:
            raise ValidationError("A piece built from values needs at least two nodes")
        spacing = (right - left) / (values.size - 1)
        return cls(left, right, np.diff(values) / spacing, float(values[0]))

    @property
    def spacing(self) -> float:
        return (self.right - self.left) / self.slopes.size

    @property
    def increment(self) -> float:
        return self.spacing * float(np.sum(self.slopes))

    @property
    def end_value(self) -> float:
        return self.start_value + self.increment

    def absolute_variation(self) -> float:
        return self.spacing * float(np.sum(np.abs(self.slopes)))

    def value_at(self, x: float) -> float:
        offset = (x - self.left) / self.spacing
        full = int(min(max(math.floor(offset), 0), self.slopes.size))
        partial = offset - full if full < self.slopes.size else 0.0
        value = self.start_value + self.spacing * float(np.sum(self.slopes[:full]))
        if partial > 0:
            value += partial * self.spacing * float(self.slopes[full])
        return value


@dataclass(frozen=True, eq=False)
class PiecewiseBVFunction:
    """Finite representation of a BV function.

    Smooth pieces partition [a, b]; jumps sit at interior piece boundaries;
    cantor_atoms (position, mass) stand in for a Cantor part at prelimit
    resolution.
    """

    pieces: tuple
    jumps: tuple = ()
    cantor_atoms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        pieces = tuple(self.pieces)
        jumps = tuple(sorted(self.jumps, key=lambda j: j.x))
        atoms = tuple((float(x), float(m)) for x, m in self.cantor_atoms)
        if not pieces:
            raise ValidationError("A piecewise function needs at least one piece")
        for previous, current in zip(pieces, pieces[1:]):
            if abs(previous.right - current.left) > PARTITION_TOL * max(1.0, abs(current.left)):
                raise ValidationError(
                    f"Pieces do not partition the interval: gap between {previous.right} and {current.left}"
                )
        boundaries = [piece.right for piece in pieces[:-1]]
        for record in jumps:
            if not any(abs(record.x - b) <= PARTITION_TOL * max(1.0, abs(b)) for b in boundaries):
                raise ValidationError(f"Jump at {record.x} is not at an interior piece boundary")
        for x, _ in atoms:
            if not pieces[0].left < x < pieces[-1].right:
                raise ValidationError(f"Cantor atom at {x} lies outside ]a, b[")
        object.__setattr__(self, "pieces", pieces)
        object.__setattr__(self, "jumps", jumps)
        object.__setattr__(self, "cantor_atoms", atoms)

        for x, left, right, record in self.boundaries():
            arrived = left.end_value + self._atom_mass(left)
            expected = record.jump if record is not None else 0.0
            gap = right.start_value - arrived
            if abs(gap - expected) > VALUE_TOL * (1.0 + abs(arrived) + abs(right.start_value)):
                raise ValidationError(
                    f"Values at x={x} differ by {gap} but the recorded jump is {expected}"
                )

    def _atom_mass(self, piece: Piece) -> float:
        return sum(mass for position, mass in self.cantor_atoms if piece.left <= position < piece.right)

    @property
    def a(self) -> float:
        return self.pieces[0].left

    @property
    def b(self) -> float:
        return self.pieces[-1].right

    @property
    def grid(self) -> Grid:
        return Grid(self.a, self.b, max(2, sum(piece.slopes.size for piece in self.pieces)))

    def jump_at(self, boundary: float) -> Optional[JumpRecord]:
        for record in self.jumps:
            if abs(record.x - boundary) <= PARTITION_TOL * max(1.0, abs(boundary)):
                return record
        return None

    def boundaries(self) -> list:
        """Interior boundaries as (x, left piece, right piece, jump or None)."""
        return [
            (left.right, left, right, self.jump_at(left.right))
            for left, right in zip(self.pieces, self.pieces[1:])
        ]

    def total_variation(self) -> float:
        """|u'|(]a,b[) = integral of |(u')^a| + sum |jump| + sum |mass|."""
        return (
            sum(piece.absolute_variation() for piece in self.pieces)
            + sum(abs(record.jump) for record in self.jumps)
            + sum(abs(mass) for _, mass in self.cantor_atoms)
        )

    def evaluate(self, x: float) -> float:
        """Reconstruct u(x) from pieces, jumps and atoms (right-continuous)."""
        if not self.a <= x <= self.b:
            raise ValidationError(f"x={x} lies outside [{self.a}, {self.b}]")
        for piece in self.pieces:
            if x < piece.right or piece is self.pieces[-1]:
                break
        value = piece.value_at(x)
        value += sum(mass for position, mass in self.cantor_atoms if piece.left <= position <= x)
        return value

    @classmethod
    def smooth_from_signal(cls, signal: DiscreteSignal) -> "PiecewiseBVFunction":
        """One piece carrying the forward-difference slopes of the signal."""
        grid = signal.grid
        return cls((Piece.from_values(grid.a, grid.b, signal.values),))

    @classmethod
    def from_dict(cls, data: dict) -> "PiecewiseBVFunction":
        """Build from the JSON description used by the energy-eval command."""
        pieces = []
        for entry in data["pieces"]:
            if "values" in entry:
                pieces.append(Piece.from_values(entry["left"], entry["right"], entry["values"]))
            else:
                pieces.append(
                    Piece(entry["left"], entry["right"], entry["slopes"], entry.get("start_value", 0.0))
                )
        jumps = [
            JumpRecord(
                x=float(j["x"]),
                jump=float(j["jump"]),
                left_slope=ExtendedReal.coerce(j.get("left_slope", 0.0)),
                right_slope=ExtendedReal.coerce(j.get("right_slope", 0.0)),
            )
            for j in data.get("jumps", [])
        ]
        atoms = [tuple(atom) for atom in data.get("cantor_atoms", [])]
        return cls(tuple(pieces), tuple(jumps), tuple(atoms))

    def to_dict(self) -> dict:
        return {
            "pieces": [
                {
                    "left": piece.left,
                    "right": piece.right,
                    "start_value": piece.start_value,
                    "slopes": piece.slopes.tolist(),
                }
                for piece in self.pieces
            ],
            "jumps": [record.to_dict() for record in self.jumps],
            "cantor_atoms": [list(atom) for atom in self.cantor_atoms],
        }


def total_variation(s: DiscreteSignal) -> float:
    """Discrete total variation sum |u_{i+1} - u_i|."""
    return float(np.sum(np.abs(np.diff(s.values))))


def derivative_samples(s: DiscreteSignal) -> np.ndarray:
    """Forward differences divided by h (length n)."""
    return np.diff(s.values) / s.grid.h


def second_derivative_samples(s: DiscreteSignal) -> np.ndarray:
    """Central second differences divided by h^2 at interior nodes (length n-1)."""
    u = s.values
    return (u[2:] - 2.0 * u[1:-1] + u[:-2]) / s.grid.h**2


def jump_detector(s: DiscreteSignal, kappa: float = DEFAULT_KAPPA) -> list:
    """Flag node gaps that are large relative to the typical slope.

    A gap |u_{i+1} - u_i| is a jump when it exceeds
    kappa * h * (median |u'| + 1). One-sided slopes come from the
    neighbouring differences.

    Args:
        s: The signal to inspect.
        kappa: Threshold factor (> 0).

    Returns:
        A list of JumpRecord, ordered by position.
    """
    if not kappa > 0:
        raise ValidationError(f"kappa must be positive, got {kappa}")
    h = s.grid.h
    differences = np.diff(s.values)
    slopes = differences / h
    threshold = kappa * h * (float(np.median(np.abs(slopes))) + 1.0)
    flagged = np.flatnonzero(np.abs(differences) > threshold)

    records = []
    flagged_set = set(flagged.tolist())
    for i in flagged:
        left = _neighbour_slope(slopes, i, -1, flagged_set)
        right = _neighbour_slope(slopes, i, +1, flagged_set)
        records.append(
            JumpRecord(
                x=float(s.grid.a + h * (i + 0.5)),
                jump=float(differences[i]),
                left_slope=ExtendedReal.finite(left),
                right_slope=ExtendedReal.finite(right),
            )
        )
    logger.debug(f"jump_detector: threshold={threshold:.3e}, {len(records)} jumps")
    return records


def _neighbour_slope(slopes: np.ndarray, i: int, step: int, flagged: set) -> float:
    j = i + step
    while 0 <= j < slopes.size:
        if j not in flagged:
            return float(slopes[j])
        j += step
    return 0.0


def read_signal_csv(path: Union[str, Path]) -> DiscreteSignal:
    """Read a signal from a CSV file with header `x,value`.

    Raises:
        ValidationError: If the header is wrong, x is not strictly increasing,
            or the spacing is not uniform within 1e-9 relative.
    """
    frame = pd.read_csv(path, float_precision="round_trip")
    if list(frame.columns) != ["x", "value"]:
        raise ValidationError(f"Signal CSV needs the header 'x,value', got {list(frame.columns)}")
    x = frame["x"].to_numpy(dtype=float)
    values = frame["value"].to_numpy(dtype=float)
    if x.size < 3:
        raise ValidationError("A signal CSV needs at least three rows")
    steps = np.diff(x)
    if np.any(steps <= 0):
        raise ValidationError("Signal CSV x column must be strictly increasing")
    h = (x[-1] - x[0]) / (x.size - 1)
    if np.max(np.abs(steps - h)) > SPACING_RTOL * max(abs(h), 1.0):
        raise ValidationError("Signal CSV x column is not uniformly spaced")
    return DiscreteSignal(Grid(float(x[0]), float(x[-1]), x.size - 1), values)


def write_signal_csv(signal: DiscreteSignal, path: Union[str, Path]) -> None:
    signal.to_frame().to_csv(path, index=False, float_format="%.17g")
