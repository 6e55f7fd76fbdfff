"""Three-state extended reals: finite values, +inf and -inf.

Slopes at jump points, the transform inverse at the ends of [0, M] and
relaxed energies outside their domain are all extended reals. Keeping the
infinite cases as explicit states means no floating-point infinity ever
reaches a quadrature routine.
"""

import math
from dataclasses import dataclass
from functools import total_ordering
from typing import Union

from src.restoration.errors import ValidationError

FINITE = "finite"
PLUS_INF = "+inf"
MINUS_INF = "-inf"

_RANK = {MINUS_INF: -1, FINITE: 0, PLUS_INF: 1}


@total_ordering
@dataclass(frozen=True)
class ExtendedReal:
    """A value of the extended real line."""

    kind: str = FINITE
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in _RANK:
            raise ValidationError(f"Unknown extended-real kind: {self.kind!r}")
        if self.kind == FINITE and not math.isfinite(self.value):
            raise ValidationError(f"Finite extended real needs a finite value, got {self.value}")

    @classmethod
    def finite(cls, value: float) -> "ExtendedReal":
        return cls(FINITE, float(value))

    @classmethod
    def coerce(cls, value: Union["ExtendedReal", float, int, str]) -> "ExtendedReal":
        """Convert floats (including +-math.inf) and JSON markers."""
        if isinstance(value, ExtendedReal):
            return value
        if isinstance(value, str):
            token = value.strip().lower()
            if token in {"+inf", "inf", "+infinity", "infinity"}:
                return POS_INF
            if token in {"-inf", "-infinity"}:
                return NEG_INF
            value = float(token)
        value = float(value)
        if math.isnan(value):
            raise ValidationError("NaN is not an extended real")
        if math.isinf(value):
            return POS_INF if value > 0 else NEG_INF
        return cls(FINITE, value)

    @property
    def is_finite(self) -> bool:
        return self.kind == FINITE

    @property
    def is_pos_inf(self) -> bool:
        return self.kind == PLUS_INF

    @property
    def is_neg_inf(self) -> bool:
        return self.kind == MINUS_INF

    def __float__(self) -> float:
        if self.kind == PLUS_INF:
            return math.inf
        if self.kind == MINUS_INF:
            return -math.inf
        return self.value

    def __neg__(self) -> "ExtendedReal":
        if self.kind == PLUS_INF:
            return NEG_INF
        if self.kind == MINUS_INF:
            return POS_INF
        return ExtendedReal.finite(-self.value)

    def __lt__(self, other) -> bool:
        other = ExtendedReal.coerce(other)
        return (_RANK[self.kind], self.value if self.is_finite else 0.0) < (
            _RANK[other.kind],
            other.value if other.is_finite else 0.0,
        )

    def __eq__(self, other) -> bool:
        try:
            other = ExtendedReal.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.kind == other.kind and (not self.is_finite or self.value == other.value)

    def __hash__(self) -> int:
        return hash((self.kind, self.value if self.is_finite else 0.0))

    def to_json(self) -> Union[float, str]:
        """Finite values as numbers, infinities as the strings "+inf"/"-inf"."""
        return self.value if self.is_finite else self.kind

    def __repr__(self) -> str:
        return repr(self.value) if self.is_finite else self.kind


POS_INF = ExtendedReal(PLUS_INF)
NEG_INF = ExtendedReal(MINUS_INF)
