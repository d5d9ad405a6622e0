"""Objective definitions for the three data-exchange cost variants.

P1 minimizes the induced verification workload (weighted by alpha1/alpha2),
P2 minimizes transmitted bytes, and P3 blends both with mixing weight omega.
All parameters are exact non-negative rationals so that optimality
comparisons downstream never suffer rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ValidationError

P1 = "p1"
P2 = "p2"
P3 = "p3"

_VARIANTS = (P1, P2, P3)


def as_fraction(value) -> Fraction:
    """Convert ``value`` to an exact Fraction.

    Accepts ints, Fractions, decimal strings ("1.5"), fraction strings
    ("3/7"), and floats (converted exactly from their binary value).
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError(f"cannot interpret {value!r} as a number")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ValidationError(f"non-finite value {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse number {value!r}") from exc
    raise ValidationError(f"cannot interpret {value!r} as a number")


@dataclass(frozen=True)
class Objective:
    """Which cost is being minimized, plus its parameters.

    alpha1/alpha2 weight the two robots' induced workloads (used by p1 and
    p3); omega mixes the workload term into the communication term (p3).
    """

    variant: str
    alpha1: Fraction = field(default=Fraction(1))
    alpha2: Fraction = field(default=Fraction(1))
    omega: Fraction = field(default=Fraction(0))

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValidationError(f"unknown objective variant {self.variant!r}")
        for name in ("alpha1", "alpha2", "omega"):
            val = as_fraction(getattr(self, name))
            if val < 0:
                raise ValidationError(f"{name} must be non-negative, got {val}")
            object.__setattr__(self, name, val)

    @classmethod
    def p1(cls, alpha1=1, alpha2=1) -> "Objective":
        return cls(P1, alpha1=as_fraction(alpha1), alpha2=as_fraction(alpha2))

    @classmethod
    def p2(cls) -> "Objective":
        return cls(P2)

    @classmethod
    def p3(cls, alpha1=1, alpha2=1, omega=1) -> "Objective":
        return cls(
            P3,
            alpha1=as_fraction(alpha1),
            alpha2=as_fraction(alpha2),
            omega=as_fraction(omega),
        )
