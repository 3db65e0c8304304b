"""Arithmetic in the circle group R/Z.

Every pairing in this library lands in R/Z. Values are stored by their
canonical representative in the half-open interval [0, 1). A value is either
*exact-rational* (backed by a ``fractions.Fraction``, so headline numbers like
1/2 or 3/4 reproduce with zero tolerance) or *floating* (the result of
quadrature). Group operations preserve exactness whenever every operand is
exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Real = Union[int, float, Fraction]

#: Default comparison tolerance, matching the quadrature accuracy targets.
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class CircleValue:
    """An element of R/Z with canonical representative in [0, 1).

    ``frac`` is the exact rational representative when the value was built
    along an exact path, otherwise ``None``.
    """

    representative: float
    frac: Fraction | None = None

    def __post_init__(self):
        r = self.representative
        if not math.isfinite(r):
            raise ValueError(f"circle representative must be finite, got {r!r}")
        if not 0.0 <= r < 1.0:
            raise ValueError(f"circle representative must lie in [0, 1), got {r!r}")
        if self.frac is not None:
            if not 0 <= self.frac < 1:
                raise ValueError(f"exact representative must lie in [0, 1), got {self.frac}")
            if float(self.frac) != r:
                raise ValueError("float and exact representatives disagree")

    @property
    def is_exact(self) -> bool:
        return self.frac is not None

    @property
    def p(self) -> int:
        """Numerator of the exact representative (exact values only)."""
        if self.frac is None:
            raise ValueError("floating CircleValue has no numerator")
        return self.frac.numerator

    @property
    def q(self) -> int:
        if self.frac is None:
            raise ValueError("floating CircleValue has no denominator")
        return self.frac.denominator

    def render(self) -> str:
        """Canonical text form: ``3/4 (mod 1)`` when exact, else 9 decimals."""
        if self.frac is not None:
            return f"{self.frac.numerator}/{self.frac.denominator} (mod 1)"
        return f"{self.representative:.9f}"

    def __str__(self) -> str:
        return self.render()


def reduce_mod_z(x: Real) -> CircleValue:
    """Reduce a real number modulo Z to its representative in [0, 1).

    Integers and Fractions take the exact path; floats stay floating.
    """
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        f = Fraction(x) % 1
        return CircleValue(float(f), f)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"cannot reduce non-finite value {x!r} mod Z")
        r = x - math.floor(x)
        if r >= 1.0:  # rounding of x - floor(x) for tiny negative x
            r = 0.0
        return CircleValue(r + 0.0)
    raise TypeError(f"unsupported operand type for reduce_mod_z: {type(x).__name__}")


def circle_add(a: CircleValue, b: CircleValue) -> CircleValue:
    """Group operation of R/Z; exact when both operands are exact."""
    if a.frac is not None and b.frac is not None:
        return reduce_mod_z(a.frac + b.frac)
    return reduce_mod_z(a.representative + b.representative)


def circle_neg(a: CircleValue) -> CircleValue:
    if a.frac is not None:
        return reduce_mod_z(-a.frac)
    return reduce_mod_z(-a.representative)


def circle_dist(a: CircleValue, b: CircleValue) -> float:
    """Circular distance min(|a-b|, 1-|a-b|) between representatives."""
    d = abs(a.representative - b.representative)
    return min(d, 1.0 - d)


def circle_eq(a: CircleValue, b: CircleValue, tol: float = DEFAULT_TOL) -> bool:
    """Equality up to circular distance ``tol``.

    With ``tol == 0`` an exact pair is compared exactly; floating values must
    then have identical representatives.
    """
    if tol < 0:
        raise ValueError(f"tolerance must be nonnegative, got {tol}")
    if tol == 0 and a.frac is not None and b.frac is not None:
        return a.frac == b.frac
    return circle_dist(a, b) <= tol
