"""Exponents of families whose zeta function sums in closed form."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from scipy.optimize import brentq

BRACKET = (0.0, 8.0)


@dataclass(frozen=True)
class TriangularRho:
    """``sum rho_i**(-s) = 1``."""

    rho: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "rho", tuple(Fraction(r) for r in self.rho))
        if len(self.rho) < 2 or any(r <= 1 for r in self.rho):
            raise ValueError("need at least two rho_i, all > 1")

    def lhs(self, s: float) -> float:
        return sum(float(r) ** -s for r in self.rho)


@dataclass(frozen=True)
class AffineSab:
    """``(1-a)**(2s/3) + (ab)**(s/3) + (a(1-b))**(s/3) = 1``."""

    a: Fraction
    b: Fraction

    def __post_init__(self):
        _unit_interval(self, ("a", "b"))

    def lhs(self, s: float) -> float:
        a, b = float(self.a), float(self.b)
        return (1 - a) ** (2 * s / 3) + (a * b) ** (s / 3) + (a * (1 - b)) ** (s / 3)


@dataclass(frozen=True)
class FL1:
    """Box dimension equation on the first triangle: ``(1-a)**s + a b**(s-1) + a (1-b)**(s-1) = 1``."""

    a: Fraction
    b: Fraction

    def __post_init__(self):
        _unit_interval(self, ("a", "b"))

    def lhs(self, s: float) -> float:
        a, b = float(self.a), float(self.b)
        return (1 - a) ** s + a * b ** (s - 1) + a * (1 - b) ** (s - 1)


@dataclass(frozen=True)
class FL2:
    """Box dimension equation on the second triangle: ``(1-a)**s + a**(s-1) = 1``."""

    a: Fraction

    def __post_init__(self):
        _unit_interval(self, ("a",))

    def lhs(self, s: float) -> float:
        a = float(self.a)
        return (1 - a) ** s + a ** (s - 1)


ClosedFormFamily = Union[TriangularRho, AffineSab, FL1, FL2]


def _unit_interval(obj, names):
    for name in names:
        v = Fraction(getattr(obj, name))
        if not 0 < v < 1:
            raise ValueError(f"{name} must lie in (0, 1), got {v}")
        object.__setattr__(obj, name, v)


def solve_closed_form(family: ClosedFormFamily, bracket=BRACKET) -> float:
    """Unique root of ``lhs(s) = 1``; every left side decreases strictly in ``s``."""
    lo, hi = bracket
    lo = max(lo, 1e-12)

    def resid(s):
        return family.lhs(s) - 1

    flo, fhi = resid(lo), resid(hi)
    if flo * fhi > 0:
        raise ValueError(f"no root of {family} in ({bracket[0]}, {bracket[1]}]")
    if fhi == 0:
        return hi
    return brentq(resid, lo, hi, xtol=1e-14, maxiter=200)
