"""Exact scalars, scaled matrices and norm functionals.

Matrix entries are Python ints, :class:`fractions.Fraction` or
:class:`Gaussian` values.  A matrix also carries a :class:`ScaleFactor`
``base**(num/den)`` so that normalizations such as ``2**(-1/3)`` never
have to be materialized as floats.  All threshold comparisons are
decided by integer arithmetic.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.optimize import linear_sum_assignment


# --------------------------------------------------------------------------
# scalars


class Gaussian:
    """Gaussian rational ``re + im*i`` with Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def __add__(self, other):
        if isinstance(other, Gaussian):
            return Gaussian(self.re + other.re, self.im + other.im)
        if isinstance(other, (int, Fraction)):
            return Gaussian(self.re + other, self.im)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Gaussian(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Gaussian):
            return Gaussian(self.re * other.re - self.im * other.im,
                            self.re * other.im + self.im * other.re)
        if isinstance(other, (int, Fraction)):
            return Gaussian(self.re * other, self.im * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_gaussian(other)
        d = other.abs2()
        if d == 0:
            raise ZeroDivisionError("division by zero Gaussian")
        return self * other.conjugate() * (1 / Fraction(d))

    def __rtruediv__(self, other):
        return as_gaussian(other) / self

    def conjugate(self):
        return Gaussian(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __eq__(self, other):
        if isinstance(other, Gaussian):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"Gaussian({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        sign = "+" if self.im >= 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


Scalar = Union[int, Fraction, Gaussian]

I_UNIT = Gaussian(0, 1)


def as_gaussian(x) -> Gaussian:
    if isinstance(x, Gaussian):
        return x
    return Gaussian(x, 0)


def simplify(x) -> Scalar:
    """Return the smallest representation of an exact scalar."""
    if isinstance(x, Gaussian):
        if x.im != 0:
            return x
        x = x.re
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else x
    if isinstance(x, (int, np.integer)):
        return int(x)
    raise TypeError(f"not an exact scalar: {x!r}")


def parse_scalar(text) -> Scalar:
    """Parse ``"3"``, ``"-1/2"``, ``"i"``, ``"1/2-3i"`` or ``"2i"``."""
    if isinstance(text, (int, Fraction, Gaussian)):
        return simplify(text)
    s = str(text).replace(" ", "").replace("j", "i")
    if not s:
        raise ValueError("empty scalar")
    if not s.endswith("i"):
        return simplify(Fraction(s))
    body = s[:-1]
    # split at the last sign that is not a leading one
    cut = max(body.rfind("+", 1), body.rfind("-", 1))
    if cut > 0 and body[cut - 1] not in "/":
        re_part, im_part = body[:cut], body[cut:]
    else:
        re_part, im_part = "0", body
    if im_part in ("", "+"):
        im_part = "1"
    elif im_part == "-":
        im_part = "-1"
    return simplify(Gaussian(Fraction(re_part), Fraction(im_part)))


def abs2(x) -> Fraction:
    """Squared modulus as an exact rational."""
    if isinstance(x, Gaussian):
        return x.abs2()
    return Fraction(x) ** 2


def is_real(x) -> bool:
    return not isinstance(x, Gaussian) or x.im == 0


def sqrt_bounds(q: Fraction, bits: int = 200) -> tuple[Fraction, Fraction]:
    """Rational lower and upper bounds for ``sqrt(q)``, exact for squares."""
    q = Fraction(q)
    if q < 0:
        raise ValueError("negative argument")
    scaled = q * 4 ** bits
    lo_int = math.isqrt(math.floor(scaled))
    lo = Fraction(lo_int, 2 ** bits)
    if lo * lo == q:
        return lo, lo
    return lo, Fraction(lo_int + 1, 2 ** bits)


def exact_sqrt(q: Fraction) -> Fraction | None:
    q = Fraction(q)
    if q < 0:
        return None
    a, b = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


# --------------------------------------------------------------------------
# scale factors


def _integer_root(x: int, k: int) -> int | None:
    if x < 0:
        return None
    if x in (0, 1):
        return x
    r = round(x ** (1.0 / k))
    for c in (r - 1, r, r + 1):
        if c >= 0 and c ** k == x:
            return c
    return None


def _primitive_base(base: Fraction) -> tuple[Fraction, int]:
    """Write ``base = b0**k`` with ``b0 >= 1`` and ``k`` maximal (sign-aware)."""
    sign = 1
    if base < 1:
        base, sign = 1 / base, -1
    if base == 1:
        return Fraction(1), 0
    p, q = base.numerator, base.denominator
    top = max(p.bit_length(), q.bit_length())
    for k in range(top, 1, -1):
        rp, rq = _integer_root(p, k), _integer_root(q, k)
        if rp is not None and rq is not None:
            return Fraction(rp, rq), sign * k
    return base, sign


@dataclass(frozen=True)
class ScaleFactor:
    """``base ** (num/den)``, normalized so that equal values compare equal.

    The base is reduced to its primitive form greater than one, e.g.
    ``(1/4)**(-1/3)`` is stored as ``2**(2/3)``.
    """

    base: Fraction = Fraction(1)
    num: int = 0
    den: int = 1

    def __post_init__(self):
        base, num, den = Fraction(self.base), int(self.num), int(self.den)
        if base <= 0 or den <= 0:
            raise ValueError("scale needs a positive base and denominator")
        b0, k = _primitive_base(base)
        num *= k
        if num == 0 or b0 == 1:
            b0, num, den = Fraction(1), 0, 1
        g = math.gcd(num, den)
        object.__setattr__(self, "base", b0)
        object.__setattr__(self, "num", num // g)
        object.__setattr__(self, "den", den // g)

    @property
    def is_identity(self) -> bool:
        return self.num == 0

    def compatible(self, other: "ScaleFactor") -> bool:
        return self.is_identity or other.is_identity or self.base == other.base

    def __mul__(self, other: "ScaleFactor") -> "ScaleFactor":
        if self.is_identity:
            return other
        if other.is_identity:
            return self
        if self.base != other.base:
            raise ValueError(f"incompatible scale bases {self.base} and {other.base}")
        return ScaleFactor(self.base, self.num * other.den + other.num * self.den,
                           self.den * other.den)

    def __pow__(self, k: int) -> "ScaleFactor":
        return ScaleFactor(self.base, self.num * k, self.den)

    def inverse(self) -> "ScaleFactor":
        return ScaleFactor(self.base, -self.num, self.den)

    def __float__(self):
        return float(self.base) ** (self.num / self.den)

    def log(self) -> float:
        return math.log(self.base) * self.num / self.den

    def exponent(self) -> Fraction:
        return Fraction(self.num, self.den)

    def __str__(self):
        if self.is_identity:
            return "1"
        return f"{self.base}^({self.num}/{self.den})"


IDENTITY_SCALE = ScaleFactor()


def scale_ge_one(value: Fraction, scale: ScaleFactor) -> bool:
    """Exact test of ``value * scale >= 1`` for a positive rational ``value``."""
    if value <= 0:
        return False
    # (value * b^(a/d))^d >= 1  <=>  value^d * b^a >= 1
    return Fraction(value) ** scale.den * Fraction(scale.base) ** scale.num >= 1


# --------------------------------------------------------------------------
# matrices


def _entries(rows) -> tuple[tuple[Scalar, ...], ...]:
    out = tuple(tuple(parse_scalar(x) for x in row) for row in rows)
    n = len(out)
    if n == 0 or any(len(r) != n for r in out):
        raise ValueError("matrix must be square with n >= 1")
    return out


@dataclass(frozen=True)
class ExactMatrix:
    """Square matrix ``scale * entries`` with exact entries."""

    entries: tuple
    scale: ScaleFactor = IDENTITY_SCALE

    def __post_init__(self):
        object.__setattr__(self, "entries", _entries(self.entries))

    @property
    def n(self) -> int:
        return len(self.entries)

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        return mat_mul(self, other)

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(tuple(zip(*self.entries)), self.scale)

    @property
    def is_real(self) -> bool:
        return all(is_real(x) for row in self.entries for x in row)

    def is_nonnegative(self) -> bool:
        return self.is_real and all(Fraction(simplify(x)) >= 0
                                    for row in self.entries for x in row)

    def common_denominator(self) -> int:
        d = 1
        for row in self.entries:
            for x in row:
                g = as_gaussian(x)
                d = math.lcm(d, g.re.denominator, g.im.denominator)
        return d

    def to_numpy(self) -> np.ndarray:
        """Float (or complex) array including the scale."""
        dtype = float if self.is_real else complex
        arr = np.array([[complex(x) if dtype is complex else float(Fraction(simplify(x)))
                         for x in row] for row in self.entries], dtype=dtype)
        return arr * float(self.scale)

    def __str__(self):
        body = "[" + ", ".join("[" + ", ".join(str(x) for x in row) + "]"
                               for row in self.entries) + "]"
        return body if self.scale.is_identity else f"{self.scale} * {body}"


def mat_mul(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    """Exact product ``a @ b``; scales multiply."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch {a.n} vs {b.n}")
    scale = a.scale * b.scale
    n = a.n
    bt = list(zip(*b.entries))
    rows = []
    for i in range(n):
        ai = a.entries[i]
        rows.append(tuple(simplify(sum((x * y for x, y in zip(ai, bt[j])), 0))
                          for j in range(n)))
    return ExactMatrix(tuple(rows), scale)


def mat_sub_identity(m: ExactMatrix) -> ExactMatrix:
    n = m.n
    return ExactMatrix(tuple(tuple(m[i, j] - (1 if i == j else 0) for j in range(n))
                             for i in range(n)), m.scale)


def is_zero(m: ExactMatrix) -> bool:
    return all(x == 0 for row in m.entries for x in row)


# --------------------------------------------------------------------------
# norms


@dataclass(frozen=True)
class MaxAbs:
    """Max entry modulus."""

    name = "maxabs"


@dataclass(frozen=True)
class RowSumInf:
    """Max absolute row sum (real entries)."""

    name = "rowsum"


@dataclass(frozen=True)
class EntrySumL1:
    """Sum of absolute entries (real entries)."""

    name = "l1"


@dataclass(frozen=True)
class WeightedBilinear:
    """``sum_ij A_ij v_i w_j``; must be positive on every element it meets."""

    v: tuple[int, ...]
    w: tuple[int, ...]
    name = "weighted"

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(int(x) for x in self.v))
        object.__setattr__(self, "w", tuple(int(x) for x in self.w))


NormFunctional = Union[MaxAbs, RowSumInf, EntrySumL1, WeightedBilinear]


class Cmp(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True)
class NormValue:
    """``sqrt(magnitude)`` if ``is_squared`` else ``magnitude``, times ``scale``."""

    magnitude: Fraction
    is_squared: bool = False
    scale: ScaleFactor = IDENTITY_SCALE

    def __float__(self):
        m = float(self.magnitude)
        if self.is_squared:
            m = math.sqrt(m)
        return m * float(self.scale)

    def log(self) -> float:
        """Natural log, accurate even when the float value would overflow."""
        m = self.magnitude
        lm = math.log(m.numerator) - math.log(m.denominator)
        if self.is_squared:
            lm /= 2
        return lm + self.scale.log()

    def squared(self) -> "NormValue":
        if self.is_squared:
            return self
        return NormValue(self.magnitude ** 2, True, self.scale)


def norm_eval(f: NormFunctional, m: ExactMatrix) -> NormValue:
    entries = [x for row in m.entries for x in row]
    if isinstance(f, MaxAbs):
        if m.is_real:
            return NormValue(max(abs(Fraction(simplify(x))) for x in entries), False, m.scale)
        return NormValue(max(abs2(x) for x in entries), True, m.scale)
    if not m.is_real:
        raise ValueError(f"{type(f).__name__} is only exact for real entries")
    if isinstance(f, RowSumInf):
        val = max(sum(abs(Fraction(simplify(x))) for x in row) for row in m.entries)
        return NormValue(val, False, m.scale)
    if isinstance(f, EntrySumL1):
        return NormValue(sum(abs(Fraction(simplify(x))) for x in entries), False, m.scale)
    if isinstance(f, WeightedBilinear):
        n = m.n
        if len(f.v) != n or len(f.w) != n:
            raise ValueError("weight vectors must match the dimension")
        val = sum(Fraction(simplify(m[i, j])) * f.v[i] * f.w[j]
                  for i in range(n) for j in range(n))
        if val <= 0:
            raise ValueError(f"weighted norm is nonpositive ({val}) on this element")
        return NormValue(val, False, m.scale)
    raise TypeError(f"unknown norm {f!r}")


def norm_cmp(nv: NormValue, threshold_base, threshold_exp: int) -> Cmp:
    """Exact trichotomy of ``nv`` against ``threshold_base ** threshold_exp``."""
    tb = Fraction(threshold_base)
    if tb <= 0:
        raise ValueError("threshold base must be positive")
    tscale = ScaleFactor(tb, int(threshold_exp), 1)
    if not nv.scale.compatible(tscale):
        raise ValueError(f"threshold base {tb} incompatible with scale {nv.scale}")
    # nv = mag^(1/e) * B^(a/d) against B^(t) with e in {1,2}
    rel = tscale * nv.scale.inverse()      # threshold / scale = B^(c/d')
    e = 2 if nv.is_squared else 1
    lhs = Fraction(nv.magnitude) ** rel.den
    rhs = Fraction(rel.base) ** (e * rel.num)
    if lhs < rhs:
        return Cmp.LESS
    if lhs > rhs:
        return Cmp.GREATER
    return Cmp.EQUAL


def compare_norms(a: NormValue, b: NormValue) -> Cmp:
    """Exact comparison of two norm values sharing a scale base."""
    if not a.scale.compatible(b.scale):
        raise ValueError("incompatible scale bases")
    rel = a.scale * b.scale.inverse()
    # compare sqrt^ea(ma) * B^(c/d) with sqrt^eb(mb); raise to the power 2d
    ma = Fraction(a.magnitude) ** (1 if a.is_squared else 2)
    mb = Fraction(b.magnitude) ** (1 if b.is_squared else 2)
    lhs = ma ** rel.den * Fraction(rel.base) ** (2 * rel.num)
    rhs = mb ** rel.den
    return Cmp((lhs > rhs) - (lhs < rhs))


# --------------------------------------------------------------------------
# certificates helpers


def dominating_permutation(m: ExactMatrix) -> tuple[int, ...] | None:
    """Permutation ``sigma`` with ``m[i, sigma[i]] >= 1`` for all rows, or None.

    Entries must be real and nonnegative.  The identity is preferred when
    it qualifies; otherwise a perfect matching over unit-or-larger entries
    is searched.
    """
    if not m.is_real:
        raise ValueError("entries must be real")
    vals = [[Fraction(simplify(x)) for x in row] for row in m.entries]
    if any(x < 0 for row in vals for x in row):
        raise ValueError("negative entry present")
    n = m.n
    if all(vals[i][i] >= 1 for i in range(n)):
        return tuple(range(n))
    ok = np.array([[1.0 if x >= 1 else 0.0 for x in row] for row in vals])
    rows, cols = linear_sum_assignment(-ok)
    if ok[rows, cols].sum() < n:
        return None
    sigma = [0] * n
    for r, c in zip(rows, cols):
        sigma[r] = int(c)
    return tuple(sigma)


def matrix(rows: Iterable[Sequence], scale: ScaleFactor | None = None) -> ExactMatrix:
    """Convenience constructor accepting ints, Fractions, Gaussians or strings."""
    return ExactMatrix(tuple(tuple(r) for r in rows), scale or IDENTITY_SCALE)
