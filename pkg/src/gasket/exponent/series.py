"""Certified truncations of the zeta-type series over next-to-diagonal words.

A family ``(h, t, W)`` stands for the words ``h t^k W`` with ``k >= 1``.
Starting from the families ``(h, t, ())``, every member of norm at most
``kappa`` is dropped and replaced by the families ``(h', t', member)``;
this repeats until no explicit member is small.  Each family is summed
exactly up to ``k = K`` and the remainder is enclosed by a tail bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from ..enumeration.spec import GasketSpec, Geometric, Unipotent2
from ..exact import (
    ExactMatrix,
    MaxAbs,
    WeightedBilinear,
    mat_mul,
    mat_sub_identity,
    norm_eval,
)
from .zeta import hurwitz_zeta

DEFAULT_TERMS = 200
GEOMETRIC_TERMS = 30
MAX_FAMILIES = 20000
_REL = 1e-12          # relative slack for floating summation
_SHIFT = 1e-9         # slack on the Hurwitz offsets


class SeriesError(ValueError):
    pass


@dataclass
class Family:
    head: int
    tail: int
    suffix: tuple[int, ...]
    removed: frozenset[int] = frozenset()
    model: object = None
    # filled by _prepare
    log_terms: np.ndarray = field(default=None, repr=False)
    tail_params: tuple = ()

    def word(self, k: int) -> tuple[int, ...]:
        return (self.head,) + (self.tail,) * k + self.suffix


@dataclass
class QSeriesSet:
    spec: GasketSpec
    kappa: float
    families: list[Family]
    terms: int

    @property
    def needs_s_above_one(self) -> bool:
        return any(isinstance(f.model, Unipotent2) for f in self.families)

    def explicit_count(self) -> int:
        return sum(len(f.log_terms) for f in self.families)


def _float_norm(nv) -> float:
    return float(nv)


def _log_norm(nv) -> float:
    return nv.log()


def _small(spec: GasketSpec, mat: ExactMatrix, kappa: Fraction) -> bool:
    nv = norm_eval(spec.norm, mat)
    if nv.scale.is_identity:
        lhs = nv.magnitude
        return lhs <= (kappa * kappa if nv.is_squared else kappa)
    return nv.log() <= math.log(kappa) + 1e-12 if kappa > 0 else False


def _complex_entries(m: ExactMatrix) -> np.ndarray:
    return np.array([complex(x) for row in m.entries for x in row], dtype=complex)


def _unipotent_parts(spec: GasketSpec, fam: Family):
    """``A_h A_t^k A_W = scale * (P + k Q)`` as complex float arrays."""
    gens = spec.generators
    a_h = gens[fam.head - 1]
    a_w = spec.word_matrix(fam.suffix)
    nil = mat_sub_identity(gens[fam.tail - 1])
    p = mat_mul(a_h, a_w)
    q = mat_mul(mat_mul(a_h, nil), a_w)
    return p, q


def _unipotent_bounds(spec: GasketSpec, p: ExactMatrix, q: ExactMatrix, start: int):
    """Return ``(qmax, a_lo, a_hi)`` with ``qmax (k + a_lo) <= ||.|| <= qmax (k + a_hi)`` for ``k >= start``.

    ``qmax`` already includes the scale factor.
    """
    sc = float(p.scale)
    if isinstance(spec.norm, WeightedBilinear):
        pv = float(norm_eval_linear(spec.norm, p))
        qv = float(norm_eval_linear(spec.norm, q))
        if qv <= 0:
            raise SeriesError("weighted norm does not grow along this family")
        a = pv / qv
        return sc * qv, a - _SHIFT, a + _SHIFT
    if not isinstance(spec.norm, MaxAbs):
        raise SeriesError("tails are only implemented for the max and weighted norms")
    pe, qe = _complex_entries(p), _complex_entries(q)
    qa = np.abs(qe)
    qmax = float(qa.max())
    if qmax == 0:
        raise SeriesError("tail generator acts trivially on this family")
    top = qa >= qmax * (1 - 1e-14)
    z = pe[top] / qe[top]
    a_lo = float(np.max(z.real))
    b = np.empty(len(pe))
    nz = qa > 0
    zz = np.zeros(len(pe), dtype=complex)
    zz[nz] = pe[nz] / qe[nz]
    x, y = zz.real, zz.imag
    if np.any(start + x[nz] <= 0):
        raise SeriesError("truncation too short for the tail enclosure")
    b[nz] = qa[nz] * x[nz] + qa[nz] * y[nz] ** 2 / (2 * (start + x[nz]))
    b[~nz] = np.abs(pe[~nz])
    a_hi = float(np.max(b)) / qmax
    return sc * qmax, a_lo - _SHIFT, a_hi + _SHIFT


def norm_eval_linear(norm: WeightedBilinear, m: ExactMatrix) -> Fraction:
    """Weighted sum without the positivity check (``Q`` parts may vanish)."""
    n = m.n
    return sum((Fraction(m[i, j]) * norm.v[i] * norm.w[j] for i in range(n) for j in range(n)),
               Fraction(0))


def _explicit_unipotent(spec, p, q, ks) -> np.ndarray:
    """Log norms of ``P + k Q`` for the integer array ``ks``."""
    sc_log = p.scale.log()
    if isinstance(spec.norm, WeightedBilinear):
        pv = float(norm_eval_linear(spec.norm, p))
        qv = float(norm_eval_linear(spec.norm, q))
        return np.log(pv + ks * qv) + sc_log
    pe, qe = _complex_entries(p), _complex_entries(q)
    vals = np.abs(pe[None, :] + ks[:, None] * qe[None, :]).max(axis=1)
    return np.log(vals) + sc_log


def _geometric_logs(spec: GasketSpec, fam: Family, count: int) -> list[float]:
    gens = spec.generators
    a_w = spec.word_matrix(fam.suffix)
    cur = gens[fam.head - 1]
    out = []
    for _ in range(count):
        cur = mat_mul(cur, gens[fam.tail - 1])
        out.append(norm_eval(spec.norm, mat_mul(cur, a_w)).log())
    return out


def _small_members(spec: GasketSpec, fam: Family, kappa: Fraction) -> list[int]:
    if kappa <= 0:
        return []
    if isinstance(fam.model, Unipotent2):
        p, q = _unipotent_parts(spec, fam)
        qmax, a_lo, _ = _unipotent_bounds(spec, p, q, 1)
        # beyond k_cut the lower bound qmax (k + a_lo) already exceeds kappa
        k_cut = max(1, math.ceil(float(kappa) / qmax - a_lo) + 1)
        ks = range(1, k_cut + 1)
    else:
        ks = range(1, GEOMETRIC_TERMS + 1)
    gens = spec.generators
    a_w = spec.word_matrix(fam.suffix)
    cur = gens[fam.head - 1]
    small = []
    for k in ks:
        cur = mat_mul(cur, gens[fam.tail - 1])
        if _small(spec, mat_mul(cur, a_w), kappa):
            small.append(k)
    return small


def build_qseries(spec: GasketSpec, kappa, terms: int = DEFAULT_TERMS) -> QSeriesSet:
    """Refine the next-to-diagonal families until no explicit member has norm <= kappa."""
    kappa_q = Fraction(kappa).limit_denominator(10 ** 12) if not isinstance(kappa, Fraction) else kappa
    if kappa_q < 0:
        raise ValueError("kappa must be >= 0")
    m = spec.m

    def model(h, t):
        try:
            return spec.tails[(h, t)]
        except KeyError:
            raise SeriesError(f"{spec.name}: no tail model for the pair ({h}, {t})") from None

    pending = [Family(h, t, (), model=model(h, t))
               for h in range(1, m + 1) for t in range(1, m + 1) if h != t]
    done = []
    while pending:
        fam = pending.pop()
        small = _small_members(spec, fam, kappa_q)
        fam.removed = frozenset(small)
        done.append(fam)
        for k in small:
            w = fam.word(k)
            pending.extend(Family(h, t, w, model=model(h, t))
                           for h in range(1, m + 1) for t in range(1, m + 1) if h != t)
        if len(done) + len(pending) > MAX_FAMILIES:
            raise SeriesError(f"refinement exceeded {MAX_FAMILIES} families")
    qs = QSeriesSet(spec, float(kappa_q), done, terms)
    for fam in done:
        _prepare(spec, fam, terms)
    return qs


def _prepare(spec: GasketSpec, fam: Family, terms: int) -> None:
    if isinstance(fam.model, Unipotent2):
        if not _is_unipotent(spec.generators[fam.tail - 1]):
            raise SeriesError(f"generator {fam.tail} is not unipotent of order two")
        p, q = _unipotent_parts(spec, fam)
        ks = np.array([k for k in range(1, terms + 1) if k not in fam.removed], dtype=float)
        fam.log_terms = _explicit_unipotent(spec, p, q, ks)
        qmax, a_lo, a_hi = _unipotent_bounds(spec, p, q, terms + 1)
        fam.tail_params = ("unipotent", qmax, terms + 1 + a_lo, terms + 1 + a_hi)
    elif isinstance(fam.model, Geometric):
        count = max(GEOMETRIC_TERMS, max(fam.removed, default=0) + 2)
        logs = _geometric_logs(spec, fam, count)
        keep = [v for k, v in enumerate(logs, start=1) if k not in fam.removed]
        diffs = np.diff(logs[count // 2:])
        lam_log = float(diffs.min()) if len(diffs) else 0.0
        if fam.model.lam is not None:
            lam_log = min(lam_log, math.log(fam.model.lam))
        if lam_log <= 0:
            raise SeriesError("family does not grow geometrically")
        fam.log_terms = np.array(keep)
        fam.tail_params = ("geometric", logs[-1], lam_log * (1 - 1e-9))
    else:
        raise SeriesError(f"unknown tail model {fam.model!r}")


def _is_unipotent(g) -> bool:
    from ..enumeration.spec import check_unipotent2
    return check_unipotent2(g)


def _mu(qs: QSeriesSet, s: float) -> tuple[float, float]:
    if s <= 0:
        raise ValueError("need s > 0")
    if qs.needs_s_above_one and s <= 1:
        raise ValueError(f"series diverges at s = {s} <= 1")
    explicit = math.fsum(float(np.exp(-s * f.log_terms).sum()) for f in qs.families)
    lo_tail = hi_tail = 0.0
    for f in qs.families:
        kind = f.tail_params[0]
        if kind == "unipotent":
            _, qmax, off_lo, off_hi = f.tail_params
            c = qmax ** -s
            hi_tail += c * hurwitz_zeta(s, off_lo)
            lo_tail += c * hurwitz_zeta(s, off_hi)
        else:
            _, last_log, lam_log = f.tail_params
            r = math.exp(-s * lam_log)
            hi_tail += math.exp(-s * last_log) * r / (1 - r)
    lo = (explicit + lo_tail) * (1 - _REL)
    hi = (explicit + hi_tail) * (1 + _REL)
    return lo, hi


@dataclass(frozen=True)
class MuBounds:
    s: float
    mu: tuple[float, float]
    g: tuple[float, float]
    f: tuple[float, float]


def mu_bounds(spec: GasketSpec, kappa, s: float, coefficient=None, terms: int = DEFAULT_TERMS,
              qseries: QSeriesSet | None = None, n_const: float | None = None) -> MuBounds:
    """Enclosures of ``mu``, ``g = n**-s mu`` and ``f = c**-s mu`` at ``s``."""
    qs = qseries or build_qseries(spec, kappa, terms)
    lo, hi = _mu(qs, s)
    n = float(n_const or spec.n)
    c = float(coefficient if coefficient is not None else (spec.coefficient or 1))
    return MuBounds(s, (lo, hi), (lo * n ** -s, hi * n ** -s), (lo * c ** -s, hi * c ** -s))


@dataclass(frozen=True)
class BoundInterval:
    s_lower: float
    s_upper: float
    kappa: float
    truncation_terms: int
    tail_bound_width: float
    coefficient: Fraction | None = None
    families: int = 0
    # diagnostic only: bound on s_upper - s_lower from the convergence rate,
    # s_lower * (log(k n) / log(k c) - 1); inf while k c <= 1
    rate_gap: float = math.inf


S_MAX = 256.0
_MARGIN = 1e-12


def _decreasing_root(fn, lo: float) -> float:
    """Root of the decreasing function ``fn`` right of ``lo``; inf if it stays positive."""
    if fn(lo) <= 0:
        raise SeriesError(f"no sign change: value at the left end {lo} is already <= 0")
    hi = max(2.0, lo * 2)
    while fn(hi) > 0:
        if hi >= S_MAX:
            return math.inf
        hi = min(S_MAX, hi * 2)
    return brentq(fn, lo, hi, xtol=1e-13, maxiter=300)


def bound_exponent(spec: GasketSpec, kappa, coefficient=None, terms: int = DEFAULT_TERMS,
                   n_const: float | None = None) -> BoundInterval:
    """``s_lower`` solves ``n**-s mu_lo = 1``; ``s_upper`` solves ``c**-s mu_hi = 1``.

    ``s_upper`` is ``inf`` when ``c**-s mu`` stays above one, which happens
    for small ``kappa``.
    """
    c = coefficient if coefficient is not None else spec.coefficient
    if c is None:
        raise SeriesError(f"{spec.name}: no fast coefficient supplied")
    c = Fraction(c)
    if not 0 < c <= 1:
        raise SeriesError("coefficient must lie in (0, 1]")
    qs = build_qseries(spec, kappa, terms)
    n = float(n_const or spec.n)
    left = 1 + 1e-7 if qs.needs_s_above_one else 1e-6

    def g_lo(s):
        return _mu(qs, s)[0] * n ** -s - 1

    def f_hi(s):
        return _mu(qs, s)[1] * float(c) ** -s - 1

    s_lo = _decreasing_root(g_lo, left) - _MARGIN
    s_hi = _decreasing_root(f_hi, left) + _MARGIN
    widths = []
    for s in (s_lo, s_hi):
        if math.isfinite(s) and s > left:
            a, b = _mu(qs, s)
            widths.append(b - a)
    kc = float(kappa) * float(c)
    gap = s_lo * (math.log(float(kappa) * n) / math.log(kc) - 1) if kc > 1 else math.inf
    return BoundInterval(s_lo, s_hi, float(kappa), terms, max(widths, default=0.0), c,
                         len(qs.families), gap)
