"""Projective actions, orbit clouds and the Sierpinski-type constructions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .enumeration.spec import (
    GasketSpec,
    dominant_entry_certificate,
    permutation_certificate,
)
from .exact import (
    ExactMatrix,
    Gaussian,
    ScaleFactor,
    as_gaussian,
    exact_sqrt,
    matrix,
    simplify,
)
from .fractal import PointCloud


class ChartError(ValueError):
    """A point left the affine chart (its denominator vanished)."""


_EPS = 1e-300


@dataclass(frozen=True)
class RealAffine:
    """``x -> x / x[denominator]`` with that coordinate dropped."""

    n: int
    denominator: int = -1

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need n >= 2")
        d = self.denominator % self.n if -self.n <= self.denominator < self.n else None
        if d is None:
            raise ValueError(f"denominator index {self.denominator} invalid for n={self.n}")
        object.__setattr__(self, "denominator", d)

    def lift(self, p) -> np.ndarray:
        p = np.atleast_2d(np.asarray(p, dtype=float))
        return np.insert(p, self.denominator, 1.0, axis=1)

    def project(self, x) -> np.ndarray:
        den = x[:, self.denominator]
        if np.any(np.abs(den) <= _EPS * np.abs(x).max(axis=1)):
            raise ChartError("point maps to the chart boundary")
        return np.delete(x / den[:, None], self.denominator, axis=1)


@dataclass(frozen=True)
class SimplexChart:
    """``x -> (x_1, ..., x_{n-1}) / sum(x)``; the standard simplex maps to the unit corner simplex."""

    n: int

    def lift(self, p) -> np.ndarray:
        p = np.atleast_2d(np.asarray(p, dtype=float))
        return np.column_stack([p, 1.0 - p.sum(axis=1)])

    def project(self, x) -> np.ndarray:
        den = x.sum(axis=1)
        if np.any(np.abs(den) <= _EPS * np.abs(x).max(axis=1)):
            raise ChartError("point maps to the chart boundary")
        return x[:, :-1] / den[:, None]


@dataclass(frozen=True)
class ComplexAffine:
    """``[z : w] -> z / w`` on the complex projective line."""

    n: int = 2

    def lift(self, p) -> np.ndarray:
        z = np.atleast_1d(np.asarray(p, dtype=complex))
        return np.column_stack([z, np.ones_like(z)])

    def project(self, x) -> np.ndarray:
        den = x[:, 1]
        if np.any(np.abs(den) <= _EPS * np.abs(x).max(axis=1)):
            raise ChartError("point maps to the chart boundary")
        return x[:, 0] / den


Chart = RealAffine | SimplexChart | ComplexAffine


def _float_entries(m: ExactMatrix) -> np.ndarray:
    # projective maps ignore the scale factor
    return np.array([[complex(as_gaussian(x)) for x in row] for row in m.entries])


def _real_or_complex(a: np.ndarray, cplx: bool) -> np.ndarray:
    return a if cplx else a.real.copy()


def act(m: ExactMatrix, chart: Chart, p):
    """Image of the point ``p`` (chart coordinates) under the induced map."""
    cplx = isinstance(chart, ComplexAffine)
    mat = _real_or_complex(_float_entries(m), cplx)
    x = chart.lift(p)
    out = chart.project(x @ mat.T)
    if cplx:
        return complex(out[0]) if np.ndim(p) == 0 else out
    return out[0] if np.ndim(p) == 1 else out


def orbit_cloud(spec: GasketSpec, chart: Chart, seed, depth: int) -> PointCloud:
    """The ``m**depth`` points ``psi_I(seed)`` over words of length ``depth``.

    Points are pushed through the word tree one generator at a time; no
    matrix products are formed.  Homogeneous vectors are renormalized at
    every level so that long words do not overflow.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    cplx = isinstance(chart, ComplexAffine)
    mats = [_real_or_complex(_float_entries(g), cplx) for g in spec.action_matrices()]
    x = chart.lift(seed)
    for _ in range(depth):
        chart.project(x)                     # raises if a point left the chart
        # psi_{jI}(seed) = psi_j(psi_I(seed)); new rows grouped by generator j
        x = np.concatenate([x @ g.T for g in mats])
        x /= np.abs(x).max(axis=1, keepdims=True)
    pts = chart.project(x)
    if cplx:
        return PointCloud.from_complex(pts)
    if pts.shape[1] != 2:
        raise ValueError("orbit clouds are two-dimensional; use a 3x3 real or a 2x2 complex family")
    return PointCloud(pts)


def cylinder_cloud(spec: GasketSpec, diameter: float, max_depth: int = 2000) -> PointCloud:
    """Centroids of the image triangles ``psi_I(T)`` refined until each is smaller than ``diameter``.

    Fixed-depth orbits thin out near parabolic fixed points; stopping on
    the size of ``psi_I(T)`` instead of on ``|I|`` covers the residual set
    evenly.  Only simplex charts of 3x3 families are supported.
    """
    chart = spec.chart
    if not isinstance(chart, SimplexChart) or chart.n != 3:
        raise ValueError("cylinder clouds need a 3x3 family in a simplex chart")
    if diameter <= 0:
        raise ValueError("diameter must be positive")
    mats = [_float_entries(g).real for g in spec.action_matrices()]
    verts = np.eye(3)[None]          # columns are the homogeneous vertices
    out = []
    for _ in range(max_depth):
        pts = verts[:, :-1, :] / verts.sum(axis=1, keepdims=True)
        size = np.zeros(len(verts))
        for i, j in ((0, 1), (0, 2), (1, 2)):
            size = np.maximum(size, np.linalg.norm(pts[:, :, i] - pts[:, :, j], axis=1))
        small = size < diameter
        out.append(pts[small].mean(axis=2))
        verts = verts[~small]
        if not len(verts):
            return PointCloud(np.concatenate(out))
        verts = np.concatenate([np.einsum("ij,bjk->bik", g, verts) for g in mats])
        verts /= np.abs(verts).max(axis=(1, 2), keepdims=True)
    raise ValueError(f"cylinders still larger than {diameter} at depth {max_depth}")


def jacobian(m: ExactMatrix, chart: Chart, p) -> np.ndarray:
    """Derivative of the induced map at ``p`` in a real chart."""
    if isinstance(chart, ComplexAffine):
        raise ValueError("use the complex derivative for Moebius maps")
    a = _float_entries(m).real
    x = chart.lift(p)[0]
    y = a @ x
    # derivative of the lift p -> x
    eye = np.eye(chart.n - 1)
    if isinstance(chart, SimplexChart):
        dy = a @ np.vstack([eye, -np.ones(chart.n - 1)])
        num, den = y[:-1], y.sum()
        dnum, dden = dy[:-1], dy.sum(axis=0)
    else:
        d = chart.denominator
        keep = [i for i in range(chart.n) if i != d]
        dy = a @ np.insert(eye, d, 0.0, axis=0)
        num, den = y[keep], y[d]
        dnum, dden = dy[keep], dy[d]
    return (dnum * den - np.outer(num, dden)) / den ** 2


# --------------------------------------------------------------------------
# constructions


def build_real_sierpinski(n: int, alpha) -> GasketSpec:
    """Generators ``f_i(e_i) = alpha e_i``, ``f_i(e_j) = e_i + e_j``, scaled to determinant one."""
    alpha = Fraction(alpha)
    if n < 3:
        raise ValueError("need n >= 3")
    if alpha < 1:
        raise ValueError("need alpha >= 1")
    scale = ScaleFactor(alpha, -1, n)
    gens = []
    for i in range(n):
        rows = [[1 if r == c else 0 for c in range(n)] for r in range(n)]
        for c in range(n):
            rows[i][c] = alpha if c == i else 1
        gens.append(matrix(rows, scale))
    cert = permutation_certificate(gens)
    return GasketSpec(f"sierpinski_real(n={n}, alpha={alpha})", tuple(gens),
                      certificate=cert, chart=SimplexChart(n),
                      params={"n": n, "alpha": alpha})


def check_vertex_symmetry(spec: GasketSpec) -> bool:
    """``psi_i([e_j]) == psi_j([e_i])`` for all ``i != j`` (exact)."""
    mats = spec.action_matrices()
    n = spec.n

    def image(i, j):
        col = [as_gaussian(mats[i][r, j]) for r in range(n)]
        pivot = next(x for x in col if x != 0)
        return tuple(x / pivot for x in col)

    return all(image(i, j) == image(j, i) for i in range(len(mats))
               for j in range(len(mats)) if i != j)


def _moebius_to_0_1_inf(z1, z2, z3):
    """Matrix of the map sending ``z1, z2, z3`` to ``0, 1, inf``."""
    return [[z2 - z3, -z1 * (z2 - z3)], [z2 - z1, -z3 * (z2 - z1)]]


def _adjugate(m):
    (a, b), (c, d) = m
    return [[d, -b], [-c, a]]


def _mul2(x, y):
    return [[x[i][0] * y[0][k] + x[i][1] * y[1][k] for k in range(2)] for i in range(2)]


def moebius_from_points(src: Sequence, dst: Sequence):
    """Exact 2x2 matrix (Gaussian rationals) of the Moebius map ``src[k] -> dst[k]``."""
    s = _moebius_to_0_1_inf(*[as_gaussian(z) for z in src])
    t = _moebius_to_0_1_inf(*[as_gaussian(z) for z in dst])
    return _mul2(_adjugate(t), s)


def _rational_content(entries) -> Fraction:
    parts = [Fraction(p) for z in entries for p in (z.re, z.im) if p != 0]
    num = 0
    den = 1
    for p in parts:
        num = math.gcd(num, p.numerator)
        den = math.lcm(den, p.denominator)
    return Fraction(num, den)


def _normalize_sl2(m) -> ExactMatrix:
    """Scalar multiple of ``m`` with determinant one and positive real ``(2,2)`` entry."""
    m = [[as_gaussian(x) for x in row] for row in m]
    c = m[1][1].conjugate()
    m = [[x * c for x in row] for row in m]
    content = _rational_content([x for row in m for x in row])
    m = [[x / content for x in row] for row in m]
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if det.im != 0 or det.re <= 0:
        raise ValueError(f"cannot normalize to determinant one (det {det})")
    root = exact_sqrt(det.re)
    if root is not None:
        return matrix([[simplify(x / root) for x in row] for row in m])
    return matrix([[simplify(x) for x in row] for row in m], ScaleFactor(det.re, -1, 2))


COMPLEX_U_MAX = 0.651


def build_complex_sierpinski(u) -> GasketSpec:
    """Kleinian family with vertices ``1, i, -1`` and tangency point ``u + iv``.

    Each generator fixes one vertex and is pinned down by the images of
    the other two; ``v = sqrt(u(1-u))`` must be rational.
    """
    u = Fraction(u)
    if not Fraction(1, 5) <= u <= Fraction(COMPLEX_U_MAX):
        raise ValueError(f"u must lie in [1/5, {COMPLEX_U_MAX}]")
    v = exact_sqrt(u * (1 - u))
    if v is None:
        raise ValueError(f"u(1-u) = {u * (1 - u)} is not a rational square")
    i = Gaussian(0, 1)
    p = Gaussian(u, v)
    q = Gaussian(-u, v)
    # gen1 fixes i; gen2 fixes 1; gen3 fixes -1
    raw = [
        moebius_from_points([i, 1, -1], [i, p, q]),
        moebius_from_points([1, i, -1], [1, p, 0]),
        moebius_from_points([-1, i, 1], [-1, q, 0]),
    ]
    gens = tuple(_normalize_sl2(m) for m in raw)
    cert = dominant_entry_certificate(gens, (1, 1))
    return GasketSpec(f"sierpinski_complex(u={u})", gens, certificate=cert,
                      chart=ComplexAffine(), params={"u": u, "v": v})


# --------------------------------------------------------------------------
# dual frames and volumes


@dataclass(frozen=True)
class DualFrame:
    eta: tuple[tuple[Fraction, ...], ...]
    alphas: tuple[Fraction, ...]


def dual_frame(spec: GasketSpec) -> DualFrame:
    """Eigen-covectors ``eta^i`` with ``eta^i . f_i = alpha_i eta^i`` (exact).

    The generators must follow ``f_i(e_i) = alpha_i e_i`` and
    ``f_i(e_j) = beta_ij e_i + gamma_i e_j``; scale factors are ignored.
    """
    mats = spec.action_matrices()
    n = spec.n
    if len(mats) != n:
        raise ValueError("need one generator per basis vector")
    etas, alphas = [], []
    for i, g in enumerate(mats):
        if not g.is_real:
            raise ValueError("real generators required")
        a = [[Fraction(simplify(g[r, c])) for c in range(n)] for r in range(n)]
        alpha = a[i][i]
        gammas = {a[j][j] for j in range(n) if j != i}
        if any(a[r][i] != 0 for r in range(n) if r != i) or len(gammas) != 1:
            raise ValueError(f"generator {i + 1} does not follow the simple pattern")
        gamma = gammas.pop()
        for j in range(n):
            if j == i:
                continue
            if any(a[r][j] != 0 for r in range(n) if r not in (i, j)):
                raise ValueError(f"generator {i + 1} does not follow the simple pattern")
        eta = [a[i][j] if j != i else alpha - gamma for j in range(n)]
        image = [sum(eta[r] * a[r][c] for r in range(n)) for c in range(n)]
        if image != [alpha * x for x in eta]:
            raise ValueError(f"eigen-identity fails for generator {i + 1}")
        etas.append(tuple(eta))
        alphas.append(alpha)
    return DualFrame(tuple(etas), tuple(alphas))


@dataclass
class VolumeCheck:
    measured: float
    predicted: float

    @property
    def ratio(self) -> float:
        return self.measured / self.predicted


def simplex_volume_check(spec: GasketSpec, word, frame=None) -> VolumeCheck:
    """Volume of the image simplex against ``1 / (n! prod ||f_I(e_k)||_1)``.

    The generators act on columns: ``f_I(e_k)`` is column ``k`` of ``A_I``.

    ``frame`` optionally conjugates the action (columns are the frame
    vectors).  The measured volume uses the sum chart: ``|det[(y_k, 1)]| / n!``
    for the chart images ``y_k`` of the vertices.
    """
    mats = spec.generators
    n = spec.n
    f = np.eye(n)
    for j in word:
        g = mats[j - 1]
        f = f @ (_float_entries(g).real * float(g.scale))
    if frame is not None:
        p = np.asarray(frame, dtype=float)
        f = np.linalg.solve(p, f @ p)
    cols = f.T
    norms = np.abs(cols).sum(axis=1)
    if np.any(cols.min(axis=1) < 0) and np.any(cols.max(axis=1) > 0):
        raise ValueError("vertex images leave the positive cone")
    y = SimplexChart(n).project(cols)
    mat = np.column_stack([y, np.ones(n)])
    measured = abs(np.linalg.det(mat)) / math.factorial(n)
    if measured == 0:
        raise ValueError("degenerate simplex")
    predicted = abs(np.linalg.det(f)) / (math.factorial(n) * float(np.prod(norms)))
    return VolumeCheck(measured, predicted)


# --------------------------------------------------------------------------
# Moebius derivative and interval bounds


@dataclass
class DerivativeCheck:
    derivative: float
    norm: float
    window: tuple[float, float]
    holds: bool


def _norm_float(m: ExactMatrix) -> float:
    return float(np.abs(_float_entries(m)).max()) * float(m.scale)


def mobius_derivative_bounds(m: ExactMatrix, interval, relaxed: bool = True) -> DerivativeCheck:
    """Check ``|Psi'(midpoint)|`` against ``[1, 4] / ||m||^2``.

    ``Psi(phi) = (a phi + b) / (c phi + d)``.  With ``relaxed`` the window
    is widened to ``[1/4, 4] / ||m||^2``.
    """
    if m.n != 2:
        raise ValueError("2x2 matrix required")
    (a, b), (c, d) = _float_entries(m) * float(m.scale)
    det = a * d - b * c
    if abs(abs(det) - 1) > 1e-9:
        raise ValueError("determinant must be +-1")
    mid = (interval[0] + interval[1]) / 2
    den = c * mid + d
    if abs(den) == 0:
        raise ChartError("midpoint maps to infinity")
    deriv = abs(det / den ** 2)
    nrm = _norm_float(m)
    lo = (0.25 if relaxed else 1.0) / nrm ** 2
    hi = 4.0 / nrm ** 2
    return DerivativeCheck(deriv, nrm, (lo, hi), lo - 1e-12 <= deriv <= hi + 1e-12)


@dataclass
class IntervalCheck:
    length: float
    formula: float
    lower: float
    upper: float

    @property
    def holds(self) -> bool:
        return self.lower - 1e-12 <= self.length <= self.upper + 1e-12


def interval_length_identity(c: ExactMatrix) -> IntervalCheck:
    """Image of ``[0, 1]`` under the transposed action of ``C = [[a, b], [c, d]]``.

    The image interval has endpoints ``c/(c+d)`` and ``a/(a+b)``, hence
    length ``1/((a+b)(c+d))`` when ``ad - bc = 1``.
    """
    (a, b), (cc, d) = _float_entries(c).real * float(c.scale)
    ends = [act(c.transpose(), SimplexChart(2), [x])[0] for x in (0.0, 1.0)]
    length = abs(ends[1] - ends[0])
    nrm = _norm_float(c)
    return IntervalCheck(length, 1 / ((a + b) * (cc + d)), 1 / (4 * nrm ** 2), 1 / nrm)
