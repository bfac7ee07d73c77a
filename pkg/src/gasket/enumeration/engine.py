"""Certified ball counting, level sums, freeness scans and coefficient sampling."""
from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..exact import (
    Cmp,
    ExactMatrix,
    MaxAbs,
    NormValue,
    WeightedBilinear,
    abs2,
    as_gaussian,
    compare_norms,
    mat_mul,
    norm_cmp,
    norm_eval,
)
from ..words import level, with_block_prefix, words_upto
from . import _pykernel
from .spec import (
    BudgetExceeded,
    CertificateError,
    DominantEntry,
    Envelope,
    GasketSpec,
    RowMinBound,
    validate_certificate,
)

log = logging.getLogger(__name__)

try:
    if os.environ.get("GASKET_PURE_PYTHON"):
        raise ImportError("pure Python requested")
    from ._kernel import count_subtree as _compiled_count
    BACKEND = "compiled"
except ImportError:  # pragma: no cover - exercised when the build is absent
    _compiled_count = None
    BACKEND = "python"

DEFAULT_BUDGET = 500_000_000


class LiftError(CertificateError):
    """A product of lifted generators is not ``D`` times an integer matrix."""

SPLIT_DEPTH = 6
_I64_SAFE = 2 ** 62


def default_threads() -> int:
    env = os.environ.get("GASKET_THREADS")
    if env:
        return max(1, int(env))
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1


@dataclass
class CountResult:
    threshold: tuple[Fraction, int]
    strict: bool
    count: int
    nodes_visited: int
    certified: bool
    collisions: int | None = None
    max_depth: int = 0
    backend: str = BACKEND


@dataclass
class CountTable:
    base: Fraction
    rows: list[tuple[int, int]]
    strict: bool = True
    nodes_visited: int = 0
    certified: bool = True
    backend: str = BACKEND
    seconds: float = 0.0

    @property
    def counts(self) -> list[int]:
        return [c for _, c in self.rows]


# --------------------------------------------------------------------------
# integer lifting


@dataclass
class Lifted:
    """Generators as integer (or Gaussian integer) matrices ``D * G``."""

    D: int
    n: int
    m: int
    cplx: bool
    gre: list[list[int]]
    gim: list[list[int]]

    @classmethod
    def of(cls, gens) -> "Lifted":
        D = 1
        for g in gens:
            D = math.lcm(D, g.common_denominator())
        cplx = any(not g.is_real for g in gens)
        n = gens[0].n
        gre, gim = [], []
        for g in gens:
            re_row, im_row = [], []
            for i in range(n):
                for k in range(n):
                    z = as_gaussian(g[i, k]) * D
                    re_row.append(int(z.re))
                    im_row.append(int(z.im))
            gre.append(re_row)
            gim.append(im_row)
        return cls(D, n, len(gens), cplx, gre, gim)

    def root(self) -> tuple[list[int], list[int]]:
        re = [self.D if i % (self.n + 1) == 0 else 0 for i in range(self.n * self.n)]
        return re, [0] * (self.n * self.n)

    def child(self, j: int, node):
        n, D = self.n, self.D
        pre, pim = node
        gr, gi = self.gre[j], self.gim[j]
        cre, cim = [0] * (n * n), [0] * (n * n)
        for i in range(n):
            for k in range(n):
                ar = ai = 0
                for l in range(n):
                    a, b = gr[i * n + l], gi[i * n + l]
                    c, d = pre[l * n + k], pim[l * n + k]
                    ar += a * c - b * d
                    ai += a * d + b * c
                if ar % D or ai % D:
                    raise LiftError("product left the lifted lattice")
                cre[i * n + k] = ar // D
                cim[i * n + k] = ai // D
        return cre, cim

    def gmax(self) -> int:
        return max(abs(x) for row in self.gre + self.gim for x in row)


@dataclass
class _Search:
    """Kernel parameters derived from a spec and a threshold list."""

    lifted: Lifted
    target_kind: int
    v: list[int]
    w: list[int]
    c1n: int
    c1d: int
    dom_pos: int
    dom_row: int
    thresholds: list[int]
    strict: bool

    def evaluate(self, node, is_root: bool = False):
        """Return ``(status, search, target)`` for one node.

        Row dominance is a property of nonempty products, so it is not
        asserted at the root.
        """
        L, n = self.lifted, self.lifted.n
        cre, cim = node
        if L.cplx:
            mods = [a * a + b * b for a, b in zip(cre, cim)]
        else:
            mods = [abs(a) for a in cre]
        s = max(mods)
        if self.dom_pos >= 0 and mods[self.dom_pos] != s:
            return _pykernel.CERT_FAIL, s, s
        if self.dom_row >= 0 and not is_root:
            for k in range(n):
                top = cre[self.dom_row * n + k]
                if any(cre[i * n + k] > top for i in range(n)):
                    return _pykernel.CERT_FAIL, s, s
        if self.target_kind == 1:
            t = sum(cre[i * n + k] * self.v[i] * self.w[k] for i in range(n) for k in range(n))
            if t <= 0:
                return _pykernel.NONPOSITIVE, s, t
            if self.c1d * t < self.c1n * s:
                return _pykernel.CERT_FAIL, s, t
        else:
            t = s
        return _pykernel.OK, s, t

    def pruned(self, s) -> bool:
        T = self.thresholds[-1]
        if self.strict:
            return self.c1n * s >= self.c1d * T
        return self.c1n * s > self.c1d * T

    def bucket(self, t) -> int | None:
        for q, T in enumerate(self.thresholds):
            if (t < T) if self.strict else (t <= T):
                return q
        return None

    def overflow_safe(self) -> bool:
        L = self.lifted
        T = self.thresholds[-1]
        bound = (self.c1d * T) // self.c1n + 1          # search value bound
        if L.cplx:
            entry = math.isqrt(bound) + 1
            acc = 2 * L.n * L.gmax() * entry
            return 2 * acc * acc < _I64_SAFE
        acc = L.n * L.gmax() * bound
        ok = acc < _I64_SAFE and max(self.c1n, self.c1d) * acc < _I64_SAFE
        if self.target_kind == 1:
            wv = max(abs(x) for x in self.v) * max(abs(x) for x in self.w)
            ok = ok and L.n * L.n * wv * acc < _I64_SAFE
        return ok


def _search_for(spec: GasketSpec, thresholds: list[int], strict: bool) -> _Search:
    lifted = Lifted.of(spec.generators)
    cert = spec.certificate
    inner = cert.inner if isinstance(cert, Envelope) else cert
    target_kind, v, w, c1n, c1d = 0, [0] * spec.n, [0] * spec.n, 1, 1
    if isinstance(cert, Envelope):
        if not isinstance(spec.norm, WeightedBilinear) or lifted.cplx:
            raise CertificateError("envelope search supports real weighted targets")
        target_kind, v, w = 1, list(spec.norm.v), list(spec.norm.w)
        c1 = Fraction(cert.c1)
        c1n, c1d = c1.numerator, c1.denominator
    elif not isinstance(spec.norm, MaxAbs):
        raise CertificateError("without an envelope the target norm must be the max norm")
    dom_pos = -1
    if isinstance(inner, DominantEntry):
        i, j = inner.position
        dom_pos = i * spec.n + j
    dom_row = -1 if spec.row_dominance is None else spec.row_dominance
    return _Search(lifted, target_kind, v, w, c1n, c1d, dom_pos, dom_row,
                   thresholds, strict)


def _lifted_thresholds(spec: GasketSpec, base: Fraction, exps: list[int]) -> list[int] | None:
    """Thresholds in lifted units, or None when the integer path does not apply."""
    if not spec.unscaled or base.denominator != 1 or min(exps) < 0:
        return None
    D = Lifted.of(spec.generators).D
    cplx = any(not g.is_real for g in spec.generators)
    out = []
    for p in exps:
        r = int(base) ** p * D
        out.append(r * r if cplx else r)
    return out


_STATUS_MSG = {
    _pykernel.CERT_FAIL: "certificate assertion failed at a visited node",
    _pykernel.INEXACT: "product left the lifted lattice",
    _pykernel.NONPOSITIVE: "target norm is nonpositive on a visited node",
}


def _raise_status(status: int, nodes: int) -> None:
    if status == _pykernel.OK:
        return
    if status == _pykernel.BUDGET:
        raise BudgetExceeded(f"node budget exceeded after {nodes} nodes")
    if status == 5:
        raise MemoryError("kernel stack allocation failed")
    if status == _pykernel.INEXACT:
        raise LiftError(_STATUS_MSG[status])
    raise CertificateError(_STATUS_MSG.get(status, f"kernel status {status}"))


def _histogram(spec: GasketSpec, search: _Search, budget: int, threads: int,
               backend: str | None = None):
    """Histogram of in-ball nodes over the threshold buckets."""
    L = search.lifted
    nthr = len(search.thresholds)
    hist = [0] * nthr
    nodes = 0
    maxdepth = 0

    root = L.root()
    status, s, t = search.evaluate(root, is_root=True)
    _raise_status(status, 0)
    q = search.bucket(t)
    if q is not None:
        hist[q] += 1
    if search.pruned(s):
        return hist, nodes, maxdepth

    use_compiled = (backend or BACKEND) == "compiled" and _compiled_count is not None
    if use_compiled and not search.overflow_safe():
        log.info("threshold too large for 64-bit kernel, using Python integers")
        use_compiled = False

    # breadth-first split into independent subtrees
    frontier = [root]
    depth = 0
    split = SPLIT_DEPTH if threads > 1 else 0
    while depth < split and frontier and len(frontier) < 64 * threads:
        nxt = []
        for node in frontier:
            for j in range(L.m):
                c = L.child(j, node)
                nodes += 1
                status, s, t = search.evaluate(c)
                _raise_status(status, nodes)
                if search.pruned(s):
                    continue
                q = search.bucket(t)
                if q is not None:
                    hist[q] += 1
                nxt.append(c)
        frontier = nxt
        depth += 1
    if nodes > budget:
        raise BudgetExceeded(f"node budget exceeded after {nodes} nodes")

    if use_compiled:
        gre = np.ascontiguousarray(L.gre, dtype=np.int64)
        gim = np.ascontiguousarray(L.gim, dtype=np.int64)
        thr = np.asarray(search.thresholds, dtype=np.int64)
        v = np.asarray(search.v, dtype=np.int64)
        w = np.asarray(search.w, dtype=np.int64)

        def task(node):
            h = np.zeros(nthr, dtype=np.int64)
            out = _compiled_count(gre, gim, L.D, np.asarray(node[0], dtype=np.int64),
                                  np.asarray(node[1], dtype=np.int64), L.cplx,
                                  search.target_kind, v, w, search.c1n, search.c1d,
                                  thr, search.strict, search.dom_pos, search.dom_row,
                                  budget - nodes, h)
            return [int(x) for x in h], out
    else:
        def task(node):
            h = [0] * nthr
            out = _pykernel.count_subtree(L.gre, L.gim, L.D, node[0], node[1], L.cplx,
                                          search.target_kind, search.v, search.w,
                                          search.c1n, search.c1d, search.thresholds,
                                          search.strict, search.dom_pos, search.dom_row,
                                          budget - nodes, h)
            return h, out

    if threads > 1 and len(frontier) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(task, frontier))
    else:
        results = [task(node) for node in frontier]

    worst = _pykernel.OK
    for h, (k_nodes, status, k_depth) in results:
        nodes += int(k_nodes)
        maxdepth = max(maxdepth, depth + int(k_depth))
        for q in range(nthr):
            hist[q] += h[q]
        if status != _pykernel.OK and worst in (_pykernel.OK, _pykernel.BUDGET):
            worst = status
    _raise_status(worst, nodes)
    if nodes > budget:
        raise BudgetExceeded(f"node budget exceeded after {nodes} nodes")
    return hist, nodes, maxdepth


# --------------------------------------------------------------------------
# generic exact path (scaled generators)


def _scaled_norm(nv: NormValue, c: Fraction) -> NormValue:
    if nv.is_squared:
        return NormValue(nv.magnitude * c * c, True, nv.scale)
    return NormValue(nv.magnitude * c, False, nv.scale)


def _rowmin_value(mat: ExactMatrix) -> NormValue:
    """Smaller of the two row max norms (real nonnegative 2x2 input)."""
    rows = [max(as_gaussian(x).re for x in row) for row in mat.entries]
    return NormValue(min(rows), False, mat.scale)


def _multi_scale_cmp(nv: NormValue, scale: dict, base: Fraction, p: int) -> Cmp:
    """Exact comparison of ``nv * prod(b**e)`` with ``base**p``.

    ``nv`` carries no scale of its own; ``scale`` maps bases to Fraction
    exponents.  Both sides are squared and raised to the common exponent
    denominator so only rational powers remain.
    """
    d = 1
    for e in scale.values():
        d = math.lcm(d, e.denominator)
    v2 = Fraction(nv.magnitude) ** (1 if nv.is_squared else 2)
    lhs = v2 ** d
    for b, e in scale.items():
        lhs *= Fraction(b) ** int(2 * e * d)
    rhs = Fraction(base) ** (2 * p * d)
    return Cmp((lhs > rhs) - (lhs < rhs))


def _add_scale(scale: dict, g) -> dict:
    if g.scale.is_identity:
        return scale
    out = dict(scale)
    out[g.scale.base] = out.get(g.scale.base, Fraction(0)) + g.scale.exponent()
    return out


def _histogram_generic(spec: GasketSpec, base: Fraction, exps: list[int], strict: bool,
                       budget: int):
    """Depth-first search on exact matrices; handles scale factors.

    Scales sharing one base ride along in the matrices.  With several
    bases the matrices are kept unscaled and the per-base exponents are
    tracked beside them, so every threshold test stays exact.
    """
    single = spec.single_scale_base
    cert = spec.certificate
    inner = cert.inner if isinstance(cert, Envelope) else cert
    search_norm = spec.search_norm
    c1 = Fraction(cert.c1) if isinstance(cert, Envelope) else Fraction(1)
    top = exps[-1]

    def admitted(nv: NormValue, p: int, scale: dict) -> bool:
        cmp = norm_cmp(nv, base, p) if single else _multi_scale_cmp(nv, scale, base, p)
        return cmp == Cmp.LESS or (not strict and cmp == Cmp.EQUAL)

    def visit(mat, is_root=False):
        s = norm_eval(search_norm, mat)
        if isinstance(inner, DominantEntry):
            i, j = inner.position
            if abs2(mat[i, j]) != max(abs2(x) for row in mat.entries for x in row):
                raise CertificateError("dominant entry moved")
        if spec.row_dominance is not None and not is_root:
            r = spec.row_dominance
            for k in range(mat.n):
                if any(mat[i, k] > mat[r, k] for i in range(mat.n)):
                    raise CertificateError("row dominance failed")
        t = norm_eval(spec.norm, mat) if isinstance(cert, Envelope) else s
        if isinstance(cert, Envelope) and \
                compare_norms(t, _scaled_norm(s, c1)) == Cmp.LESS:
            raise CertificateError("envelope failed")
        prune_val = _rowmin_value(mat) if isinstance(inner, RowMinBound) else _scaled_norm(s, c1)
        return prune_val, t

    hist = [0] * len(exps)
    nodes = 0
    maxdepth = 0

    def record(prune_val, t, scale):
        if not admitted(prune_val, top, scale):
            return False
        for q, p in enumerate(exps):
            if admitted(t, p, scale):
                hist[q] += 1
                break
        return True

    gens = spec.generators if single else tuple(ExactMatrix(g.entries) for g in spec.generators)
    root = ExactMatrix.identity(spec.n)
    if not record(*visit(root, is_root=True), {}):
        return hist, nodes, maxdepth
    stack = [(root, {}, 0)]
    while stack:
        mat, scale, j = stack.pop()
        if j == spec.m:
            continue
        stack.append((mat, scale, j + 1))
        child = mat_mul(gens[j], mat)
        cscale = scale if single else _add_scale(scale, spec.generators[j])
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(f"node budget exceeded after {nodes} nodes")
        if record(*visit(child), cscale):
            stack.append((child, cscale, 0))
            maxdepth = max(maxdepth, len(stack))
    return hist, nodes, maxdepth


# --------------------------------------------------------------------------
# public operations


def count_table(spec: GasketSpec, pmax: int, base=2, strict: bool = True,
                budget: int = DEFAULT_BUDGET, threads: int | None = None,
                backend: str | None = None, pmin: int = 1) -> CountTable:
    """Rows ``(p, N(base**p))`` for ``p = pmin..pmax`` from one traversal."""
    if pmax < pmin:
        raise ValueError("pmax must be >= pmin")
    validate_certificate(spec)
    threads = threads or default_threads()
    base = Fraction(base)
    exps = list(range(pmin, pmax + 1))
    t0 = time.perf_counter()
    certified = True
    lifted_thr = _lifted_thresholds(spec, base, exps)
    hist = None
    if lifted_thr is not None and not isinstance(spec.certificate, RowMinBound):
        search = _search_for(spec, lifted_thr, strict)
        try:
            hist, nodes, _ = _histogram(spec, search, budget, threads, backend)
            used = backend or BACKEND
            if used == "compiled" and _compiled_count is None:
                used = "python"
        except LiftError:
            log.info("integer lifting is not closed for %s; using exact search", spec.name)
    if hist is None:
        hist, nodes, _ = _histogram_generic(spec, base, exps, strict, budget)
        used = "exact"
    rows, acc = [], 0
    for p, h in zip(exps, hist):
        acc += h
        rows.append((p, acc))
    return CountTable(base, rows, strict, nodes, certified, used, time.perf_counter() - t0)


def count_below(spec: GasketSpec, threshold=(2, 1), strict: bool = True,
                budget: int = DEFAULT_BUDGET, threads: int | None = None,
                backend: str | None = None) -> CountResult:
    """Number of words (empty word included) whose norm is below ``base**exp``."""
    base, exp = threshold
    table = count_table(spec, exp, base, strict, budget, threads, backend, pmin=exp)
    return CountResult((Fraction(base), exp), strict, table.rows[-1][1],
                       table.nodes_visited, table.certified, backend=table.backend)


# --------------------------------------------------------------------------
# level-wise products


def _level_arrays(spec: GasketSpec, k: int, budget: int = DEFAULT_BUDGET):
    """Yield ``(level, re, im, scale_log, dpow)`` arrays of products up to level k.

    ``re``/``im`` have shape ``(m**level, n, n)`` and hold ``D**dpow * A_I``
    exactly (int64 while safe, Python ints otherwise).  ``dpow`` stays 1
    while the lifting is closed under products.  ``scale_log`` holds the
    log of each word's scale factor.
    """
    L = Lifted.of(spec.generators)
    n, m = L.n, L.m
    if sum(m ** j for j in range(k + 1)) > budget:
        raise BudgetExceeded(f"level {k} needs more than {budget} products")
    gre = np.array(L.gre, dtype=object).reshape(m, n, n)
    gim = np.array(L.gim, dtype=object).reshape(m, n, n)
    glog = np.array([g.scale.log() for g in spec.generators])
    re = np.array(L.root()[0], dtype=object).reshape(1, n, n)
    im = np.zeros((1, n, n), dtype=object)
    slog = np.zeros(1)
    dpow = 1
    yield 0, re, im, slog, dpow
    gmax = L.gmax()
    for lev in range(1, k + 1):
        cur = int(max(np.abs(re).max(), np.abs(im).max()))
        safe = 2 * n * gmax * cur < 2 ** 62
        dt = np.int64 if safe else object
        a_re, a_im = re.astype(dt), im.astype(dt)
        g_re, g_im = gre.astype(dt), gim.astype(dt)
        # word j + I: left multiply by generator j; rows ordered lexicographically
        new_re = np.einsum("jab,wbc->jwac", g_re, a_re) - np.einsum("jab,wbc->jwac", g_im, a_im)
        new_im = np.einsum("jab,wbc->jwac", g_re, a_im) + np.einsum("jab,wbc->jwac", g_im, a_re)
        if L.D != 1 and not (np.any(new_re % L.D != 0) or np.any(new_im % L.D != 0)):
            new_re //= L.D
            new_im //= L.D
        elif L.D != 1:
            dpow += 1
        re = new_re.reshape(-1, n, n).astype(object)
        im = new_im.reshape(-1, n, n).astype(object)
        slog = (glog[:, None] + slog[None, :]).reshape(-1)
        yield lev, re, im, slog, dpow


def _log_norms(spec: GasketSpec, re, im, slog, norm=None, dpow: int = 1) -> np.ndarray:
    """Natural-log norms of lifted products (exact integers, float logs)."""
    norm = norm or spec.norm
    D = Lifted.of(spec.generators).D
    if isinstance(norm, MaxAbs):
        mod2 = (re * re + im * im).reshape(len(re), -1).max(axis=1)
        vals = np.array([_ilog(int(x)) / 2 for x in mod2])
    elif isinstance(norm, WeightedBilinear):
        v = np.array(norm.v, dtype=object)
        w = np.array(norm.w, dtype=object)
        t = np.einsum("wab,a,b->w", re, v, w)
        if np.any(t <= 0):
            raise ValueError("weighted norm nonpositive on a product")
        vals = np.array([_ilog(int(x)) for x in t])
    else:
        raise ValueError(f"level sums support max and weighted norms, not {norm!r}")
    return vals - dpow * math.log(D) + slog


def _ilog(x: int) -> float:
    if x <= 0:
        return -math.inf
    b = x.bit_length()
    if b < 1000:
        return math.log(x)
    shift = b - 60
    return math.log(x >> shift) + shift * math.log(2)


def level_log_norms(spec: GasketSpec, k: int, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    for lev, re, im, slog, dpow in _level_arrays(spec, k, budget):
        if lev == k:
            return _log_norms(spec, re, im, slog, dpow=dpow)
    raise AssertionError("unreachable")


def level_sum(spec: GasketSpec, k: int, s: float, budget: int = DEFAULT_BUDGET) -> float:
    """``sum over |I| = k of ||A_I||**(-s)`` with compensated summation."""
    if k < 0 or s < 0:
        raise ValueError("need k >= 0 and s >= 0")
    logs = level_log_norms(spec, k, budget)
    return math.fsum(np.exp(-s * logs).tolist())


def dedup_scan(spec: GasketSpec, depth: int, budget: int = DEFAULT_BUDGET) -> int:
    """Number of word pairs (lengths <= depth) with identical matrices."""
    seen: dict = {}
    expnum = [g.scale.exponent() for g in spec.generators]
    bases = [g.scale.base for g in spec.generators]
    D = Lifted.of(spec.generators).D
    for lev, re, im, _, dpow in _level_arrays(spec, depth, budget):
        # scale key: exact exponent per base accumulated along the word
        for idx, word in enumerate(level(spec.m, lev)):
            skey: dict = {}
            for j in word:
                if expnum[j - 1]:
                    skey[bases[j - 1]] = skey.get(bases[j - 1], 0) + expnum[j - 1]
            flat_re = [int(x) for x in re[idx].ravel()]
            flat_im = [int(x) for x in im[idx].ravel()]
            k = dpow
            # smallest power of D that clears denominators is canonical
            while k > 1 and all(x % D == 0 for x in flat_re + flat_im):
                flat_re = [x // D for x in flat_re]
                flat_im = [x // D for x in flat_im]
                k -= 1
            key = (k, tuple(flat_re), tuple(flat_im),
                   tuple(sorted((b, e) for b, e in skey.items() if e)))
            seen[key] = seen.get(key, 0) + 1
    return sum(c * (c - 1) // 2 for c in seen.values())


@dataclass
class CoefficientSample:
    ratio: float
    left: tuple[int, ...]
    right: tuple[int, ...]
    exact: Fraction | None = None
    pairs: int = 0


def fast_coefficient_sample(spec: GasketSpec, depth_i: int, depth_j: int,
                            norm=None) -> CoefficientSample:
    """Min of ``||A_IJ|| / (||A_I|| ||A_J||)`` over sampled ``I`` and block-prefixed ``J``.

    Scale factors cancel in the ratio, so it is computed on lifted integer
    matrices.  The max norm is used unless ``norm`` is given.
    """
    if depth_i < 1 or depth_j < 1:
        raise ValueError("depths must be >= 1")
    norm = norm or MaxAbs()
    L = Lifted.of(spec.generators)
    n = L.n

    def lift_words(words):
        words = list(words)
        cache = {(): L.root()}
        for w in sorted(words, key=len):
            for cut in range(len(w)):
                pre = w[: cut + 1]
                if pre not in cache:
                    cache[pre] = _right_mul(L, cache[w[:cut]], w[cut] - 1)
        return words, cache

    def nval(node):
        re, im = node
        if isinstance(norm, MaxAbs):
            return Fraction(max(a * a + b * b for a, b in zip(re, im))), True
        t = sum(re[i * n + k] * norm.v[i] * norm.w[k] for i in range(n) for k in range(n))
        return Fraction(t), False

    left_words, left = lift_words(words_upto(spec.m, depth_i))
    right_words, right = lift_words(with_block_prefix(spec.m, depth_j))
    best = None
    pairs = 0
    lv = {w: nval(left[w]) for w in left_words}
    rv = {w: nval(right[w]) for w in right_words}
    for wi in left_words:
        a = left[wi]
        na, sq = lv[wi]
        for wj in right_words:
            prod = _mul_nodes(L, a, right[wj])
            npq, _ = nval(prod)
            nb, _ = rv[wj]
            # ratio = D * |X_IJ| / (|X_I| |X_J|); squared when moduli are squared
            r = (L.D ** 2 if sq else L.D) * npq / (na * nb)
            pairs += 1
            if best is None or r < best[0]:
                best = (r, wi, wj)
    r, wi, wj = best
    ratio = math.sqrt(r) if sq else float(r)
    exact = r if not sq else _exact_sqrt_or_none(r)
    return CoefficientSample(ratio, wi, wj, exact, pairs)


def _exact_sqrt_or_none(q: Fraction) -> Fraction | None:
    from ..exact import exact_sqrt
    return exact_sqrt(q)


def _lifted_product(L: Lifted, x, y):
    """``x @ y`` for two lifted nodes, checking the division by ``D``."""
    n, D = L.n, L.D
    xr, xi = x
    yr, yi = y
    cre, cim = [0] * (n * n), [0] * (n * n)
    for i in range(n):
        for k in range(n):
            ar = ai = 0
            for l in range(n):
                a, b = xr[i * n + l], xi[i * n + l]
                c, d = yr[l * n + k], yi[l * n + k]
                ar += a * c - b * d
                ai += a * d + b * c
            if ar % D or ai % D:
                raise LiftError("product left the lifted lattice")
            cre[i * n + k] = ar // D
            cim[i * n + k] = ai // D
    return cre, cim


def _right_mul(L: Lifted, node, j: int):
    """``node @ G_j`` in lifted units."""
    return _lifted_product(L, node, (L.gre[j], L.gim[j]))


_mul_nodes = _lifted_product
