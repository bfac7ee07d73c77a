"""Built-in semigroup families with pinned coefficients and reference data."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable

from .enumeration.spec import (
    CertificateError,
    Envelope,
    GasketSpec,
    Geometric,
    RowMinBound,
    Unipotent2,
    check_unipotent2,
    dominant_entry_certificate,
    permutation_certificate,
)
from .exact import (
    EntrySumL1,
    MaxAbs,
    RowSumInf,
    ScaleFactor,
    WeightedBilinear,
    mat_mul,
    matrix,
    norm_eval,
)
from .projective import (
    RealAffine,
    SimplexChart,
    build_complex_sierpinski,
    build_real_sierpinski,
)

# Curvature weights for the Hirst semigroup.  The curvature of circle I is
# sum_ij (H_I)_ij * ROW[i] * COL[j]; pairing the weights the other way
# round does not reproduce the published counts.
HIRST_ROW_WEIGHTS = (1, 1, 1, 2)
HIRST_COL_WEIGHTS = (-1, 2, 2, 0)


@dataclass(frozen=True)
class Reference:
    value: Any
    source: str
    tolerance: float | None = None


@dataclass
class CatalogEntry:
    name: str
    summary: str
    builder: Callable[..., GasketSpec]
    defaults: dict = field(default_factory=dict)
    coefficient: Fraction | None = None
    coefficient_source: str = ""
    references: dict[str, Reference] = field(default_factory=dict)
    closed_form: Callable[..., float] | None = None

    def build(self, **params) -> GasketSpec:
        merged = {**self.defaults, **params}
        unknown = set(merged) - set(self.defaults)
        if unknown:
            raise ValueError(f"{self.name}: unknown parameters {sorted(unknown)}")
        spec = self.builder(**merged)
        if self.coefficient is not None and spec.coefficient is None:
            spec = replace(spec, coefficient=self.coefficient)
        return spec


# --------------------------------------------------------------------------
# helpers


def _unipotent_tails(gens) -> dict:
    m = len(gens)
    tails = {}
    for t in range(1, m + 1):
        if not check_unipotent2(gens[t - 1]):
            continue
        for h in range(1, m + 1):
            if h != t:
                tails[(h, t)] = Unipotent2()
    return tails


def _geometric_tails(gens, terms: int = 50) -> dict:
    """Validated growth ratios along ``h t^k`` over the first ``terms`` members."""
    m = len(gens)
    tails = {}
    for h in range(1, m + 1):
        for t in range(1, m + 1):
            if h == t:
                continue
            cur = gens[h - 1]
            prev = None
            ratio = None
            for _ in range(terms):
                cur = mat_mul(cur, gens[t - 1])
                val = float(norm_eval(MaxAbs(), cur))
                if prev is not None:
                    r = val / prev
                    ratio = r if ratio is None else min(ratio, r)
                prev = val
            if ratio is None or ratio <= 1:
                continue
            # round down to a short rational so the bound stays conservative
            lam = Fraction(math.floor(ratio * 1000), 1000)
            tails[(h, t)] = Geometric(lam, validated=True)
    return tails


def _transposes(gens):
    return tuple(g.transpose() for g in gens)


def _cubic_intro(n: int):
    """Matrices ``C_i`` with unit diagonal and ones in column i (transposes of ``f_i``)."""
    gens = []
    for i in range(n):
        rows = [[1 if r == c or c == i else 0 for c in range(n)] for r in range(n)]
        gens.append(matrix(rows))
    return tuple(gens)


def _frac(x) -> Fraction:
    return Fraction(x)


# --------------------------------------------------------------------------
# builders


def _cubic(n: int) -> GasketSpec:
    gens = _cubic_intro(n)
    return GasketSpec(f"C{n}", gens, certificate=permutation_certificate(gens),
                      tails=_unipotent_tails(gens), action=_transposes(gens),
                      chart=SimplexChart(n), params={"n": n})


def build_c2() -> GasketSpec:
    gens = (matrix([[1, 0], [1, 1]]), matrix([[1, 1], [0, 1]]))
    return GasketSpec("C2", gens, certificate=permutation_certificate(gens),
                      tails=_unipotent_tails(gens), action=_transposes(gens),
                      chart=SimplexChart(2))


def build_c3() -> GasketSpec:
    return _cubic(3)


def build_c4() -> GasketSpec:
    return _cubic(4)


def build_fibonacci() -> GasketSpec:
    gens = (matrix([[1, 1], [1, 0]]), matrix([[2, 1], [1, 0]]))
    return GasketSpec("F", gens, certificate=permutation_certificate(gens),
                      tails=_geometric_tails(gens))


def build_golden() -> GasketSpec:
    b = matrix([[2, 1], [1, 1]])
    gens = (b, b)
    return GasketSpec("B", gens, certificate=permutation_certificate(gens))


def build_hirst() -> GasketSpec:
    gens = (
        matrix([[1, 0, 0, 0], [0, 1, 0, 0], [1, 1, 1, 2], [1, 1, 0, 1]]),
        matrix([[1, 0, 0, 0], [0, 0, 1, 0], [1, 1, 1, 2], [1, 0, 1, 1]]),
        matrix([[0, 1, 0, 0], [0, 0, 1, 0], [1, 1, 1, 2], [0, 1, 1, 1]]),
    )
    cert = Envelope(MaxAbs(), Fraction(1), permutation_certificate(gens))
    return GasketSpec("hirst", gens, norm=WeightedBilinear(HIRST_ROW_WEIGHTS, HIRST_COL_WEIGHTS),
                      certificate=cert, row_dominance=2,
                      params={"v": HIRST_COL_WEIGHTS, "w": HIRST_ROW_WEIGHTS})


def build_apollonian() -> GasketSpec:
    spec = build_complex_sierpinski(Fraction(1, 5))
    return replace(spec, name="apollonian", tails=_unipotent_tails(spec.generators))


def build_complex(u="1/2") -> GasketSpec:
    spec = build_complex_sierpinski(_frac(u))
    return replace(spec, tails=_unipotent_tails(spec.generators))


def build_real(n=3, alpha=2) -> GasketSpec:
    return build_real_sierpinski(int(n), _frac(alpha))


def build_cubic(alpha=1) -> GasketSpec:
    return build_real_sierpinski(3, _frac(alpha))


def affine_matrices(a, b):
    a, b = _frac(a), _frac(b)
    m1 = [[1 - a, 0, 0], [0, 1 - a, a], [0, 0, 1]]
    m2 = [[b, 0, 0], [0, a, 0], [0, 0, 1]]
    m3 = [[1 - b, 1 - a - b, b], [0, a, 0], [0, 0, 1]]
    return m1, m2, m3


def build_affine(a="1/2", b="1/2") -> GasketSpec:
    a, b = _frac(a), _frac(b)
    if not (0 < a < 1 and 0 < b < 1):
        raise ValueError("need 0 < a, b < 1")
    gens = []
    for m in affine_matrices(a, b):
        det = m[0][0] * m[1][1]
        gens.append(matrix(m, ScaleFactor(det, -1, 3)))
    gens = tuple(gens)
    cert = dominant_entry_certificate(gens, (2, 2))
    return GasketSpec(f"affine(a={a}, b={b})", gens, certificate=cert,
                      chart=RealAffine(3), params={"a": a, "b": b})


def build_c2alpha(alpha="3/2") -> GasketSpec:
    al = _frac(alpha)
    if not 1 <= al <= 2:
        raise ValueError("need 1 <= alpha <= 2")
    gens = (matrix([[al, 0], [1 / al, 1 / al]]), matrix([[1 / al, 1 / al], [0, al]]))
    # at alpha = 1 a row of [[1,0],[k,1]] never grows, so row minima cannot stop the search
    cert = permutation_certificate(gens) if al == 1 else RowMinBound()
    return GasketSpec(f"C2alpha(alpha={al})", gens, certificate=cert,
                      action=_transposes(gens), chart=SimplexChart(2), params={"alpha": al})


def build_triangular(rho="2,2") -> GasketSpec:
    """``A_i = rho_i [[1/2, beta_i], [0, 1]]``; every product has norm ``prod rho``.

    The offsets ``beta_i`` are spread over ``[0, 1/2]``, which keeps the
    lower-right entry dominant in every product.
    """
    rhos = [_frac(r) for r in (rho.split(",") if isinstance(rho, str) else rho)]
    if len(rhos) < 2 or any(r <= 1 for r in rhos):
        raise ValueError("need at least two rho values, each > 1")
    m = len(rhos)
    gens = tuple(matrix([[r / 2, r * Fraction(i, 2 * (m - 1))], [0, r]])
                 for i, r in enumerate(rhos))
    return GasketSpec(f"triangular(rho={','.join(map(str, rhos))})", gens,
                      certificate=dominant_entry_certificate(gens, (1, 1)),
                      params={"rho": tuple(rhos)})


# --------------------------------------------------------------------------
# registry

_TAB_N = "reference count table"

C2_TABLE = [3, 15, 71, 287, 1231, 4911, 19831, 79279, 318383, 1273807, 5098247, 20391887,
            81590055, 326364583, 1305483999, 5221928631, 20888160751, 83552534287,
            334211194663]
C3_TABLE = [4, 22, 148, 760, 4594, 24646, 136372, 740650, 4046188, 22022770, 119929126,
            652445212, 3550689778]
C4_TABLE = [5, 37, 293, 2197, 15125, 103669, 714245, 4849045, 32901077, 222724789,
            1507986917, 10202765749]
A3_TABLE = [3, 12, 64, 316, 1784, 10004, 58224, 341386, 2033906, 12170708, 73208110,
            441772966, 267292497]
HIRST_TABLE = [0, 1, 3, 8, 18, 48, 113, 278, 681, 1722, 4238, 10488, 25927, 64086, 158266,
               391062, 967315, 2390800, 5909752, 14608522, 36115118, 89275994, 220684802,
               545546400, 1348603780, 3333755028, 8241076212, 20372155276, 50360227721,
               124491161884, 307744098990, 760747405278, 1880578271904, 4648814463680,
               11491932849933, 28408221038996, 70225503797745, 173598409768852,
               429137646728801]
F_TABLE = [2, 7, 16, 34, 84, 151, 348, 679, 1546, 3034, 6546, 13476, 28409, 59578, 122139,
           261698, 531191, 1144823, 2314772, 4986951, 10132768, 21667197, 44400099, 94074745,
           194587388, 408651488, 852101402, 1777247239, 3726410796, 7738675037,
           16274400897, 33739772516, 71002774691, 147235829060, 309533001058]

# (a, b) -> (exponent, box dimension when known analytically)
AFFINE_TABLE = {
    ("1/4", "1/2"): (2.42632, 1.68886),
    ("3/4", "1/2"): (2.45425, 1.72368),
    ("1/2", "3/4"): (2.34443, None),
    ("1/5", "3/10"): (2.43735, 1.71262),
    ("4/5", "3/10"): (2.46960, None),
    ("3/10", "1/5"): (2.37354, None),
    ("7/10", "1/5"): (2.35249, 1.63373),
}

# alpha -> (exponent, box dimension), both heuristic
REAL_SIERPINSKI_TABLE = {
    1: (2.447, 1.72), 1.3: (2.395, 1.72), 1.7: (2.377, 1.71), 2: (2.359, 1.59),
    3: (2.378, 1.71), 4: (2.389, 1.73), 7: (2.394, 1.76),
}


def _affine_root(a="1/2", b="1/2") -> float:
    from .exponent import AffineSab, solve_closed_form
    return solve_closed_form(AffineSab(_frac(a), _frac(b)))


def _triangular_root(rho="2,2") -> float:
    from .exponent import TriangularRho, solve_closed_form
    rhos = [_frac(r) for r in (rho.split(",") if isinstance(rho, str) else rho)]
    return solve_closed_form(TriangularRho(tuple(rhos)))


CATALOG: dict[str, CatalogEntry] = {}


def _register(entry: CatalogEntry) -> None:
    CATALOG[entry.name.lower()] = entry


_register(CatalogEntry(
    "C2", "2x2 unipotent generators [[1,0],[1,1]], [[1,1],[0,1]]", build_c2,
    coefficient=Fraction(1, 2), coefficient_source="fast-gasket example, c = 1/2",
    references={
        "table": Reference(C2_TABLE, _TAB_N),
        "exponent": Reference(2.0001, "log N interpolation for p <= 17", 1e-3),
        "lower_bound_k0": Reference(1.54, "mu_0 lower bound"),
        "bounds_k2": Reference((1.7, 3.93), "mu_2 bounds"),
    }))
_register(CatalogEntry(
    "C3", "cubic gasket, 3x3 generators with unit diagonal", build_c3,
    coefficient=Fraction(1, 3),
    coefficient_source="cubic bounds are solved against 3^(-s)",
    references={
        "table": Reference(C3_TABLE, _TAB_N),
        "exponent": Reference(2.444, "log N interpolation for p <= 13", 1e-3),
        "dimension": Reference(1.72, "box counting", 0.1),
        "lower_bound_k0": Reference(1.52, "mu_0 lower bound"),
        "bounds_k2": Reference((1.7, 7.1), "mu_2 bounds"),
        "tribonacci": Reference(1.839286755214161, "growth of cyclic products"),
    }))
_register(CatalogEntry(
    "C4", "4x4 analogue of the cubic gasket", build_c4,
    references={"table": Reference(C4_TABLE, _TAB_N)}))
_register(CatalogEntry(
    "F", "continued-fraction pair [[1,1],[1,0]], [[2,1],[1,0]]", build_fibonacci,
    coefficient=Fraction(1, 3), coefficient_source="fast with c >= 1/3",
    references={
        "table": Reference(F_TABLE, _TAB_N),
        "exponent": Reference(1.062, "log N interpolation for p <= 28", 2e-3),
        "bounds_k8": Reference((0.95, 1.76), "mu_8 bounds with 30 summands"),
    }))
_register(CatalogEntry(
    "B", "golden generator [[2,1],[1,1]] used twice", build_golden,
    coefficient=Fraction(1), coefficient_source="fast with c >= 1",
    references={"exponent": Reference(1 / (2 * math.log2((1 + math.sqrt(5)) / 2)),
                                      "1 / (2 log2 g)")}))
_register(CatalogEntry(
    "hirst", "Hirst semigroup with the curvature norm", build_hirst,
    coefficient=Fraction(1, 4), coefficient_source="fast with c >= 1/4",
    references={
        "table": Reference(HIRST_TABLE, _TAB_N),
        "exponent": Reference(1.30568673, "log N interpolation for p <= 40", 1e-4),
    }))
_register(CatalogEntry(
    "apollonian", "Kleinian Apollonian semigroup A3 (complex family at u = 1/5)",
    build_apollonian,
    coefficient=Fraction(1, 5), coefficient_source="fast with c >= 1/5",
    references={
        "table": Reference(A3_TABLE, _TAB_N),
        "exponent": Reference(2.61, "orbit plot estimate", 0.05),
        "dimension": Reference(1.305, "orbit plot estimate", 0.01),
    }))
_register(CatalogEntry(
    "sierpinski_complex", "complex projective Sierpinski family, u in [1/5, 0.651]",
    build_complex, defaults={"u": "1/2"},
    references={"exponent_u_half": Reference(2 * math.log2(3), "2 log2 3"),
                "exponent_u_16_25": Reference(2.88, "orbit plot estimate", 0.05)}))
_register(CatalogEntry(
    "sierpinski_real", "real projective Sierpinski gasket F_n^alpha", build_real,
    defaults={"n": 3, "alpha": 2},
    references={"table_rsg": Reference(REAL_SIERPINSKI_TABLE, "real Sierpinski reference table"),
                "dimension_alpha_2": Reference(math.log2(3), "log2 3")}))
_register(CatalogEntry(
    "cubic", "cubic family C_3^alpha (real Sierpinski with n = 3)", build_cubic,
    defaults={"alpha": 1},
    references={"table_rsg": Reference(REAL_SIERPINSKI_TABLE, "real Sierpinski reference table")}))
_register(CatalogEntry(
    "affine", "affine Sierpinski gasket A_{a,b} normalized to determinant one",
    build_affine, defaults={"a": "1/2", "b": "1/2"},
    references={"table_asg": Reference(AFFINE_TABLE, "affine reference table"),
                "exponent_half_half": Reference(1.5 * math.log2(3), "(3/2) log2 3")},
    closed_form=_affine_root))
_register(CatalogEntry(
    "C2alpha", "deformation C_{2,alpha} of C2 with rational alpha in [1, 2]",
    build_c2alpha, defaults={"alpha": "3/2"},
    references={"exponent": Reference(2.0, "exponent is 2 for alpha in (1, 2)", 0.1)}))
_register(CatalogEntry(
    "triangular", "upper-triangular rho_i * [[1/2, beta_i], [0, 1]]", build_triangular,
    defaults={"rho": "2,2"}, closed_form=_triangular_root))


def names() -> list[str]:
    return [e.name for e in CATALOG.values()]


def entry(name: str) -> CatalogEntry:
    try:
        return CATALOG[name.lower()]
    except KeyError:
        raise KeyError(f"unknown gasket {name!r}; known: {', '.join(names())}") from None


def get(name: str, **params) -> GasketSpec:
    return entry(name).build(**params)


def references(name: str) -> dict[str, Reference]:
    return entry(name).references


def closed_form_root(name: str, **params) -> float:
    e = entry(name)
    if e.closed_form is None:
        raise ValueError(f"{name} has no closed-form exponent")
    return e.closed_form(**{**e.defaults, **params})


def parse_params(items) -> dict[str, str]:
    """``["a=1/4,b=1/2", "u=1/2"]`` -> ``{"a": "1/4", "b": "1/2", "u": "1/2"}``."""
    out = {}
    for item in items or []:
        for part in item.split(","):
            if not part.strip():
                continue
            if "=" not in part:
                if out:
                    # continuation of a comma-separated value such as rho=2,3
                    last = next(reversed(out))
                    out[last] += "," + part.strip()
                    continue
                raise ValueError(f"expected key=value, got {part!r}")
            k, v = part.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def catalog_json() -> str:
    rows = []
    for e in CATALOG.values():
        rows.append({
            "name": e.name,
            "summary": e.summary,
            "params": {k: str(v) for k, v in e.defaults.items()},
            "coefficient": None if e.coefficient is None else str(e.coefficient),
            "references": sorted(e.references),
        })
    return json.dumps(rows, indent=2)


# --------------------------------------------------------------------------
# user-defined families


_NORMS = {"max": MaxAbs, "rowsum": RowSumInf, "l1": EntrySumL1}


def from_description(desc: dict) -> GasketSpec:
    """Build a spec from a small JSON-style description.

    ``{"name": ..., "generators": [[["1","0"],["1","1"]], ...],
    "norm": "max" | {"weights": [v, w]}, "certificate": "permutation" |
    {"dominant_entry": [i, j]} | "rowmin"}``.  Entries are strings such as
    ``"3/2"`` or ``"1-2i"``.
    """
    gens = tuple(matrix(rows) for rows in desc["generators"])
    norm_desc = desc.get("norm", "max")
    if isinstance(norm_desc, dict):
        v, w = norm_desc["weights"]
        norm = WeightedBilinear(tuple(v), tuple(w))
    else:
        norm = _NORMS[norm_desc]()
    cdesc = desc.get("certificate", "permutation")
    if cdesc == "permutation":
        inner = permutation_certificate(gens)
    elif cdesc == "rowmin":
        inner = RowMinBound()
    elif isinstance(cdesc, dict) and "dominant_entry" in cdesc:
        inner = dominant_entry_certificate(gens, tuple(cdesc["dominant_entry"]))
    else:
        raise ValueError(f"unknown certificate {cdesc!r}")
    if inner is None:
        raise CertificateError("certificate conditions fail on the generators")
    cert = inner
    if isinstance(norm, WeightedBilinear):
        cert = Envelope(MaxAbs(), Fraction(desc.get("c1", 1)), inner)
    return GasketSpec(desc.get("name", "custom"), gens, norm=norm, certificate=cert,
                      tails=_unipotent_tails(gens))
