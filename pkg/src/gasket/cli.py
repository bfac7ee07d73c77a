"""Command-line interface; every command prints one JSON document (or CSV)."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from fractions import Fraction

import numpy as np

from . import catalog
from .enumeration import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    CertificateError,
    count_table,
    dedup_scan,
    fast_coefficient_sample,
)
from .exponent import (
    FL1,
    FL2,
    AffineSab,
    TriangularRho,
    bound_exponent,
    fit_exponent,
    solve_closed_form,
    xi_root,
)
from .fractal import box_dimension, emit, read_csv
from .projective import ChartError, ComplexAffine, SimplexChart, orbit_cloud

EXIT_USAGE = 1
EXIT_CERTIFICATE = 2
EXIT_BUDGET = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _jsonable(x):
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return x if math.isfinite(x) else str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return str(x)


def _document(command, params, results, certified, seconds) -> dict:
    return {
        "command": command,
        "params": _jsonable(params),
        "results": _jsonable(results),
        "certified": certified,
        "timings": {"seconds": round(seconds, 6)},
    }


def _pair(text, kind=int, sep=":"):
    try:
        a, b = text.split(sep)
        return kind(a), kind(b)
    except ValueError:
        raise UsageError(f"expected two values separated by {sep!r}, got {text!r}") from None


def _spec(args):
    params = catalog.parse_params(args.params)
    try:
        return catalog.get(args.gasket, **params), params
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None


# --------------------------------------------------------------------------
# commands


def cmd_catalog(args):
    rows = json.loads(catalog.catalog_json())
    return _document("catalog list", {}, rows, None, 0.0)


def cmd_count(args):
    spec, params = _spec(args)
    t = count_table(spec, args.pmax, base=args.base, strict=not args.nonstrict,
                    budget=args.budget, threads=args.threads, pmin=args.pmin)
    rows = [{"p": p, "threshold": f"{args.base}^{p}", "count": str(c)} for p, c in t.rows]
    results = {"rows": rows, "nodes_visited": str(t.nodes_visited), "backend": t.backend}
    return _document("count", {"gasket": args.gasket, **params, "pmax": args.pmax,
                               "pmin": args.pmin, "base": args.base,
                               "strict": not args.nonstrict}, results, t.certified, t.seconds)


def cmd_fit(args):
    spec, params = _spec(args)
    window = _pair(args.window) if args.window else None
    if args.reference:
        ref = catalog.references(args.gasket).get("table")
        if ref is None:
            raise UsageError(f"{args.gasket} has no reference table")
        table = ref.value[: args.pmax] if args.pmax else ref.value
        certified, seconds = None, 0.0
    else:
        if not args.pmax:
            raise UsageError("--pmax is required unless --reference is given")
        t = count_table(spec, args.pmax, budget=args.budget, threads=args.threads)
        table, certified, seconds = t, t.certified, t.seconds
    est = fit_exponent(table, window)
    return _document("exponent fit", {"gasket": args.gasket, **params, "pmax": args.pmax,
                                      "window": window, "reference": args.reference},
                     {"slope": est.slope, "stderr": est.stderr, "window": est.window},
                     certified, seconds)


def cmd_bounds(args):
    spec, params = _spec(args)
    start = time.perf_counter()
    coeff = Fraction(args.coefficient) if args.coefficient else None
    b = bound_exponent(spec, Fraction(args.kappa), coeff, terms=args.terms)
    return _document("exponent bounds", {"gasket": args.gasket, **params, "kappa": args.kappa,
                                         "coefficient": b.coefficient, "terms": args.terms},
                     {"s_lower": b.s_lower, "s_upper": b.s_upper,
                      "tail_bound_width": b.tail_bound_width, "families": b.families,
                      "rate_gap": b.rate_gap},
                     True, time.perf_counter() - start)


_FAMILIES = {
    "triangular": lambda p: TriangularRho(tuple(Fraction(x) for x in p["rho"].split(","))),
    "affine": lambda p: AffineSab(Fraction(p["a"]), Fraction(p["b"])),
    "fl1": lambda p: FL1(Fraction(p["a"]), Fraction(p["b"])),
    "fl2": lambda p: FL2(Fraction(p["a"])),
}


def cmd_closed_form(args):
    params = catalog.parse_params(args.params)
    try:
        fam = _FAMILIES[args.family](params)
    except KeyError as exc:
        raise UsageError(f"missing parameter {exc.args[0]} for {args.family}") from None
    root = solve_closed_form(fam)
    return _document("exponent closed-form", {"family": args.family, **params},
                     {"root": root, "residual": abs(fam.lhs(root) - 1)}, None, 0.0)


def cmd_xi(args):
    spec, params = _spec(args)
    bracket = _pair(args.s_bracket, float) if args.s_bracket else None
    start = time.perf_counter()
    res = xi_root(spec, args.kmax, k_min=args.kmin, budget=args.budget, bracket=bracket)
    return _document("exponent xi", {"gasket": args.gasket, **params, "kmax": args.kmax,
                                     "s_bracket": bracket},
                     {"root": res.root, "roots": res.roots, "ratio_root": res.ratio_root,
                      "ratio_roots": res.ratio_roots}, None, time.perf_counter() - start)


def _default_seed(chart):
    if isinstance(chart, ComplexAffine):
        return 0j
    if isinstance(chart, SimplexChart):
        return [1 / chart.n] * (chart.n - 1)
    return [1 / 3] * (chart.n - 1)


def _parse_seed(text, chart):
    vals = [float(v) for v in text.split(",")]
    if isinstance(chart, ComplexAffine):
        if len(vals) != 2:
            raise UsageError("complex charts take --seed x,y")
        return complex(vals[0], vals[1])
    return vals


def cmd_orbit(args):
    spec, params = _spec(args)
    chart = spec.chart
    if chart is None:
        raise UsageError(f"{args.gasket} has no projective chart")
    seed = _parse_seed(args.seed, chart) if args.seed else _default_seed(chart)
    start = time.perf_counter()
    cloud = orbit_cloud(spec, chart, seed, args.depth)
    path = emit(cloud, args.out, args.out_format)
    lo, hi = cloud.bbox
    return _document("orbit", {"gasket": args.gasket, **params, "depth": args.depth,
                               "seed": str(seed), "out": str(path)},
                     {"points": len(cloud), "bbox": [lo.tolist(), hi.tolist()]},
                     None, time.perf_counter() - start)


def cmd_boxdim(args):
    cloud = read_csv(args.infile)
    start = time.perf_counter()
    res = box_dimension(cloud, (args.jmin, args.jmax), anchors=args.anchors)
    return _document("boxdim", {"in": args.infile, "jmin": args.jmin, "jmax": args.jmax},
                     {"dimension": res.slope, "r_squared": res.r_squared,
                      "anchor_slopes": res.anchor_slopes, "counts": res.counts},
                     None, time.perf_counter() - start)


def cmd_coeff(args):
    spec, params = _spec(args)
    di, dj = _pair(args.depths, int, ",")
    start = time.perf_counter()
    res = fast_coefficient_sample(spec, di, dj)
    return _document("coeff", {"gasket": args.gasket, **params, "depths": [di, dj]},
                     {"ratio": res.ratio, "exact": res.exact, "left": "".join(map(str, res.left)),
                      "right": "".join(map(str, res.right)), "pairs": res.pairs},
                     None, time.perf_counter() - start)


def cmd_dedup(args):
    spec, params = _spec(args)
    start = time.perf_counter()
    collisions = dedup_scan(spec, args.depth, args.budget)
    return _document("dedup", {"gasket": args.gasket, **params, "depth": args.depth},
                     {"collisions": str(collisions)}, None, time.perf_counter() - start)


# --------------------------------------------------------------------------
# parser


def _common(p, gasket=True):
    if gasket:
        p.add_argument("--gasket", required=True)
        p.add_argument("--params", action="append", default=[], metavar="K=V[,K=V]")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--format", choices=["json", "csv"], default="json")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gasket", description=__doc__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    cat = sub.add_parser("catalog", help="list built-in families")
    cat.add_argument("action", choices=["list"])
    _common(cat, gasket=False)
    cat.set_defaults(func=cmd_catalog)

    c = sub.add_parser("count", help="exact N(base^p) table")
    _common(c)
    c.add_argument("--pmax", type=int, required=True)
    c.add_argument("--pmin", type=int, default=1)
    c.add_argument("--base", type=int, default=2)
    c.add_argument("--nonstrict", action="store_true")
    c.set_defaults(func=cmd_count)

    ex = sub.add_parser("exponent", help="exponent estimates")
    exs = ex.add_subparsers(dest="mode", parser_class=_Parser, required=True)
    f = exs.add_parser("fit")
    _common(f)
    f.add_argument("--pmax", type=int)
    f.add_argument("--window", metavar="A:B")
    f.add_argument("--reference", action="store_true", help="fit the stored reference table")
    f.set_defaults(func=cmd_fit)
    b = exs.add_parser("bounds")
    _common(b)
    b.add_argument("--kappa", default="0")
    b.add_argument("--coefficient")
    b.add_argument("--terms", type=int, default=200)
    b.set_defaults(func=cmd_bounds)
    cf = exs.add_parser("closed-form")
    _common(cf, gasket=False)
    cf.add_argument("--family", choices=sorted(_FAMILIES), required=True)
    cf.add_argument("--params", action="append", default=[])
    cf.set_defaults(func=cmd_closed_form)
    x = exs.add_parser("xi")
    _common(x)
    x.add_argument("--kmax", type=int, required=True)
    x.add_argument("--kmin", type=int, default=4)
    x.add_argument("--s-bracket", metavar="A:B")
    x.set_defaults(func=cmd_xi)

    o = sub.add_parser("orbit", help="orbit point cloud to CSV or SVG")
    _common(o)
    o.add_argument("--depth", type=int, required=True)
    o.add_argument("--seed")
    o.add_argument("--out", required=True)
    o.add_argument("--out-format", choices=["csv", "svg"])
    o.set_defaults(func=cmd_orbit)

    bd = sub.add_parser("boxdim", help="box-counting dimension of a CSV cloud")
    _common(bd, gasket=False)
    bd.add_argument("--in", dest="infile", required=True)
    bd.add_argument("--jmin", type=int, default=4)
    bd.add_argument("--jmax", type=int, default=9)
    bd.add_argument("--anchors", type=int, default=4)
    bd.set_defaults(func=cmd_boxdim)

    co = sub.add_parser("coeff", help="sampled fast coefficient")
    _common(co)
    co.add_argument("--depths", default="4,4", metavar="DI,DJ")
    co.set_defaults(func=cmd_coeff)

    d = sub.add_parser("dedup", help="count coinciding words")
    _common(d)
    d.add_argument("--depth", type=int, required=True)
    d.set_defaults(func=cmd_dedup)
    return p


def _to_csv(doc: dict) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    res = doc["results"]
    if doc["command"] == "count":
        w.writerow(["p", "threshold", "count"])
        for r in res["rows"]:
            w.writerow([r["p"], r["threshold"], r["count"]])
    elif isinstance(res, list):
        keys = list(res[0]) if res else []
        w.writerow(keys)
        for r in res:
            w.writerow([json.dumps(r[k]) if isinstance(r[k], (list, dict)) else r[k] for k in keys])
    else:
        w.writerow(["key", "value"])
        for k, v in res.items():
            w.writerow([k, json.dumps(v) if isinstance(v, (list, dict)) else v])
    return out.getvalue()


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc = args.func(args)
    except UsageError as exc:
        print(f"gasket: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CertificateError as exc:
        print(f"gasket: certificate failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except BudgetExceeded as exc:
        print(f"gasket: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, ChartError, OSError) as exc:
        print(f"gasket: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.format == "csv":
        out.write(_to_csv(doc))
    else:
        out.write(json.dumps(doc, indent=2) + "\n")
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
