"""Compiled versus pure-Python counting kernel.

    python3 benchmarks/bench_kernel.py [--repeat 3]

Both backends must return identical tables; the script prints the
wall-clock time of each and the speedup.
"""
import argparse
import time

from gasket import catalog
from gasket.enumeration import engine

CASES = [("C2", 9), ("C3", 6), ("F", 10), ("hirst", 11), ("apollonian", 7)]


def best_of(spec, pmax, backend, repeat):
    best, table = None, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        table = engine.count_table(spec, pmax, backend=backend, threads=1)
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best, table


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if engine.BACKEND != "compiled":
        raise SystemExit("compiled kernel not built; run `pip install -e . --no-build-isolation`")
    print(f"{'gasket':<12}{'pmax':>5}{'nodes':>12}{'compiled s':>12}{'python s':>11}{'speedup':>9}")
    for name, pmax in CASES:
        spec = catalog.get(name)
        tc, a = best_of(spec, pmax, "compiled", args.repeat)
        tp, b = best_of(spec, pmax, "python", args.repeat)
        assert a.rows == b.rows, f"{name}: backends disagree"
        print(f"{name:<12}{pmax:>5}{a.nodes_visited:>12}{tc:>12.4f}{tp:>11.4f}{tp / tc:>9.1f}")


if __name__ == "__main__":
    main()
