"""Log-log slope of counting tables."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class ExponentEstimate:
    slope: float
    stderr: float
    window: tuple[int, int]
    intercept: float = 0.0


def _rows(table, base: float):
    """Accept a CountTable, a list of ``(p, N)`` pairs, or counts starting at p = 1."""
    if hasattr(table, "rows"):
        return [(int(p), int(n)) for p, n in table.rows], float(table.base)
    rows = list(table)
    if rows and not isinstance(rows[0], (tuple, list)):
        rows = list(enumerate(rows, start=1))
    return [(int(p), int(n)) for p, n in rows], base


def fit_exponent(table, window: tuple[int, int] | None = None, base: float = 2) -> ExponentEstimate:
    """Least-squares slope of ``log N(b**p)`` against ``log b**p``.

    The default window is the upper half of the table.
    """
    rows, base = _rows(table, base)
    if window is None:
        ps = [p for p, _ in rows]
        if not ps:
            raise ValueError("empty table")
        lo, hi = min(ps), max(ps)
        window = (lo + (hi - lo + 1) // 2, hi)
    pmin, pmax = window
    pts = [(p, n) for p, n in rows if pmin <= p <= pmax]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 rows in window {window}, got {len(pts)}")
    if any(n <= 0 for _, n in pts):
        raise ValueError("counts in the window must be positive")
    x = np.array([p * math.log(base) for p, _ in pts])
    # math.log handles counts beyond float range of numpy int conversion
    y = np.array([math.log(n) for _, n in pts])
    fit = stats.linregress(x, y)
    err = float(fit.stderr) if math.isfinite(fit.stderr) else 0.0
    return ExponentEstimate(float(fit.slope), err, (pmin, pmax), float(fit.intercept))
