"""Riemann and Hurwitz zeta values for ``s > 1``."""
from __future__ import annotations

import math

from scipy import special


def hurwitz_zeta(s: float, q: float) -> float:
    """``sum_{k >= 0} (k + q)**(-s)``."""
    if not s > 1:
        raise ValueError(f"zeta series diverges for s = {s} <= 1")
    if not q > 0:
        raise ValueError(f"need q > 0, got {q}")
    val = float(special.zeta(s, q))
    if not math.isfinite(val):
        raise ValueError(f"zeta({s}, {q}) is not finite")
    return val


def zeta_special(s: float) -> float:
    return hurwitz_zeta(s, 1.0)
