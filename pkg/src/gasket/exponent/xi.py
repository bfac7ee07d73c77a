"""Roots of the level-sum function."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from ..enumeration.engine import DEFAULT_BUDGET, level_log_norms
from ..enumeration.spec import GasketSpec


@dataclass(frozen=True)
class XiResult:
    """``root`` solves ``xi_k(s) = 1`` at ``k``; ``ratio_root`` solves ``Z_k(s) = Z_{k-1}(s)``.

    For parabolic gaskets the k-th root creeps up to the exponent slowly,
    the ratio of consecutive level sums gets there faster.
    """

    root: float
    k: int
    roots: dict[int, float]
    ratio_root: float | None = None
    ratio_roots: dict[int, float] | None = None


def log_xi(logs: np.ndarray, k: int, s: float) -> float:
    """``log xi_k(s) = (1/k) log sum ||A_I||**(-s)`` over the words of length ``k``."""
    return float(logsumexp(-s * logs)) / k


def xi_value(spec: GasketSpec, k: int, s: float, budget: int = DEFAULT_BUDGET) -> float:
    return math.exp(log_xi(level_log_norms(spec, k, budget), k, s))


def _root(logs: np.ndarray, k: int, s_max: float = 64.0, bracket=None) -> float:
    def fn(s):
        return log_xi(logs, k, s)

    if bracket is not None:
        a, b = bracket
        if fn(a) <= 0 or fn(b) >= 0:
            raise ValueError(f"xi_{k} - 1 does not change sign on [{a}, {b}]")
        return brentq(fn, a, b, xtol=1e-13, maxiter=300)
    if fn(0.0) <= 0:
        raise ValueError("xi(0) <= 1: a single generator has no exponent")
    hi = 1.0
    while fn(hi) > 0:
        hi *= 2
        if hi > s_max:
            raise ValueError(f"no root of xi below s = {s_max}")
    return brentq(fn, 0.0, hi, xtol=1e-13, maxiter=300)


def _ratio_root(logs: np.ndarray, prev: np.ndarray, s_max: float = 64.0) -> float | None:
    def fn(s):
        return float(logsumexp(-s * logs) - logsumexp(-s * prev))

    if fn(0.0) <= 0:
        return None
    hi = 1.0
    while fn(hi) > 0:
        hi *= 2
        if hi > s_max:
            return None
    return brentq(fn, 0.0, hi, xtol=1e-13, maxiter=300)


def xi_root(spec: GasketSpec, k_max: int, k_min: int = 4,
            budget: int = DEFAULT_BUDGET, bracket=None) -> XiResult:
    """Root of ``xi_k(s) = 1`` at ``k = k_max``, with the roots for smaller ``k``."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    roots, ratios = {}, {}
    prev = None
    for k in range(max(1, min(k_min, k_max) - 1), k_max + 1):
        logs = level_log_norms(spec, k, budget)
        if k >= min(k_min, k_max):
            roots[k] = _root(logs, k, bracket=bracket)
            if prev is not None:
                r = _ratio_root(logs, prev)
                if r is not None:
                    ratios[k] = r
        prev = logs
    return XiResult(roots[k_max], k_max, roots, ratios.get(k_max), ratios)
