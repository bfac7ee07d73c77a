"""Exponent estimates: log-log fits, certified bounds, level sums and closed forms."""
from .closed_form import FL1, FL2, AffineSab, ClosedFormFamily, TriangularRho, solve_closed_form
from .fit import ExponentEstimate, fit_exponent
from .series import (
    BoundInterval,
    Family,
    MuBounds,
    QSeriesSet,
    SeriesError,
    bound_exponent,
    build_qseries,
    mu_bounds,
)
from .xi import XiResult, log_xi, xi_root, xi_value
from .zeta import hurwitz_zeta, zeta_special

__all__ = [
    "FL1", "FL2", "AffineSab", "ClosedFormFamily", "TriangularRho", "solve_closed_form",
    "ExponentEstimate", "fit_exponent", "BoundInterval", "Family", "MuBounds", "QSeriesSet",
    "SeriesError", "bound_exponent", "build_qseries", "mu_bounds", "XiResult", "log_xi",
    "xi_root", "xi_value", "hurwitz_zeta", "zeta_special",
]
