import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gasket import catalog
from gasket.enumeration import count_table, level_log_norms
from gasket.exponent import (
    FL1,
    FL2,
    AffineSab,
    SeriesError,
    TriangularRho,
    bound_exponent,
    build_qseries,
    fit_exponent,
    hurwitz_zeta,
    log_xi,
    mu_bounds,
    solve_closed_form,
    xi_root,
    xi_value,
    zeta_special,
)


def _direct_zeta(s, q=1.0, terms=200_000):
    # partial sum plus the integral tail and its first correction
    k = np.arange(terms, dtype=float) + q
    head = math.fsum((k ** -s).tolist())
    x = terms + q
    return head + x ** (1 - s) / (s - 1) + 0.5 * x ** -s


class TestZeta:
    def test_basel(self):
        assert zeta_special(2) == pytest.approx(math.pi ** 2 / 6, abs=1e-12)

    def test_apery(self):
        assert zeta_special(3) == pytest.approx(1.2020569032, abs=1e-10)
        assert zeta_special(3) == pytest.approx(_direct_zeta(3), abs=1e-12)

    def test_hurwitz_at_one_is_riemann(self):
        assert hurwitz_zeta(2.5, 1) == pytest.approx(zeta_special(2.5), abs=1e-14)

    @pytest.mark.parametrize("s,q", [(1.5, 0.5), (2.0, 2.5), (3.5, 1.75), (7.0, 4.0)])
    def test_hurwitz_against_direct_sum(self, s, q):
        assert hurwitz_zeta(s, q) == pytest.approx(_direct_zeta(s, q), abs=1e-10)

    def test_shift_identity(self):
        assert hurwitz_zeta(2.2, 0.3) == pytest.approx(0.3 ** -2.2 + hurwitz_zeta(2.2, 1.3),
                                                       abs=1e-12)

    @pytest.mark.parametrize("s", [1.0, 0.5, -2.0])
    def test_rejects_s_at_most_one(self, s):
        with pytest.raises(ValueError):
            zeta_special(s)
        with pytest.raises(ValueError):
            hurwitz_zeta(s, 1.0)

    def test_rejects_nonpositive_q(self):
        with pytest.raises(ValueError):
            hurwitz_zeta(2.0, 0.0)


class TestFit:
    def test_synthetic_power(self):
        est = fit_exponent([4 ** p for p in range(1, 11)])
        assert est.slope == pytest.approx(2.0, abs=1e-12)
        assert est.stderr >= 0

    def test_window_and_pairs(self):
        rows = [(p, 3 ** p) for p in range(1, 9)]
        est = fit_exponent(rows, window=(2, 6))
        assert est.window == (2, 6)
        assert est.slope == pytest.approx(math.log2(3), abs=1e-12)

    def test_count_table_input(self):
        est = fit_exponent(count_table(catalog.get("C2"), 10))
        assert est.window == (6, 10)
        assert 1.9 < est.slope < 2.1

    def test_c2_reference_row(self):
        assert fit_exponent(catalog.C2_TABLE[:17]).slope == pytest.approx(2.000, abs=0.01)

    def test_hirst_reference_row(self):
        assert fit_exponent(catalog.HIRST_TABLE[:39]).slope == pytest.approx(1.30569, abs=1e-4)

    def test_degenerate_window(self):
        with pytest.raises(ValueError):
            fit_exponent([4, 16, 64], window=(2, 3))


class TestMu:
    @pytest.mark.parametrize("s", [1.5, 2.0, 3.0])
    def test_c2_kappa0(self, s):
        mu = mu_bounds(catalog.get("C2"), 0, s).mu
        expect = 2 * (zeta_special(s) - 1)
        assert mu[0] <= expect <= mu[1]
        assert mu[1] - mu[0] < 1e-9

    def test_c2_kappa0_at_two(self):
        lo, hi = mu_bounds(catalog.get("C2"), 0, 2.0).mu
        assert lo == pytest.approx(1.28987, abs=1e-5)
        assert hi == pytest.approx(2 * (math.pi ** 2 / 6 - 1), abs=1e-9)

    @pytest.mark.parametrize("s", [1.8, 2.5, 4.0])
    def test_c2_kappa2(self, s):
        mu = mu_bounds(catalog.get("C2"), 2, s).mu
        expect = 2 * (2 * zeta_special(s) + 2 ** -s * hurwitz_zeta(s, 2.5) - 2 - 2 ** (1 - s)
                      - 3 ** -s)
        assert mu[0] <= expect <= mu[1]

    @pytest.mark.parametrize("s", [1.6, 2.5, 4.0])
    def test_c3_kappa0(self, s):
        mu = mu_bounds(catalog.get("C3"), 0, s).mu
        expect = 3 * 2 ** (1 - s) * zeta_special(s)
        assert mu[0] <= expect <= mu[1]

    @pytest.mark.parametrize("s", [1.8, 2.5, 4.0])
    def test_c3_kappa2(self, s):
        mu = mu_bounds(catalog.get("C3"), 2, s).mu
        expect = 3 * 2 ** (1 - s) * (3 * zeta_special(s) + 2 ** (2 - s) * hurwitz_zeta(s, 1.75)
                                     - 2 ** (1 - s) - 3)
        assert mu[0] <= expect <= mu[1]

    @pytest.mark.parametrize("name,kappa,s", [("C2", 2, 2.2), ("C3", 2, 3.0), ("F", 8, 1.3)])
    def test_f_is_rescaled_g(self, name, kappa, s):
        spec = catalog.get(name)
        b = mu_bounds(spec, kappa, s)
        n, c = spec.n, float(spec.coefficient)
        for g, f in zip(b.g, b.f):
            assert f == pytest.approx((n / c) ** s * g, rel=1e-14)

    def test_refinement_leaves_only_large_members(self):
        qs = build_qseries(catalog.get("C3"), 2)
        assert len(qs.families) == 42

    def test_missing_tails(self):
        spec = catalog.get("triangular")
        with pytest.raises(SeriesError):
            mu_bounds(spec, 0, 2.0, coefficient=1)


class TestBounds:
    def test_c2_kappa0(self):
        b = bound_exponent(catalog.get("C2"), 0)
        assert b.s_lower == pytest.approx(1.54, abs=0.02)
        assert b.s_upper == math.inf

    def test_c2_kappa2(self):
        b = bound_exponent(catalog.get("C2"), 2, coefficient=Fraction(1, 2))
        assert b.s_lower == pytest.approx(1.70, abs=0.02)
        assert b.s_upper == pytest.approx(3.93, abs=0.02)
        assert b.s_lower <= b.s_upper

    def test_c3_kappa0(self):
        assert bound_exponent(catalog.get("C3"), 0).s_lower == pytest.approx(1.52, abs=0.02)

    def test_c3_kappa2_with_catalog_coefficient(self):
        b = bound_exponent(catalog.get("C3"), 2)
        assert b.coefficient == Fraction(1, 3)
        assert b.s_lower == pytest.approx(1.7, abs=0.1)
        assert b.s_upper == pytest.approx(7.1, abs=0.1)

    def test_c3_kappa2_with_half(self):
        # the coefficient 1/2 gives a tighter but different upper end
        b = bound_exponent(catalog.get("C3"), 2, coefficient=Fraction(1, 2))
        assert b.s_upper == pytest.approx(3.9344, abs=1e-3)

    def test_fibonacci_kappa8(self):
        b = bound_exponent(catalog.get("F"), 8)
        assert b.s_lower == pytest.approx(0.95, abs=0.01)
        assert b.s_upper == pytest.approx(1.773, abs=0.002)

    @pytest.mark.parametrize("name,pmax", [("C2", 12), ("C3", 8), ("F", 14)])
    def test_intervals_contain_fits(self, name, pmax):
        spec = catalog.get(name)
        est = fit_exponent(count_table(spec, pmax))
        kappa = 8 if name == "F" else 2
        b = bound_exponent(spec, kappa)
        assert b.s_lower - 2 * est.stderr <= est.slope <= b.s_upper + 2 * est.stderr

    def test_coefficient_checked(self):
        with pytest.raises(SeriesError):
            bound_exponent(catalog.get("C2"), 0, coefficient=Fraction(3, 2))


class TestXi:
    @pytest.mark.parametrize("name", ["C2", "C3", "F", "hirst", "apollonian", "triangular"])
    def test_value_at_zero_is_m(self, name):
        spec = catalog.get(name)
        assert xi_value(spec, 5, 0.0) == pytest.approx(spec.m, rel=1e-12)

    @pytest.mark.parametrize("name", ["C2", "triangular"])
    def test_decreasing(self, name):
        spec = catalog.get(name)
        vals = [xi_value(spec, 8, s) for s in (0.0, 0.5, 1.0, 2.0, 3.0)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_triangular_exact(self):
        res = xi_root(catalog.get("triangular"), 8)
        assert res.root == pytest.approx(1.0, abs=1e-12)
        assert all(r == pytest.approx(1.0, abs=1e-12) for r in res.roots.values())

    def test_complex_sierpinski(self):
        res = xi_root(catalog.get("sierpinski_complex", u="1/2"), 6)
        assert res.root == pytest.approx(2 * math.log2(3), abs=0.02)

    def test_c2_kth_root(self):
        res = xi_root(catalog.get("C2"), 14)
        assert res.root == pytest.approx(1.88742, abs=1e-4)
        roots = [res.roots[k] for k in range(6, 15)]
        assert roots == sorted(roots)

    def test_c2_ratio_root(self):
        res = xi_root(catalog.get("C2"), 14)
        assert res.ratio_root == pytest.approx(2.0, abs=0.1)

    def test_log_xi_matches_level_sum(self):
        spec = catalog.get("C3")
        logs = level_log_norms(spec, 4)
        direct = math.fsum(np.exp(-1.3 * logs).tolist()) ** (1 / 4)
        assert math.exp(log_xi(logs, 4, 1.3)) == pytest.approx(direct, rel=1e-12)

    def test_bad_bracket(self):
        with pytest.raises(ValueError):
            xi_root(catalog.get("C2"), 6, bracket=(2.5, 3.0))


def _residual(fam, s):
    return abs(fam.lhs(s) - 1)


class TestClosedForm:
    def test_triangular(self):
        fam = TriangularRho((2, 2))
        assert solve_closed_form(fam) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("ab", list(catalog.AFFINE_TABLE))
    def test_affine_table(self, ab):
        expect, _ = catalog.AFFINE_TABLE[ab]
        fam = AffineSab(Fraction(ab[0]), Fraction(ab[1]))
        s = solve_closed_form(fam)
        assert s == pytest.approx(expect, abs=1e-4)
        assert _residual(fam, s) < 1e-10

    def test_affine_half_half(self):
        s = solve_closed_form(AffineSab(Fraction(1, 2), Fraction(1, 2)))
        assert s == pytest.approx(1.5 * math.log2(3), abs=1e-10)

    def test_box_dimension_equations(self):
        cases = [(FL1(Fraction(3, 4), Fraction(1, 2)), 1.72368),
                 (FL2(Fraction(1, 4)), 1.68886),
                 (FL2(Fraction(1, 5)), 1.71262)]
        for fam, expect in cases:
            s = solve_closed_form(fam)
            assert s == pytest.approx(expect, abs=1e-5)
            assert _residual(fam, s) < 1e-10

    def test_fl2_half(self):
        assert solve_closed_form(FL2(Fraction(1, 2))) == pytest.approx(math.log2(3), abs=1e-10)

    def test_affine_bound_below_box_dimension(self):
        grid = [(Fraction(a, 8), Fraction(b, 8)) for a in range(1, 8) for b in range(1, 8)]
        t1 = [(a, b) for a, b in grid if a >= max(b, 1 - b)]
        t2 = [(a, b) for a, b in grid if a <= min(b, 1 - b)]
        assert len(t1) >= 9 and len(t2) >= 9
        half = (Fraction(1, 2), Fraction(1, 2))
        for pts, box in ((t1, lambda a, b: FL1(a, b)), (t2, lambda a, b: FL2(a))):
            for a, b in pts:
                gap = solve_closed_form(box(a, b)) - 2 / 3 * solve_closed_form(AffineSab(a, b))
                if (a, b) == half:
                    assert abs(gap) < 1e-10
                else:
                    assert gap > 1e-3

    @settings(max_examples=40, deadline=None)
    @given(st.fractions(Fraction(1, 50), Fraction(49, 50)),
           st.fractions(Fraction(1, 50), Fraction(49, 50)))
    def test_root_residual(self, a, b):
        fam = AffineSab(a, b)
        assert _residual(fam, solve_closed_form(fam)) < 1e-10

    def test_domain(self):
        with pytest.raises(ValueError):
            AffineSab(Fraction(0), Fraction(1, 2))
        with pytest.raises(ValueError):
            TriangularRho((2,))
        with pytest.raises(ValueError):
            solve_closed_form(TriangularRho((2, 2)), bracket=(2.0, 8.0))


@pytest.mark.parametrize("kappa", [8, 16])
def test_rate_gap_bounds_interval_width(kappa):
    b = bound_exponent(catalog.get("C2"), Fraction(kappa))
    assert math.isfinite(b.rate_gap)
    assert b.s_upper - b.s_lower <= b.rate_gap


def test_rate_gap_infinite_for_small_kappa():
    assert bound_exponent(catalog.get("C2"), Fraction(2)).rate_gap == math.inf
