from fractions import Fraction

import numpy as np
import pytest

from gasket import catalog
from gasket.enumeration import GasketSpec, count_table
from gasket.exact import ExactMatrix, ScaleFactor, matrix
from gasket.projective import (
    ChartError,
    ComplexAffine,
    RealAffine,
    SimplexChart,
    act,
    build_complex_sierpinski,
    build_real_sierpinski,
    check_vertex_symmetry,
    cylinder_cloud,
    dual_frame,
    interval_length_identity,
    jacobian,
    mobius_derivative_bounds,
    orbit_cloud,
    simplex_volume_check,
)

RATIONAL_U = ["1/5", "9/25", "4/13", "1/2", "16/25"]


def _triangle_points(rng, n):
    u = rng.random((n, 2))
    flip = u.sum(axis=1) > 1
    u[flip] = 1 - u[flip]
    return u


class TestAct:
    def test_fixed_vertex(self):
        spec = catalog.get("cubic", alpha=1)
        assert act(spec.action_matrices()[2], spec.chart, [0.0, 0.0]) == pytest.approx([0, 0])

    def test_cubic_alpha_two(self):
        spec = catalog.get("cubic", alpha=2)
        assert act(spec.action_matrices()[0], spec.chart, [0.0, 0.0]) == pytest.approx([0.5, 0])

    def test_moebius_fixed_vertex(self):
        spec = catalog.get("apollonian")
        assert act(spec.generators[1], spec.chart, 1.0) == pytest.approx(1.0)

    def test_chart_boundary(self):
        swap = matrix([[0, 1], [1, 0]])
        with pytest.raises(ChartError):
            act(swap, ComplexAffine(), 0.0)

    def test_real_affine_chart(self):
        chart = RealAffine(3)
        m = matrix([[2, 0, 0], [0, 3, 0], [0, 0, 1]])
        assert act(m, chart, [1.0, 1.0]) == pytest.approx([2, 3])
        with pytest.raises(ValueError):
            RealAffine(3, 5)


class TestOrbit:
    def test_depth_zero(self):
        spec = catalog.get("C3")
        cloud = orbit_cloud(spec, spec.chart, [0.2, 0.3], 0)
        assert len(cloud) == 1
        assert cloud.points[0] == pytest.approx([0.2, 0.3])

    def test_size(self):
        spec = catalog.get("apollonian")
        assert len(orbit_cloud(spec, spec.chart, 0j, 9)) == 19683

    def test_apollonian_bbox(self):
        spec = catalog.get("apollonian")
        for seed in (0j, 0.3 + 0.5j, -0.2 + 0.7j):
            lo, hi = orbit_cloud(spec, spec.chart, seed, 8).bbox
            assert lo[0] >= -1 - 1e-6 and hi[0] <= 1 + 1e-6
            assert lo[1] >= -1e-6 and hi[1] <= 1 + 1e-6

    def test_c3_stays_in_triangle(self):
        spec = catalog.get("C3")
        rng = np.random.default_rng(1)
        for seed in _triangle_points(rng, 3):
            pts = orbit_cloud(spec, spec.chart, seed, 8).points
            assert pts.min() >= -1e-9
            assert pts.sum(axis=1).max() <= 1 + 1e-9

    def test_matches_word_products(self):
        spec = catalog.get("C3")
        seed = np.array([0.25, 0.4])
        pts = orbit_cloud(spec, spec.chart, seed, 2).points
        mats = spec.action_matrices()
        # row order: outer generator j, then inner word
        for j in range(3):
            for i in range(3):
                expect = act(mats[j], spec.chart, act(mats[i], spec.chart, seed))
                assert pts[3 * j + i] == pytest.approx(expect, abs=1e-12)

    def test_negative_depth(self):
        spec = catalog.get("C3")
        with pytest.raises(ValueError):
            orbit_cloud(spec, spec.chart, [0.2, 0.2], -1)

    def test_cylinder_cloud(self):
        spec = catalog.get("sierpinski_real")
        # depth-k triangles have diameter sqrt(2) 2^-k, so depth 6 is the first below 2^-5
        pts = cylinder_cloud(spec, 2 ** -5).points
        assert len(pts) == 3 ** 6
        assert pts.min() >= 0 and pts.sum(axis=1).max() <= 1
        with pytest.raises(ValueError):
            cylinder_cloud(catalog.get("C2"), 0.1)


class TestRealSierpinski:
    def test_alpha_one_is_c3_up_to_transpose(self):
        c3 = catalog.get("C3").generators
        mine = build_real_sierpinski(3, 1).generators
        assert [g.entries for g in mine] == [g.transpose().entries for g in c3]
        assert count_table(build_real_sierpinski(3, 1), 4).counts == [4, 22, 148, 760]

    def test_alpha_two(self):
        gens = build_real_sierpinski(3, 2).generators
        assert gens[0].entries == matrix([[2, 1, 1], [0, 1, 0], [0, 0, 1]]).entries
        assert gens[0].scale == ScaleFactor(2, -1, 3)

    @pytest.mark.parametrize("n,alpha", [(3, 1), (3, 2), (4, 1), (4, 3), (5, 2)])
    def test_vertex_symmetry(self, n, alpha):
        assert check_vertex_symmetry(build_real_sierpinski(n, alpha))

    def test_symmetry_detects_breakage(self):
        gens = list(build_real_sierpinski(3, 1).generators)
        gens[0] = matrix([[1, 2, 1], [0, 1, 0], [0, 0, 1]])
        spec = GasketSpec("broken", tuple(gens))
        assert not check_vertex_symmetry(spec)

    def test_domain(self):
        with pytest.raises(ValueError):
            build_real_sierpinski(2, 1)
        with pytest.raises(ValueError):
            build_real_sierpinski(3, Fraction(1, 2))


class TestComplexSierpinski:
    def test_apollonian_matrices(self):
        spec = build_complex_sierpinski(Fraction(1, 5))
        assert spec.params["v"] == Fraction(2, 5)
        assert [g.entries for g in spec.generators] == \
            [g.entries for g in catalog.get("apollonian").generators]

    def test_prefactor_for_16_25(self):
        spec = build_complex_sierpinski(Fraction(16, 25))
        assert spec.generators[0].scale == ScaleFactor(544, -1, 2)

    @pytest.mark.parametrize("u", RATIONAL_U)
    def test_tangency(self, u):
        spec = build_complex_sierpinski(Fraction(u))
        g = spec.generators
        vertex = {1: 1j, 2: 1.0, 3: -1.0}
        for i in vertex:
            for j in vertex:
                if i != j:
                    a = act(g[i - 1], spec.chart, vertex[j])
                    b = act(g[j - 1], spec.chart, vertex[i])
                    assert abs(a - b) < 1e-12

    @pytest.mark.parametrize("u", RATIONAL_U)
    def test_tangency_point_on_circle(self, u):
        spec = build_complex_sierpinski(Fraction(u))
        z = act(spec.generators[0], spec.chart, 1.0)
        uu = float(Fraction(u))
        assert z.real == pytest.approx(uu, abs=1e-12)
        assert z.imag ** 2 == pytest.approx(uu * (1 - uu), abs=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            build_complex_sierpinski(Fraction(1, 10))
        with pytest.raises(ValueError):
            build_complex_sierpinski(Fraction(1, 3))    # u(1-u) = 2/9 is not a square


class TestDualFrame:
    @pytest.mark.parametrize("n,alpha", [(3, 2), (3, 1), (4, 3), (5, Fraction(3, 2))])
    def test_formula(self, n, alpha):
        frame = dual_frame(build_real_sierpinski(n, alpha))
        for i, eta in enumerate(frame.eta):
            assert eta == tuple(alpha - 1 if j == i else 1 for j in range(n))
            assert frame.alphas[i] == alpha

    def test_cubic_has_zero_diagonal(self):
        frame = dual_frame(build_real_sierpinski(3, 1))
        assert all(eta[i] == 0 for i, eta in enumerate(frame.eta))

    def test_eigen_identity(self):
        spec = build_real_sierpinski(3, 2)
        eta = dual_frame(spec).eta[0]
        g = spec.generators[0]
        image = [sum(Fraction(eta[r]) * Fraction(g[r, c]) for r in range(3)) for c in range(3)]
        assert image == [2 * x for x in eta]

    def test_pattern_mismatch(self):
        with pytest.raises(ValueError):
            dual_frame(catalog.get("F"))


class TestVolume:
    def test_identity(self):
        chk = simplex_volume_check(catalog.get("C3"), ())
        assert chk.measured == pytest.approx(1 / 6, rel=1e-14)
        assert chk.predicted == pytest.approx(1 / 6, rel=1e-14)

    def test_single_generator(self):
        chk = simplex_volume_check(catalog.get("C3"), (1,))
        assert chk.predicted == pytest.approx(1 / 18, rel=1e-14)
        assert chk.ratio == pytest.approx(1, abs=1e-12)

    @pytest.mark.parametrize("spec", [catalog.get("C3"), catalog.get("C4"),
                                      build_real_sierpinski(3, 2), build_real_sierpinski(4, 2)],
                             ids=["C3", "C4", "real3", "real4"])
    def test_random_words(self, spec):
        rng = np.random.default_rng(7)
        for _ in range(100):
            word = tuple(int(x) for x in rng.integers(1, spec.m + 1, size=5))
            assert simplex_volume_check(spec, word).ratio == pytest.approx(1, abs=1e-12)


class TestMoebius:
    def test_identity(self):
        chk = mobius_derivative_bounds(ExactMatrix.identity(2), (0.0, 1.0), relaxed=False)
        assert chk.derivative == 1.0
        assert chk.holds

    def test_golden_generator(self):
        b1 = matrix([[2, 1], [1, 1]])
        strict = mobius_derivative_bounds(b1, (1.0, 2.0), relaxed=False)
        assert strict.derivative == pytest.approx(1 / 6.25)
        assert not strict.holds
        assert mobius_derivative_bounds(b1, (1.0, 2.0)).holds

    def test_c2_words(self):
        spec = catalog.get("C2")
        rng = np.random.default_rng(3)
        for _ in range(50):
            word = tuple(int(x) for x in rng.integers(1, 3, size=int(rng.integers(1, 12))))
            chk = interval_length_identity(spec.word_matrix(word))
            assert chk.length == pytest.approx(chk.formula, rel=1e-12)
            assert chk.holds

    def test_c1_interval(self):
        chk = interval_length_identity(catalog.get("C2").generators[0])
        assert chk.length == pytest.approx(0.5)

    def test_determinant_checked(self):
        with pytest.raises(ValueError):
            mobius_derivative_bounds(matrix([[2, 0], [0, 1]]), (0.0, 1.0))


class TestLipschitzWindow:
    @pytest.mark.parametrize("alpha", ["1", "3/2", "2", "3", "39/10"])
    def test_eigenvalue_window(self, alpha):
        spec = catalog.get("cubic", alpha=alpha)
        a = float(Fraction(alpha))
        lo, hi = min(1 / a, a / 4), max(1 / a, a / 4)
        rng = np.random.default_rng(11)
        pts = _triangle_points(rng, 1000)
        for g in spec.action_matrices():
            for p in pts:
                mods = np.abs(np.linalg.eigvals(jacobian(g, spec.chart, p)))
                assert mods.min() >= lo - 1e-6
                assert mods.max() <= hi + 1e-6

    def test_jacobian_matches_finite_difference(self):
        spec = catalog.get("cubic", alpha=3)
        g = spec.action_matrices()[1]
        p = np.array([0.2, 0.3])
        h = 1e-6
        num = np.column_stack([
            (act(g, spec.chart, p + h * e) - act(g, spec.chart, p - h * e)) / (2 * h)
            for e in np.eye(2)])
        assert jacobian(g, spec.chart, p) == pytest.approx(num, abs=1e-8)

    def test_real_affine_jacobian(self):
        m = matrix([[1, 0, 1], [0, 2, 0], [0, 0, 1]])
        assert jacobian(m, RealAffine(3), [0.5, 0.5]) == pytest.approx(np.diag([1.0, 2.0]))
        assert isinstance(catalog.get("cubic").chart, SimplexChart)
