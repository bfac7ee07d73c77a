from fractions import Fraction

import pytest

import oracle
from gasket import catalog
from gasket.enumeration import (
    BudgetExceeded,
    CertificateError,
    GasketSpec,
    count_below,
    count_table,
    dedup_scan,
    fast_coefficient_sample,
    level_sum,
    permutation_certificate,
)
from gasket.enumeration.engine import _compiled_count
from gasket.enumeration.spec import dominant_entry_certificate
from gasket.exact import MaxAbs, matrix, norm_eval

# N(2^p) for p = 1..4, produced by oracle.brute_count and frozen here.
FROZEN = {
    ("C2", ()): [3, 15, 71, 287],
    ("C3", ()): [4, 22, 148, 760],
    ("C4", ()): [5, 37, 293, 2197],
    ("F", ()): [2, 7, 16, 34],
    ("B", ()): [1, 3, 7, 15],
    ("hirst", ()): [0, 1, 3, 8],
    ("apollonian", ()): [3, 23, 159, 987],
    ("sierpinski_complex", (("u", "1/2"),)): [4, 40, 364, 3280],
    ("sierpinski_complex", (("u", "16/25"),)): [11, 118, 1510, 16902],
    ("cubic", (("alpha", "1"),)): [4, 22, 148, 760],
    ("affine", ()): [4, 13, 121, 364],
    ("affine", (("a", "1/4"), ("b", "1/2"))): [4, 28, 163, 907],
    ("affine", (("a", "3/4"), ("b", "1/2"))): [7, 36, 177, 863],
    ("C2alpha", (("alpha", "5/4"),)): [7, 35, 143, 547],
    ("C2alpha", (("alpha", "2"),)): [3, 27, 119, 467],
    ("triangular", ()): [1, 3, 7, 15],
    ("triangular", (("rho", "2,3,5"),)): [1, 3, 7, 16],
}

# largest p at which the oracle is rerun live (kept to a few seconds each)
LIVE_P = {"C3": 3, "C4": 2, "apollonian": 3, "sierpinski_complex": 2, "cubic": 3, "affine": 3}


def _spec(key):
    name, params = key
    return catalog.get(name, **dict(params))


def _oracle(spec, p, **kw):
    rows = spec.name.startswith("C2alpha")
    return oracle.brute_count(spec, p, stop_on_rows=rows, left=rows, **kw)


@pytest.mark.parametrize("key", list(FROZEN), ids=lambda k: k[0] + "".join(f"-{v}" for _, v in k[1]))
def test_counts_match_frozen_oracle_values(key):
    table = count_table(_spec(key), 4)
    assert table.counts == FROZEN[key]
    assert table.certified


@pytest.mark.parametrize("key", list(FROZEN), ids=lambda k: k[0] + "".join(f"-{v}" for _, v in k[1]))
def test_counts_match_live_oracle(key):
    spec = _spec(key)
    pmax = LIVE_P.get(key[0], 4)
    counts = count_table(spec, pmax).counts
    assert counts == [_oracle(spec, p) for p in range(1, pmax + 1)]


def test_reference_rows_prefix():
    assert count_table(catalog.get("C3"), 5).counts == [4, 22, 148, 760, 4594]
    assert count_table(catalog.get("F"), 3).counts == [2, 7, 16]


def test_count_below_examples():
    c2 = catalog.get("C2")
    assert count_below(c2, (2, 1)).count == 3
    assert count_below(c2, (2, 2)).count == 15
    assert count_below(c2, (2, 1), strict=False).count == 7
    assert oracle.brute_count(c2, 1, strict=False) == 7
    assert count_below(catalog.get("hirst"), (2, 2)).count == 1


def test_count_result_fields():
    res = count_below(catalog.get("C2"), (2, 5))
    assert res.certified
    assert res.count <= res.nodes_visited
    assert res.threshold == (Fraction(2), 5)


@pytest.mark.parametrize("name", ["C2", "F", "hirst", "apollonian", "affine"])
def test_nonstrict_dominates_strict(name):
    spec = catalog.get(name)
    strict = count_table(spec, 5).counts
    loose = count_table(spec, 5, strict=False).counts
    assert all(a >= b for a, b in zip(loose, strict))
    assert loose == [oracle.brute_count(spec, p, strict=False) for p in range(1, 4)] + loose[3:]


def test_single_generator():
    gens = (matrix([[2, 0], [0, 1]]),)
    spec = GasketSpec("doubling", gens, certificate=permutation_certificate(gens))
    assert count_table(spec, 4).counts == [1, 2, 3, 4]


@pytest.mark.parametrize("name,p", [("C2", 6), ("C3", 6), ("F", 6), ("hirst", 6),
                                    ("apollonian", 6), ("sierpinski_complex", 4)])
def test_tables_nondecreasing(name, p):
    counts = count_table(catalog.get(name), p).counts
    assert counts == sorted(counts)


@pytest.mark.skipif(_compiled_count is None, reason="compiled kernel not built")
@pytest.mark.parametrize("name,p", [("C2", 8), ("C3", 5), ("F", 9), ("hirst", 9), ("apollonian", 5)])
def test_backends_agree(name, p):
    spec = catalog.get(name)
    fast = count_table(spec, p, backend="compiled")
    slow = count_table(spec, p, backend="python")
    assert fast.rows == slow.rows
    assert fast.nodes_visited == slow.nodes_visited


@pytest.mark.parametrize("threads", [1, 2, 3])
def test_thread_count_does_not_change_counts(threads):
    assert count_table(catalog.get("C3"), 6, threads=threads).counts == \
        [4, 22, 148, 760, 4594, 24646]


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        count_table(catalog.get("C2"), 10, budget=100)
    with pytest.raises(BudgetExceeded):
        level_sum(catalog.get("C2"), 30, 1.0, budget=1000)


def test_missing_certificate_is_refused():
    with pytest.raises(CertificateError):
        count_table(catalog.get("sierpinski_real"), 2)


def test_broken_certificate_aborts():
    # entry (0,0) grows under both generators but is not the largest entry of the second
    gens = (matrix([[2, 0], [0, 1]]), matrix([[1, 0], [0, 3]]))
    spec = GasketSpec("moving", gens, certificate=dominant_entry_certificate(gens, (0, 0)))
    with pytest.raises(CertificateError):
        count_table(spec, 4)


def test_hirst_third_row_dominance():
    spec = catalog.get("hirst")
    curv = spec.norm
    for word, m in oracle.brute_matrices(spec, 6)[1:]:
        for k in range(4):
            col = [m[i][k][0] for i in range(4)]
            assert all(col[2] >= x for x in col), word
        mat = spec.word_matrix(word)
        assert float(norm_eval(curv, mat)) >= float(norm_eval(MaxAbs(), mat))
        assert oracle.curvature(m) ** 2 >= oracle.max_abs_sq(m)


def test_fibonacci_law():
    fib = [0, 1]
    while len(fib) < 25:
        fib.append(fib[-1] + fib[-2])
    b1 = catalog.get("B").generators[0]
    mat = b1
    for k in range(1, 11):
        assert float(norm_eval(MaxAbs(), mat)) == fib[2 * k + 1]
        mat = mat @ b1


class TestLevelSum:
    def test_empty_level(self):
        assert level_sum(catalog.get("C3"), 0, 1.7) == 1.0

    def test_counts_words_at_zero(self):
        assert level_sum(catalog.get("C2"), 2, 0.0) == 4.0

    @pytest.mark.parametrize("k", [1, 3, 6])
    @pytest.mark.parametrize("s", [0.0, 0.5, 1.0, 2.5])
    def test_triangular_product_formula(self, k, s):
        expect = (2 * 2 ** -s) ** k
        assert level_sum(catalog.get("triangular"), k, s) == pytest.approx(expect, rel=1e-12)

    def test_matches_oracle(self):
        spec = catalog.get("C3")
        for k in range(4):
            mats = [m for w, m in oracle.brute_matrices(spec, k) if len(w) == k]
            expect = sum(float(oracle.max_abs_sq(m)) ** -0.75 for m in mats)
            assert level_sum(spec, k, 1.5) == pytest.approx(expect, rel=1e-12)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            level_sum(catalog.get("C2"), -1, 1.0)
        with pytest.raises(ValueError):
            level_sum(catalog.get("C2"), 1, -1.0)


class TestDedup:
    @pytest.mark.parametrize("name,depth", [("C2", 8), ("F", 10), ("C3", 6), ("hirst", 6),
                                            ("apollonian", 6)])
    def test_free_families(self, name, depth):
        assert dedup_scan(catalog.get(name), depth) == 0

    def test_repeated_generator(self):
        g = matrix([[1, 1], [0, 1]])
        assert dedup_scan(GasketSpec("twice", (g, g)), 1) >= 1

    def test_matches_oracle(self):
        spec = catalog.get("triangular", rho="2,3,5")
        mats = oracle.brute_matrices(spec, 4)
        seen = {}
        for _, m in mats:
            seen[m] = seen.get(m, 0) + 1
        expect = sum(c * (c - 1) // 2 for c in seen.values())
        assert dedup_scan(spec, 4) == expect


class TestFastCoefficient:
    @pytest.mark.parametrize("k", [3, 4, 5, 6])
    def test_c2_minimum_is_pinned(self, k):
        # the minimum sits at I = 1^k, J = 12 with ratio (k+2)/(2k), tending to 1/2
        sample = fast_coefficient_sample(catalog.get("C2"), k, k)
        assert sample.exact == Fraction(k + 2, 2 * k)
        assert sample.left == (1,) * k
        assert sample.ratio >= 0.5

    def test_c2_agrees_with_brute_force(self):
        spec = catalog.get("C2")
        mats = dict(oracle.brute_matrices(spec, 4))
        best = min(
            Fraction(oracle.max_abs_sq(oracle.mul(a, b)),
                     oracle.max_abs_sq(a) * oracle.max_abs_sq(b))
            for i, a in mats.items() for j, b in mats.items()
            if len(j) >= 2 and j[0] != j[1])
        assert fast_coefficient_sample(spec, 4, 4).exact ** 2 == best

    def test_golden(self):
        assert fast_coefficient_sample(catalog.get("B"), 6, 6).ratio >= 1

    def test_apollonian(self):
        assert fast_coefficient_sample(catalog.get("apollonian"), 4, 4).ratio >= 0.2

    def test_hirst(self):
        assert fast_coefficient_sample(catalog.get("hirst"), 4, 4).ratio >= 0.25

    def test_depths_validated(self):
        with pytest.raises(ValueError):
            fast_coefficient_sample(catalog.get("C2"), 0, 3)
