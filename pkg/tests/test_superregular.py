from itertools import combinations

import pytest
from hypothesis import given, strategies as st
from sympy import binomial, catalan

from superreg.errors import NotFound, OrderTooLarge, ParamsInvalid, PatternMismatch
from superreg.finite_field import field_for_degree, make_field
from superreg.linalg import Matrix, det, submatrix
from superreg.superregular import (
    BandPattern,
    CodeParams,
    Hbar_exponents,
    Hbar_pattern,
    T_exponents,
    T_pattern,
    binomial_toeplitz,
    build_Hbar_blocks,
    build_T,
    build_T_row,
    build_block_toeplitz,
    check_superregular,
    corollary_field_bound,
    enumerate_nontrivial_minors,
    gl_generic_bound,
    hutchinson_bound,
    is_trivial_minor_oracle,
    min_field_search,
    refined_bound_exact,
    refined_bound_from_entries,
    theorem_field_bound,
    unique_max_exponent_check,
    ExponentMatrix,
    _term_exponents,
)

from oracles import minor_is_trivial

EXAMPLE_MODULUS = tuple(1 if i in (0, 36, 37, 39, 1024) else 0 for i in range(1025))


def _pattern_matrix(pattern):
    """0/1 matrix with ones exactly on the allowed positions."""
    return [[1 if pattern.allows(i, j) else 0 for j in range(pattern.cols)] for i in range(pattern.rows)]


def _oracle_nontrivial(pattern, max_order):
    ones = _pattern_matrix(pattern)
    out = set()
    for r in range(1, max_order + 1):
        for rows in combinations(range(pattern.rows), r):
            for cols in combinations(range(pattern.cols), r):
                if not minor_is_trivial([[ones[i][j] for j in cols] for i in rows]):
                    out.add((rows, cols))
    return out


def test_code_params_derived_values():
    p = CodeParams(5, 2, 3)
    assert (p.M, p.nu, p.L) == (3, 1, 2)
    assert CodeParams(2, 1, 1).as_dict() == {"n": 2, "k": 1, "delta": 1, "M": 1, "L": 2, "nu": 1}
    assert (CodeParams(3, 2, 2).M, CodeParams(3, 2, 2).L) == (2, 3)
    with pytest.raises(ParamsInvalid):
        CodeParams(5, 2, 4)
    with pytest.raises(ParamsInvalid):
        CodeParams(2, 2, 1)


def test_band_pattern_validation():
    with pytest.raises(ValueError):
        BandPattern(2, 2, (2, 1))
    assert BandPattern.block_lower(1, 2, 3).band == (2, 4, 6)
    assert BandPattern.lower_triangular(3).band == (1, 2, 3)


@st.composite
def band_patterns(draw):
    rows = draw(st.integers(1, 6))
    cols = draw(st.integers(1, 6))
    band = sorted(draw(st.lists(st.integers(0, cols), min_size=rows, max_size=rows)))
    return BandPattern(rows, cols, tuple(band))


@given(band_patterns())
def test_band_criterion_matches_permutation_oracle(pattern):
    top = min(pattern.rows, pattern.cols, 4)
    got = list(enumerate_nontrivial_minors(pattern, top))
    assert len(got) == len(set(got))
    assert set(got) == _oracle_nontrivial(pattern, top)


@given(band_patterns())
def test_enumeration_order_is_canonical(pattern):
    got = list(enumerate_nontrivial_minors(pattern))
    keys = [(len(r), r, c) for r, c in got]
    assert keys == sorted(keys)


def test_matching_oracle_agrees_with_permutation_oracle():
    f = make_field(3, (1, 1))
    for bits in range(2 ** 9):
        vals = [(bits >> t) & 1 for t in range(9)]
        m = Matrix(f, 3, 3, vals)
        assert is_trivial_minor_oracle(m) == minor_is_trivial(m.raw_rows())
    with pytest.raises(OrderTooLarge):
        is_trivial_minor_oracle(Matrix.identity(f, 8))


def test_example_hbar_nontrivial_minor_count():
    pattern = Hbar_pattern(CodeParams(5, 2, 3))
    assert (pattern.rows, pattern.cols) == (9, 6)
    minors = list(enumerate_nontrivial_minors(pattern))
    assert len(minors) == 2884
    all_square = sum(len(list(combinations(range(9), r))) * len(list(combinations(range(6), r))) for r in range(1, 7))
    assert all_square == 5004


def test_example_hbar_count_matches_oracle():
    pattern = Hbar_pattern(CodeParams(5, 2, 3))
    assert len(_oracle_nontrivial(pattern, 6)) == 2884


def test_T_row_entries_are_double_exponential():
    params = CodeParams(3, 2, 2)
    f = field_for_degree(2, 8)
    blocks, exps = build_T_row(params, f)
    assert len(blocks) == params.L + 1
    for l, T in enumerate(blocks):
        for a in range(2):
            for b in range(2):
                assert T[a, b] == f.alpha ** (2 ** (a + b + 2 * l))
                assert exps.get(a, l * 2 + b) == a + b + 2 * l


def test_hbar_blocks_are_corners_of_T_blocks():
    params = CodeParams(5, 2, 3)
    f = field_for_degree(2, 12)
    T_blocks, _ = build_T_row(params, f)
    Hbar = build_Hbar_blocks(params, f)
    for T, H in zip(T_blocks, Hbar):
        assert H.shape == (3, 2)
        assert H == submatrix(T, range(3), range(2))
    e = Hbar_exponents(params)
    assert e.e_max == 9
    assert e.get(8, 0) == 2 + 1 * 0 + 3 * 2


def test_block_toeplitz_layout():
    f = make_field(5, (2, 1))
    blocks = [Matrix.from_rows(f, [[v]]) for v in (1, 2, 3)]
    assert build_block_toeplitz(blocks) == Matrix.from_rows(f, [[1, 0, 0], [2, 1, 0], [3, 2, 1]])
    assert T_exponents(CodeParams(2, 1, 1)).to_rows() == [[0, None, None], [1, 0, None], [2, 1, 0]]


def test_check_matches_exhaustive_determinants():
    params = CodeParams(3, 2, 2)
    for N in (2, 3, 4):
        f = field_for_degree(2, N)
        m = build_T(params, f)
        pattern = T_pattern(params)
        report = check_superregular(m, pattern, max_order=4, collect_all=True)
        zeros = {
            (r, c) for r, c in enumerate_nontrivial_minors(pattern, 4)
            if det(submatrix(m, r, c)).is_zero()
        }
        assert {(w.rows, w.cols) for w in report.witnesses} == zeros


def test_legacy_binomial_matrix_witnesses():
    assert binomial_toeplitz(3, 7).raw_rows() == [[1, 0, 0], [2, 1, 0], [1, 2, 1]]
    pattern = BandPattern.lower_triangular(3)
    r2 = check_superregular(binomial_toeplitz(3, 2), pattern)
    assert r2.verdict == "not-superregular"
    assert (r2.witness.rows, r2.witness.cols) == ((1,), (0,))
    r3 = check_superregular(binomial_toeplitz(3, 3), pattern)
    assert (r3.witness.rows, r3.witness.cols) == ((1, 2), (0, 1))
    for p in (5, 7):
        assert check_superregular(binomial_toeplitz(3, p), pattern).superregular


def test_pattern_mismatch_detected():
    f = make_field(5, (2, 1))
    m = Matrix.from_rows(f, [[1, 1], [1, 1]])
    with pytest.raises(PatternMismatch):
        check_superregular(m, BandPattern.lower_triangular(2))


def test_incomplete_when_order_capped():
    params = CodeParams(2, 1, 1)
    f = field_for_degree(2, 4)
    report = check_superregular(build_T(params, f), T_pattern(params), max_order=2)
    assert report.verdict == "incomplete" and not report.superregular
    assert report.max_order_checked == 2


def test_parallel_scan_matches_serial():
    params = CodeParams(3, 2, 2)
    for N in (3, 9):
        f = field_for_degree(2, N)
        m, pattern = build_T(params, f), T_pattern(params)
        serial = check_superregular(m, pattern)
        parallel = check_superregular(m, pattern, workers=2)
        assert serial.verdict == parallel.verdict
        assert serial.minors_checked == parallel.minors_checked
        assert (serial.witness is None) == (parallel.witness is None)
        if serial.witness:
            assert serial.witness.as_dict() == parallel.witness.as_dict()


def test_on_minor_callback_sees_every_minor():
    params = CodeParams(2, 1, 1)
    f = field_for_degree(2, 2)
    seen = []
    report = check_superregular(build_T(params, f), T_pattern(params), on_minor=lambda r, c, ok: seen.append((r, c, ok)))
    assert len(seen) == report.minors_checked == 13
    assert all(ok for _, _, ok in seen)


def test_unique_max_worked_minor():
    # rows {2,3}, cols {1,2} of the 3x3 T for (2,1,1): exponents [[1,0],[2,1]]
    # terms 2^1 + 2^1 = 4 and 2^0 + 2^2 = 5
    exps = T_exponents(CodeParams(2, 1, 1))
    sub = BandPattern(2, 2, (1, 2))
    weights = [[exps.get(i, j) for j in (0, 1)] for i in (1, 2)]
    assert weights == [[1, 0], [2, 1]]
    assert sorted(_term_exponents([[1 << e for e in row] for row in weights])) == [4, 5]
    res = unique_max_exponent_check(T_exponents(CodeParams(2, 1, 1)), T_pattern(CodeParams(2, 1, 1)))
    assert res.ok and res.minors_checked == 13 and res.max_term_exponent == 5
    assert sub.full_order == 2


def test_unique_max_detects_ties():
    # equal exponents on both diagonals give two maximal terms
    exps = ExponentMatrix(2, 2, (1, 1, 1, 1))
    res = unique_max_exponent_check(exps, BandPattern(2, 2, (2, 2)))
    assert not res.ok
    assert res.violation["multiplicity"] == 2


def test_example_hbar_unique_max_below_field_degree():
    params = CodeParams(5, 2, 3)
    res = unique_max_exponent_check(Hbar_exponents(params), Hbar_pattern(params))
    assert res.ok and res.minors_checked == 2884
    assert res.max_term_exponent == 660 < 1024


def test_example_hbar_superregular_over_example_field():
    params = CodeParams(5, 2, 3)
    f = make_field(2, EXAMPLE_MODULUS)
    m = build_block_toeplitz(build_Hbar_blocks(params, f))
    report = check_superregular(m, Hbar_pattern(params))
    assert report.superregular and report.minors_checked == 2884
    assert report.warnings


def test_bounds_values():
    assert [hutchinson_bound(r) for r in range(2, 6)] == [1, 2, 4, 10]
    for r in range(1, 15):
        assert hutchinson_bound(r) == (catalan(r - 1) + binomial(r - 1, (r - 1) // 2)) // 2
    assert theorem_field_bound(CodeParams(2, 1, 1)).degree == 8
    assert theorem_field_bound(CodeParams(3, 2, 2)).degree == 512
    assert theorem_field_bound(CodeParams(5, 2, 3)).degree == 2048
    assert corollary_field_bound(CodeParams(5, 2, 3)) == 12
    assert refined_bound_from_entries(Hbar_exponents(CodeParams(5, 2, 3))) == 1024
    assert refined_bound_exact(Hbar_exponents(CodeParams(5, 2, 3))) == 683
    assert gl_generic_bound(1, 4) == 16
    assert gl_generic_bound(2, 3) == 42  # ceil(8 * 3^1.5) = ceil(41.57)
    with pytest.raises(ValueError):
        hutchinson_bound(0)


def test_min_field_search_binary():
    res = min_field_search(CodeParams(2, 1, 1), 2, 8)
    assert res.N == 2
    assert [t["verdict"] for t in res.tried] == ["not-superregular", "superregular"]


def test_min_field_search_ternary_prime_field_suffices():
    # alpha = 2 in F_3: T = [[2,0,0],[1,2,0],[1,1,2]]; 2x2 minors 2*1-1*1 = 1 etc.
    res = min_field_search(CodeParams(2, 1, 1), 3, 4)
    assert res.N == 1
    f = make_field(3, res.modulus)
    m = build_T(CodeParams(2, 1, 1), f)
    assert m.raw_rows() == [[2, 0, 0], [1, 2, 0], [1, 1, 2]]
    for rows, cols in enumerate_nontrivial_minors(T_pattern(CodeParams(2, 1, 1))):
        assert not det(submatrix(m, rows, cols)).is_zero()


def test_min_field_search_not_found():
    with pytest.raises(NotFound):
        min_field_search(CodeParams(2, 1, 1), 2, 1)
