import random

import pytest
from hypothesis import given, settings, strategies as st

from superreg.convcode import (
    ConvCode,
    Hbar_matrix,
    code_from_dict,
    code_to_dict,
    column_distance,
    distance_profile,
    hankel_system,
    is_mdp,
    laurent_expansion,
    mdp_construct,
    random_hbar_blocks,
    singleton_bound,
    sliding_parity,
)
from superreg.errors import BudgetExceeded, Inconsistent, ParamsInvalid, SingularA0
from superreg.finite_field import field_for_degree, make_field, pow2exp
from superreg.linalg import Matrix, PolyMatrix
from superreg.superregular import CodeParams, build_Hbar_blocks

from conftest import SMALL_FIELDS
from oracles import column_distance_bruteforce, table_field

EXAMPLE_MODULUS = tuple(1 if i in (0, 36, 37, 39, 1024) else 0 for i in range(1025))


def _h_blocks(code, j):
    return [code.H_(i).raw_rows() for i in range(j + 1)]


def _draw_code(params, ctx, seed):
    rng = random.Random(seed)
    while True:
        try:
            return mdp_construct(params, random_hbar_blocks(params, ctx, rng))
        except Inconsistent:
            continue


def test_singleton_bound():
    assert [singleton_bound(CodeParams(2, 1, 1), j) for j in range(3)] == [2, 3, 4]
    assert singleton_bound(CodeParams(5, 2, 3), 2) == 10


def test_constructed_code_reproduces_hbar():
    params = CodeParams(3, 2, 2)
    f = field_for_degree(2, 9)
    Hbar = build_Hbar_blocks(params, f)
    code = mdp_construct(params, Hbar)
    assert code.A_(0) == Matrix.identity(f, 1)
    assert laurent_expansion(code, params.L) == Hbar
    assert code.A.degree == params.nu and code.B.degree == params.nu


def test_hankel_system_layout():
    params = CodeParams(3, 2, 2)  # nu = 2, L = 3
    f = make_field(5, (2, 1))
    Hbar = [Matrix.from_rows(f, [[i + 1, i + 2]]) for i in range(4)]
    M, R = hankel_system(params, Hbar)
    # unknowns [A_2 A_1]; one equation block for Hbar_3
    assert M.shape == (2, 2) and R.shape == (1, 2)
    assert M.raw_rows() == [Hbar[1].raw_rows()[0], Hbar[2].raw_rows()[0]]
    assert R == -Hbar[3]


def test_example_code_over_example_field():
    params = CodeParams(5, 2, 3)
    f = make_field(2, EXAMPLE_MODULUS)
    Hbar = build_Hbar_blocks(params, f)
    code = mdp_construct(params, Hbar)
    A1 = code.A_(1)
    assert A1 @ Hbar[1] == -Hbar[2]
    assert code.B_(0) == Hbar[0]
    assert code.B_(1) == Hbar[1] + A1 @ Hbar[0]
    assert laurent_expansion(code, 2) == Hbar

    def a(*exps):
        out = f.one
        for e in exps:
            out = out * pow2exp(f, e)
        return out

    D = a(3, 5) - a(5)
    # Cramer's rule on the first two unknowns of each row; the third is free (zero)
    for row in range(3):
        g1, g2 = a(row + 6), a(row + 7)
        assert A1[row, 0] == (a(4) * g2 - a(5) * g1) / D
        assert A1[row, 1] == (a(4) * g1 - a(3) * g2) / D
        assert A1[row, 2] == f.zero
    # spot values written with explicit exponents
    assert A1[0, 0] == (-a(5, 6) + a(4, 7)) / D
    assert A1[2, 1] == (a(4, 8) - a(3, 9)) / D
    assert is_mdp(code).is_mdp


def test_mdp_construct_rejects_bad_input(gf):
    params = CodeParams(2, 1, 1)
    f = gf("GF4")
    with pytest.raises(ParamsInvalid):
        mdp_construct(params, [Matrix.identity(f, 1)] * 2)


def test_singular_a0_rejected(gf):
    f = gf("GF4")
    params = CodeParams(2, 1, 1)
    z = Matrix.zeros(f, 1, 1)
    code = ConvCode(params, f, PolyMatrix((z, z)), PolyMatrix((Matrix.identity(f, 1), z)))
    with pytest.raises(SingularA0):
        laurent_expansion(code, 2)


def test_general_invertible_a0(gf):
    f = gf("GF5")
    params = CodeParams(2, 1, 1)
    two = Matrix.from_rows(f, [[2]])
    code = ConvCode(params, f, PolyMatrix((two, Matrix.from_rows(f, [[1]]))),
                    PolyMatrix((Matrix.from_rows(f, [[3]]), Matrix.from_rows(f, [[4]]))))
    H = laurent_expansion(code, 3)
    # 2 h0 = 3, 2 h1 + h0 = 4, 2 h2 + h1 = 0
    assert H[0] == Matrix.from_rows(f, [[4]])
    assert H[1] == Matrix.from_rows(f, [[0]])
    assert H[2] == Matrix.from_rows(f, [[0]])


def test_211_gf4_code_is_mdp_with_full_profile(gf):
    f = gf("GF4")
    params = CodeParams(2, 1, 1)
    code = mdp_construct(params, build_Hbar_blocks(params, f))
    a = f.alpha
    assert code.A_(1) == Matrix.from_rows(f, [[a * a]])
    assert code.B_(0) == Matrix.from_rows(f, [[a]]) and code.B_(1) == Matrix.from_rows(f, [[a]])
    prof = distance_profile(code)
    assert prof.distances == [2, 3, 4]
    assert all(prof.bound_met) and prof.is_prefix


@pytest.mark.parametrize("fname,params,seed,j", [
    ("GF4", (2, 1, 1), 1, 2),
    ("GF4", (2, 1, 1), 2, 2),
    ("GF4", (2, 1, 1), 3, 2),
    ("GF3", (2, 1, 1), 4, 2),
    ("GF5", (2, 1, 1), 5, 1),
    ("GF2", (3, 2, 2), 6, 2),
    ("GF4", (3, 2, 2), 7, 1),
    ("GF3", (3, 1, 2), 8, 1),
])
def test_column_distance_matches_bruteforce(fname, params, seed, j):
    params = CodeParams(*params)
    p, mod = SMALL_FIELDS[fname]
    f = make_field(p, mod)
    code = _draw_code(params, f, seed)
    oracle = table_field(p, mod)
    assert column_distance(code, j).distance == column_distance_bruteforce(oracle, _h_blocks(code, j), params.n, j)


def test_witness_is_a_truncated_codeword(gf):
    f = gf("GF8")
    params = CodeParams(3, 2, 2)
    code = _draw_code(params, f, 11)
    cd = column_distance(code, 2)
    vec = Matrix.from_rows(f, [[x] for x in cd.witness])
    assert (sliding_parity(code, 2) @ vec).is_zero()
    assert sum(1 for x in cd.witness if x) == cd.distance
    assert any(cd.witness[:3])


@settings(max_examples=25)
@given(seed=st.integers(0, 10**6), fname=st.sampled_from(["GF3", "GF4", "GF5", "GF8"]))
def test_profile_properties(seed, fname, gf):
    params = CodeParams(2, 1, 1)
    code = _draw_code(params, gf(fname), seed)
    prof = distance_profile(code)
    d = prof.distances
    assert all(x <= y for x, y in zip(d, d[1:]))
    assert all(x <= singleton_bound(params, j) for j, x in enumerate(d))
    assert prof.is_prefix


@settings(max_examples=30)
@given(seed=st.integers(0, 10**6), fname=st.sampled_from(["GF4", "GF8", "GF5"]))
def test_mdp_methods_agree(seed, fname, gf):
    params = CodeParams(2, 1, 1)
    code = _draw_code(params, gf(fname), seed)
    assert is_mdp(code, "distance").is_mdp == is_mdp(code, "superregular").is_mdp


def test_distance_budget_enforced():
    params = CodeParams(5, 2, 3)
    f = make_field(2, EXAMPLE_MODULUS)
    code = mdp_construct(params, build_Hbar_blocks(params, f))
    with pytest.raises(BudgetExceeded) as exc:
        column_distance(code, 2)
    assert exc.value.required == 2 ** (1024 * 6)
    with pytest.raises(BudgetExceeded):
        is_mdp(code, "distance", budget=10**6)


def test_unknown_method(gf):
    params = CodeParams(2, 1, 1)
    code = mdp_construct(params, build_Hbar_blocks(params, gf("GF4")))
    with pytest.raises(ValueError):
        is_mdp(code, "guess")


def test_code_json_round_trip(gf):
    f = gf("GF9")
    params = CodeParams(3, 2, 2)
    code = _draw_code(params, f, 3)
    back = code_from_dict(code_to_dict(code))
    assert back == code
    assert Hbar_matrix(back) == Hbar_matrix(code)


@pytest.mark.parametrize("nkd", [(2, 1, 2), (3, 1, 4), (4, 2, 4), (4, 3, 2), (5, 2, 6), (5, 3, 4), (6, 4, 4)])
def test_hankel_system_solvable_for_alpha_construction(nkd):
    params = CodeParams(*nkd)
    for N in (8, 16):
        f = field_for_degree(2, N)
        Hbar = build_Hbar_blocks(params, f)
        code = mdp_construct(params, Hbar)
        assert laurent_expansion(code, params.L) == Hbar
