from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bvkey import gf2
from bvkey.boolfn import (BooleanFunction, CapError, VectorFunction, agreement_counts, delta_F,
                          delta_f, dump_truth_table, exact_linear_structures, fwht,
                          load_truth_table, sigma_close_structures, support,
                          vector_linear_structures, walsh_matrix, walsh_spectrum)

from oracles import (brute_counts, brute_delta, brute_sigma_close, brute_structures,
                     direct_walsh, random_planted_vector_function)

AND2 = BooleanFunction(2, [0, 0, 0, 1])


def random_f(rng, k):
    return BooleanFunction(k, rng.integers(0, 2, size=1 << k))


tables = st.integers(1, 8).flatmap(
    lambda k: st.lists(st.integers(0, 1), min_size=1 << k, max_size=1 << k).map(
        lambda t: BooleanFunction(k, t)))


def test_walsh_examples():
    assert walsh_spectrum(BooleanFunction.linear(2, 0b10)).coeffs.tolist() == [0, 0, 4, 0]
    assert walsh_spectrum(BooleanFunction.constant(2, 0)).coeffs.tolist() == [4, 0, 0, 0]
    assert walsh_spectrum(AND2).coeffs.tolist() == [2, 2, 2, -2]
    assert direct_walsh(AND2.table).tolist() == [2, 2, 2, -2]


def test_support_examples():
    assert support(BooleanFunction.linear(4, 0b1011)).tolist() == [0b1011]
    assert support(AND2).tolist() == [0, 1, 2, 3]
    assert support(BooleanFunction.constant(3, 1)).tolist() == [0]


@settings(max_examples=150, deadline=None)
@given(tables)
def test_parseval_and_congruence(f):
    c = walsh_spectrum(f).coeffs
    assert int(np.sum(c.astype(object) ** 2)) == 4**f.k
    assert walsh_spectrum(f).parseval_ok()
    assert np.all(np.abs(c) <= 1 << f.k)
    assert np.all((c - (1 << f.k)) % 2 == 0)


@pytest.mark.parametrize("k", range(1, 11))
def test_transform_involution(k):
    rng = np.random.default_rng(k)
    v = 1 - 2 * rng.integers(0, 2, size=1 << k)
    assert np.array_equal(fwht(fwht(v)), v << k)


def test_walsh_matrix_matches_components():
    rng = np.random.default_rng(3)
    F = VectorFunction(5, 3, rng.integers(0, 8, size=32))
    W = walsh_matrix(F)
    for j in range(3):
        assert np.array_equal(W[:, j], walsh_spectrum(F.component(j)).coeffs)


def test_structures_examples():
    S = exact_linear_structures(BooleanFunction.linear(2, 0b11))
    assert S.u0.tolist() == [0b00, 0b11]
    assert S.u1.tolist() == [0b01, 0b10]
    S = exact_linear_structures(AND2)
    assert S.u0.tolist() == [0] and S.u1.tolist() == []
    S = exact_linear_structures(BooleanFunction.constant(3, 1))
    assert S.u0.tolist() == list(range(8)) and S.u1.size == 0


@pytest.mark.parametrize("k", range(2, 11))
def test_spectrum_path_agrees_with_scan(k):
    rng = np.random.default_rng(50 + k)
    for trial in range(100):
        if trial % 2:
            # planted structure so the comparison is not trivially {0}
            f = BooleanFunction(k, random_planted_vector_function(rng, k, 1, int(rng.integers(1, k + 1))))
        else:
            f = random_f(rng, k)
        a = exact_linear_structures(f, "spectrum")
        b = exact_linear_structures(f, "scan")
        assert a.u0.tolist() == b.u0.tolist()
        assert a.u1.tolist() == b.u1.tolist()
        if k <= 7:
            ref = brute_structures(f.table)
            assert set(a.u0.tolist()) == ref.get(0, set())
            assert set(a.u1.tolist()) == ref.get(1, set())


@settings(max_examples=100, deadline=None)
@given(tables)
def test_structure_subspace_and_coset(f):
    S = exact_linear_structures(f)
    u0 = set(S.u0.tolist())
    assert 0 in u0
    assert all(a ^ b in u0 for a in u0 for b in u0)
    u1 = set(S.u1.tolist())
    if u1:
        a1 = next(iter(u1))
        assert u1 == {a1 ^ b for b in u0}


def test_vector_structures_examples():
    ident = VectorFunction(3, 3, np.arange(8))
    U = vector_linear_structures(ident)
    assert {alpha: arr.tolist() for alpha, arr in U.classes.items()} == {a: [a] for a in range(8)}
    const = VectorFunction(3, 2, np.full(8, 2))
    assert vector_linear_structures(const).u0.tolist() == list(range(8))


@pytest.mark.parametrize("seed", range(25))
def test_vector_structures_match_scan(seed):
    rng = np.random.default_rng(seed)
    k, n = 4, 3
    table = random_planted_vector_function(rng, k, n, int(rng.integers(0, k + 1)))
    F = VectorFunction(k, n, table)
    expect = {alpha: sorted(v) for alpha, v in brute_structures(table).items()}
    got = {alpha: arr.tolist() for alpha, arr in vector_linear_structures(F).classes.items()}
    assert got == expect
    scan = {alpha: arr.tolist() for alpha, arr in vector_linear_structures(F, "scan").classes.items()}
    assert scan == expect


def test_agreement_counts_match_brute():
    rng = np.random.default_rng(9)
    for k in range(1, 8):
        f = random_f(rng, k)
        assert np.array_equal(agreement_counts(f), brute_counts(f.table))


def test_sigma_close_examples():
    # AND: every nonzero shift agrees on exactly half the inputs
    got = sigma_close_structures(AND2, Fraction(3, 5))
    assert {(a, i) for a, i, _ in got} == {(0, 0)} | {(a, i) for a in (1, 2, 3) for i in (0, 1)}
    assert all(frac == Fraction(1, 2) for a, _, frac in got if a)
    assert sigma_close_structures(AND2, 0.25) == [(0, 0, Fraction(1))]
    assert sigma_close_structures(AND2, 0.6) == sigma_close_structures(AND2, Fraction(3, 5))


def test_sigma_close_strict_inequality():
    # a fraction exactly equal to 1 - sigma must not qualify
    got = sigma_close_structures(AND2, Fraction(1, 2))
    assert got == [(0, 0, Fraction(1))]


@settings(max_examples=80, deadline=None)
@given(tables, st.fractions(min_value=Fraction(1, 64), max_value=1))
def test_sigma_close_matches_brute(f, sigma):
    if sigma <= 0:
        return
    assert sorted(sigma_close_structures(f, sigma)) == brute_sigma_close(f.table, sigma)
    # exact structures always qualify with fraction 1
    S = exact_linear_structures(f)
    close = {(a, i): fr for a, i, fr in sigma_close_structures(f, sigma)}
    for i, arr in ((0, S.u0), (1, S.u1)):
        for a in arr.tolist():
            assert close[(a, i)] == 1


def test_delta_examples():
    assert delta_f(AND2) == Fraction(1, 2)
    assert delta_f(BooleanFunction.linear(5, 0b10110)) == 0
    assert delta_F(VectorFunction(4, 4, np.arange(16))) == 0
    # one AND component alongside a linear one
    F = VectorFunction.from_components([AND2, BooleanFunction.linear(2, 1)])
    assert delta_F(F) == Fraction(1, 2)


@pytest.mark.parametrize("seed", range(10))
def test_delta_matches_definition(seed):
    rng = np.random.default_rng(seed)
    f = random_f(rng, 6)
    assert delta_f(f) == brute_delta(f.table)
    assert delta_f(f) < 1
    F = VectorFunction(4, 2, rng.integers(0, 4, size=16))
    assert delta_F(F) == max(brute_delta(F.component(j).table) for j in range(2))


def test_truth_table_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    for k, n in [(2, 1), (3, 3), (5, 7), (6, 2)]:
        F = VectorFunction(k, n, rng.integers(0, 1 << n, size=1 << k))
        path = tmp_path / f"f{k}{n}.json"
        dump_truth_table(F, path)
        assert load_truth_table(path) == F


def test_truth_table_bit_layout():
    # AND on 2 bits: outputs 0,0,0,1 -> bit 3 of the first byte
    assert dump_truth_table(AND2)["table_hex"] == "08"
    # k=1, n=3: F(0)=0b110, F(1)=0b011 -> stream 0,1,1, 1,1,0 -> 0b011110
    F = VectorFunction(1, 3, [0b110, 0b011])
    assert dump_truth_table(F)["table_hex"] == "1e"


def test_truth_table_rejects_bad_input():
    with pytest.raises(ValueError):
        load_truth_table({"k": 2, "n": 1, "table_hex": "0800"})
    with pytest.raises(ValueError):
        load_truth_table({"k": 2, "n": 1, "table_hex": "f8"})
    with pytest.raises(ValueError):
        load_truth_table({"k": 2, "table_hex": "08"})


def test_caps_and_validation():
    with pytest.raises(CapError):
        BooleanFunction(25, np.zeros(1, np.uint8))
    with pytest.raises(ValueError):
        BooleanFunction(2, [0, 1, 2, 0])
    with pytest.raises(ValueError):
        VectorFunction(2, 1, [0, 1, 2, 0])
    with pytest.raises(ValueError):
        sigma_close_structures(AND2, 0)


def test_spectrum_systems_exact_on_linear():
    a = 0b1101
    f = BooleanFunction.linear(4, a)
    S = exact_linear_structures(f)
    assert set(S.u0.tolist()) == {x for x in range(16) if gf2.dot(x, a) == 0}
    assert set(S.u1.tolist()) == {x for x in range(16) if gf2.dot(x, a) == 1}
