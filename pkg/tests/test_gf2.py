import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bvkey import gf2
from bvkey.gf2 import (AffineSolutionSet, BitVec, EnumerationCapError, WidthError, dot,
                       enumerate_solutions, intersect_affine, intersect_tagged,
                       solve_affine_system)

from oracles import brute_solutions, naive_tagged_intersection, popparity


def test_dot_examples():
    assert dot(BitVec(3, 0b101), BitVec(3, 0b101)) == 0
    assert dot(BitVec(3, 0b011), BitVec(3, 0b110)) == 1
    for x in range(8):
        assert dot(BitVec(3, x), BitVec(3, 0)) == 0


def test_dot_width_mismatch():
    with pytest.raises(WidthError):
        dot(BitVec(3, 1), BitVec(4, 1))
    with pytest.raises(WidthError):
        BitVec(3, 1) ^ BitVec(2, 1)
    with pytest.raises(WidthError):
        dot(0b1000, 1, width=3)


def test_bitvec_basics():
    v = BitVec.from_bits([1, 0, 1])
    assert v == BitVec(3, 0b101)
    assert [v[j] for j in range(3)] == [1, 0, 1]
    assert v.to_bits() == [1, 0, 1]
    assert str(v) == "101"
    assert (v ^ BitVec(3, 0b001)).bits == 0b100
    with pytest.raises(ValueError):
        BitVec(2, 4)


def test_empty_system_is_full_space():
    S = solve_affine_system([], 3)
    assert S.particular == 0
    assert sorted(S.basis) == [0b001, 0b010, 0b100]
    assert enumerate_solutions(S).tolist() == list(range(8))


def test_single_equation_example():
    S = solve_affine_system([(0b011, 0)], 3)
    assert enumerate_solutions(S).tolist() == [0b000, 0b011, 0b100, 0b111]
    assert enumerate_solutions(S).tolist() == brute_solutions([(0b011, 0)], 3)


def test_contradiction_is_inconsistent():
    S = solve_affine_system([(0b001, 0), (0b001, 1)], 3)
    assert not S.consistent
    assert S.size == 0
    assert enumerate_solutions(S).size == 0


def test_zero_equation_with_rhs_one_is_inconsistent():
    assert not solve_affine_system([(0, 1)], 4).consistent
    assert solve_affine_system([(0, 0)], 4).size == 16


def test_enumerate_examples():
    assert enumerate_solutions(AffineSolutionSet.full_space(2)).tolist() == [0, 1, 2, 3]
    S = AffineSolutionSet(3, 0b100, (0b011,))
    assert enumerate_solutions(S).tolist() == [0b100, 0b111]
    assert enumerate_solutions(AffineSolutionSet.empty(3)).tolist() == []


def test_enumeration_cap():
    S = AffineSolutionSet.full_space(12)
    with pytest.raises(EnumerationCapError) as e:
        enumerate_solutions(S, cap=1 << 10)
    assert e.value.dim == 12


def test_duplicates_harmless():
    eqs = [(0b0110, 1)] * 5 + [(0b1001, 0)] * 3
    S = solve_affine_system(eqs, 4)
    assert S.rank == 2
    assert enumerate_solutions(S).tolist() == brute_solutions(eqs, 4)


def _random_system(rng, k, p):
    ws = rng.integers(0, 1 << k, size=p)
    rs = rng.integers(0, 2, size=p)
    return [(int(w), int(r)) for w, r in zip(ws, rs)]


@pytest.mark.parametrize("k", range(1, 11))
def test_solver_matches_brute_force(k):
    rng = np.random.default_rng(100 + k)
    for _ in range(40):
        p = int(rng.integers(0, 2 * k + 2))
        eqs = _random_system(rng, k, p)
        # half the systems are made consistent by planting a solution
        if rng.random() < 0.5:
            x0 = int(rng.integers(0, 1 << k))
            eqs = [(w, popparity(w & x0)) for w, _ in eqs]
        S = solve_affine_system(eqs, k)
        assert enumerate_solutions(S).tolist() == brute_solutions(eqs, k)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 12).flatmap(
    lambda k: st.tuples(st.just(k), st.lists(st.tuples(st.integers(0, (1 << k) - 1), st.integers(0, 1)),
                                             max_size=16))))
def test_soundness_and_rank_law(case):
    k, eqs = case
    S = solve_affine_system(eqs, k)
    if not S.consistent:
        if k <= 8:
            assert brute_solutions(eqs, k) == []
        return
    sols = enumerate_solutions(S)
    assert sols.size == 1 << (k - S.rank)
    assert np.unique(sols).size == sols.size
    for x in sols[:256]:
        assert all(popparity(int(x) & w) == r for w, r in eqs)
        assert int(x) in S
    # the basis is independent: re-eliminating it gives full rank
    assert gf2.rank(S.basis, k) == len(S.basis)


def test_intersect_tagged_single_family():
    A0 = solve_affine_system([(0b11, 0)], 2)
    A1 = solve_affine_system([(0b11, 1)], 2)
    pts, tags = intersect_tagged([(A0, A1)])
    assert set(zip(pts.tolist(), tags.tolist())) == {(0, 0), (3, 0), (1, 1), (2, 1)}


def test_intersect_tagged_full_and_empty():
    k, n = 3, 3
    fam = [(AffineSolutionSet.full_space(k), AffineSolutionSet.empty(k))] * n
    pts, tags = intersect_tagged(fam)
    assert pts.tolist() == list(range(8))
    assert set(tags.tolist()) == {0}


def _sets(S):
    return set(enumerate_solutions(S).tolist())


@pytest.mark.parametrize("seed", range(30))
def test_intersect_tagged_matches_naive(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 9))
    n = int(rng.integers(1, 5))
    fams = []
    for _ in range(n):
        ws = [int(w) for w in rng.integers(0, 1 << k, size=int(rng.integers(0, k)))]
        fams.append((solve_affine_system([(w, 0) for w in ws], k),
                     solve_affine_system([(w, 1) for w in ws], k)))
    pts, tags = intersect_tagged(fams)
    got = set(zip(pts.tolist(), tags.tolist()))
    assert len(got) == pts.size
    assert got == naive_tagged_intersection([(_sets(a), _sets(b)) for a, b in fams])
    # brute-force membership scan over all 2^k vectors
    scan = set()
    for a in range(1 << k):
        for tag in range(1 << n):
            if all(a in (A1 if (tag >> j) & 1 else A0) for j, (A0, A1) in enumerate(fams)):
                scan.add((a, tag))
    assert got == scan


def test_empty_system_records_both_tags():
    k = 2
    fam = [(solve_affine_system([], k, tag=0), solve_affine_system([], k, tag=1))]
    pts, tags = intersect_tagged(fam)
    assert pts.size == 8
    assert set(zip(pts.tolist(), tags.tolist())) == {(a, t) for a in range(4) for t in (0, 1)}


@pytest.mark.parametrize("seed", range(20))
def test_stacked_intersection_equals_enumerated(seed):
    rng = np.random.default_rng(1000 + seed)
    k = int(rng.integers(2, 11))
    sets = [solve_affine_system([(int(w), 0) for w in rng.integers(0, 1 << k, size=3)], k)
            for _ in range(int(rng.integers(1, 5)))]
    expect = set(range(1 << k))
    for S in sets:
        expect &= _sets(S)
    assert set(enumerate_solutions(intersect_affine(sets)).tolist()) == expect
