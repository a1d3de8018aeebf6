"""Algebras, ideals-as-families, the triple class, symmetric-difference closures."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liftlab.setalg import (
    CapExceeded,
    FiniteAlgebra,
    Ideal,
    SetFamily,
    Universe,
    algebra_from_family,
    generated_algebra,
    is_ideal_of_some_algebra,
    largest_algebra_family,
    largest_algebra_member,
    powerset_algebra,
    symdiff_closure,
    triple_in_T,
    trivial_algebra,
    trivial_ideal,
)

from oracles import (
    closure_complement_intersection,
    closure_union_difference,
    is_ideal_family,
    rand_ideal_members,
    rand_partition,
    symdiff_family,
    triple_fails,
)

NAMES = "abcdefgh"


def small_universe(size):
    return Universe(NAMES[:size])


# --------------------------------------------------------------------------
# the four-point instance: two-atom algebra, two-member ideal


@pytest.fixture
def four_point():
    u = Universe("1234")
    alg = FiniteAlgebra(u, [0b0011, 0b1100])  # {1,2}, {3,4}
    ideal = Ideal(u, [0, 0b0101])  # {}, {1,3}
    return u, alg, ideal


def test_four_point_triple_fails(four_point):
    u, alg, ideal = four_point
    tc = triple_in_T(alg, ideal)
    assert not tc
    E, A = tc.witness
    # {1,2} ∩ {1,3} = {1} escapes the ideal
    assert (E, A) == (0b0011, 0b0101)
    assert E in alg and A in ideal and (E & A) not in ideal


def test_four_point_symdiff_is_even_sets(four_point):
    u, alg, ideal = four_point
    sc = symdiff_closure(alg, ideal)
    even = {m for m in range(16) if m.bit_count() % 2 == 0}
    assert set(sc.family.members) == even
    assert len(sc.family) == 8
    assert not sc.is_algebra
    for member, (a, i) in sc.provenance.items():
        assert a in alg and i in ideal and a ^ i == member


def test_four_point_generated_algebra_is_powerset(four_point):
    u, alg, ideal = four_point
    gens = SetFamily(u, list(alg.elements()) + list(ideal))
    g = generated_algebra(gens)
    assert len(g.atoms) == 4
    assert g.element_count() == 16


# --------------------------------------------------------------------------
# structural basics


def test_atoms_sorted_canonically():
    u = Universe("abcd")
    alg = FiniteAlgebra(u, [0b1100, 0b0011])
    assert alg.atoms == (0b0011, 0b1100)
    # cardinality before mask value
    alg2 = FiniteAlgebra(u, [0b1000, 0b0111])
    assert alg2.atoms == (0b1000, 0b0111)


def test_algebra_rejects_bad_partitions():
    u = Universe("abc")
    with pytest.raises(ValueError):
        FiniteAlgebra(u, [0b011, 0b110])  # overlap
    with pytest.raises(ValueError):
        FiniteAlgebra(u, [0b011])  # no cover
    with pytest.raises(ValueError):
        FiniteAlgebra(u, [0b011, 0b100, 0])  # empty atom


def test_membership_and_atoms_inside():
    u = Universe("abcd")
    alg = FiniteAlgebra(u, [0b0011, 0b0100, 0b1000])
    assert 0b0111 in alg and 0b0001 not in alg
    # canonical atom order: {c}, {d}, {a,b}
    assert alg.atoms == (0b0100, 0b1000, 0b0011)
    assert alg.atoms_inside(0b1011) == (1, 2)
    with pytest.raises(ValueError):
        alg.atoms_inside(0b0001)
    assert alg.atom_of_point(1) == 0b0011
    assert powerset_algebra(u).refines(alg)
    assert not alg.refines(powerset_algebra(u))


def test_ideal_validation():
    u = Universe("1234")
    # not downward closed, still an ideal of some algebra
    assert Ideal(u, [0, 0b0101]).members == (0, 0b0101)
    with pytest.raises(ValueError):
        Ideal(u, [0b0101])  # missing the empty set
    with pytest.raises(ValueError):
        Ideal(u, [0, 0b0011, 0b0101])  # union {1,2,3} missing
    assert trivial_ideal(u).members == (0,)


def test_is_ideal_criterion_matches_oracle():
    u = Universe("abcd")
    rng = random.Random(7)
    for _ in range(120):
        members = {0} | {rng.randrange(16) for _ in range(rng.randrange(5))}
        fam = SetFamily(u, members)
        assert is_ideal_of_some_algebra(fam) == is_ideal_family(fam.members)


def test_largest_algebra_family_brute():
    u = Universe("1234")
    ideal = Ideal(u, [0, 0b0101])
    fam = largest_algebra_family(ideal)
    want = {
        m
        for m in range(16)
        if all((m & a) in (0, 0b0101) for a in ideal)
    }
    assert set(fam.members) == want
    # B_I is an algebra containing the ideal members
    assert all(i in fam for i in ideal)
    assert all(u.complement(m) in fam for m in fam)
    assert largest_algebra_member(ideal, 0b0101)
    assert not largest_algebra_member(ideal, 0b0001)


def test_cap_guards():
    u = Universe("abcdef")
    alg = powerset_algebra(u)
    with pytest.raises(CapExceeded):
        list(alg.elements(cap=10))
    with pytest.raises(CapExceeded):
        symdiff_closure(alg, trivial_ideal(u), cap=10)


def test_triple_beyond_cap_uses_atoms(four_point):
    # atom-only route must agree with the exhaustive one on this instance
    u, alg, ideal = four_point
    assert triple_in_T(alg, ideal, cap=2).ok == triple_in_T(alg, ideal).ok


def test_trivial_algebra_and_universe_helpers():
    u = Universe("ab")
    assert trivial_algebra(u).atoms == (0b11,)
    assert u.subset(["a"]) == 1
    assert u.points(0b10) == ("b",)
    assert u.set_str(0b11) == "{a,b}"
    assert u.complement(0b01) == 0b10
    with pytest.raises(ValueError):
        u.check(4)
    with pytest.raises(KeyError):
        u.index("z")
    with pytest.raises(ValueError):
        Universe("aa")


# --------------------------------------------------------------------------
# randomized cross-checks against the brute-force oracles


@given(st.integers(0, 2**32), st.integers(2, 5))
@settings(max_examples=60, deadline=None)
def test_triple_and_symdiff_match_oracle(seed, size):
    rng = random.Random(seed)
    u = small_universe(size)
    alg = FiniteAlgebra(u, rand_partition(rng, size))
    ideal = Ideal(u, rand_ideal_members(rng, u.full))
    elements = list(alg.elements())

    tc = triple_in_T(alg, ideal)
    assert tc.ok == (triple_fails(elements, ideal.members) is None)
    if not tc.ok:
        E, A = tc.witness
        assert E in alg and A in ideal and (E & A) not in ideal

    sc = symdiff_closure(alg, ideal)
    want = symdiff_family(elements, ideal.members)
    assert set(sc.family.members) == set(want)
    for member, (a, i) in sc.provenance.items():
        assert a ^ i == member and a in alg and i in ideal
    members = set(sc.family.members)
    closed = all(u.complement(m) in members for m in members) and all(
        (m | n) in members for m in members for n in members
    )
    assert sc.is_algebra == closed
    if tc.ok:
        # inside the triple class the closure is the generated algebra
        assert sc.is_algebra
        gen = generated_algebra(SetFamily(u, list(elements) + list(ideal)))
        assert members == set(gen.elements())


@given(st.integers(0, 2**32), st.integers(1, 5), st.integers(0, 3))
@settings(max_examples=60, deadline=None)
def test_generated_algebra_matches_closure(seed, size, n_gens):
    rng = random.Random(seed)
    u = small_universe(size)
    gens = SetFamily(u, [rng.randrange(u.full + 1) for _ in range(n_gens)])
    alg = generated_algebra(gens)
    assert set(alg.elements()) == closure_complement_intersection(u.full, gens.members)
    assert sum(a.bit_count() for a in alg.atoms) == size
    # atoms are the minimal nonempty members
    for a in alg.atoms:
        assert a in alg
        for sub in range(1, a):
            if sub & a == sub and sub != a:
                assert sub not in alg


@given(st.integers(0, 2**32), st.integers(2, 5))
@settings(max_examples=40, deadline=None)
def test_algebra_from_family_round_trip(seed, size):
    rng = random.Random(seed)
    u = small_universe(size)
    alg = FiniteAlgebra(u, rand_partition(rng, size))
    back = algebra_from_family(alg.element_family())
    assert back == alg
    with pytest.raises(ValueError):
        algebra_from_family(SetFamily(u, [0b01]))
