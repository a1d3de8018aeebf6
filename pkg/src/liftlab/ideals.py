"""Ideal lattice operations: smallest closures, joins, and the explicit
union-of-three-classes join formula with re-evaluable witnesses.

Finite collapse: the join and the sigma-join coincide on a finite universe (an
ideal closed under binary unions is closed under countable ones), so a single
join operation is provided.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Tuple

from .setalg import (
    ENUM_CAP,
    CapExceeded,
    FiniteAlgebra,
    Ideal,
    SetFamily,
    check_cap,
    family_key,
    generated_algebra,
    largest_algebra_member,
    symdiff_closure,
    triple_in_T,
)


def smallest_ideal_closure(seed: SetFamily, cap: int = ENUM_CAP) -> Ideal:
    """Fixpoint closure of seed ∪ {∅} under union and difference."""
    members = set(seed.members)
    members.add(0)
    work = sorted(members, key=family_key)
    while work:
        new: List[int] = []
        for a in work:
            for b in sorted(members, key=family_key):
                for c in (a | b, a & ~b, b & ~a):
                    if c not in members:
                        members.add(c)
                        new.append(c)
        check_cap(len(members), cap, "ideal closure")
        work = new
    return Ideal(seed.universe, members)


# Decomposition atoms are tagged with the class they come from so witnesses can
# be re-derived from the inputs alone.
A1, A2, A3 = "I∩J", "I∖J", "J∖I"
Piece = Tuple[str, int, int]  # (class tag, I member, J member)


def evaluate_piece(piece: Piece) -> int:
    tag, i, j = piece
    if tag == A1:
        return i & j
    if tag == A2:
        return i & ~j
    if tag == A3:
        return j & ~i
    raise ValueError(f"unknown decomposition class {tag!r}")


class JoinResult:
    """Join of two ideals together with, for each member, a representation as a
    finite union of pieces from the three generating classes."""

    __slots__ = ("join", "witness_decomposition")

    def __init__(self, join: Ideal, witness_decomposition: Dict[int, Tuple[Piece, ...]]):
        self.join = join
        self.witness_decomposition = witness_decomposition

    def verify(self) -> bool:
        for member, pieces in self.witness_decomposition.items():
            u = 0
            for p in pieces:
                u |= evaluate_piece(p)
            if u != member:
                return False
        return set(self.witness_decomposition) == set(self.join.members)


def join_ideals(I: Ideal, J: Ideal, cap: int = ENUM_CAP) -> JoinResult:
    """Smallest ideal-of-some-algebra containing both, by the structure
    formula: finite unions over {I∩J}, {I∖J}, {J∖I}."""
    if I.universe != J.universe:
        raise ValueError("ideals live on different universes")
    pieces: Dict[int, Piece] = {}
    for i in I:
        for j in J:
            for piece in ((A1, i, j), (A2, i, j), (A3, i, j)):
                v = evaluate_piece(piece)
                if v not in pieces:
                    pieces[v] = piece
    decomp: Dict[int, Tuple[Piece, ...]] = {v: (p,) for v, p in pieces.items()}
    # close under binary unions, merging parent decompositions
    frontier = list(decomp)
    while frontier:
        new: List[int] = []
        for a in frontier:
            for b in sorted(decomp, key=family_key):
                u = a | b
                if u not in decomp:
                    decomp[u] = tuple(dict.fromkeys(decomp[a] + decomp[b]))
                    new.append(u)
        check_cap(len(decomp), cap, "ideal join")
        frontier = new
    join = Ideal(I.universe, decomp.keys())
    return JoinResult(join, decomp)


class JoinInclusionReport:
    __slots__ = (
        "b_intersection_included",
        "b_witness",
        "triple_preserved",
        "triple_witness",
        "iterated_preconditions",
        "iterated_family",
        "joint_family",
        "iterated_symdiff_equal",
        "iterated_witness",
    )

    def __init__(self):
        self.b_intersection_included = True
        self.b_witness: Optional[int] = None
        self.triple_preserved: Optional[bool] = None
        self.triple_witness: Optional[Tuple[int, int]] = None
        self.iterated_preconditions = False
        self.iterated_family: Optional[SetFamily] = None
        self.joint_family: Optional[SetFamily] = None
        self.iterated_symdiff_equal: Optional[bool] = None
        self.iterated_witness: Optional[int] = None

    def all_pass(self) -> bool:
        ok = self.b_intersection_included and self.triple_preserved in (True, None)
        if self.iterated_preconditions:
            ok = ok and self.iterated_symdiff_equal is True
        return ok


def join_inclusion_checks(
    I: Ideal, J: Ideal, sigma: FiniteAlgebra, cap: int = ENUM_CAP
) -> JoinInclusionReport:
    """Containment facts about the join.

    Checks B_I ∩ B_J ⊆ B_{I∨J} (exhaustively under the cap) and preservation
    of the triple class.  The iterated closure (Σ_I)_J = {(A△I')△J'} is always
    computed as a plain family and compared with the closure by the join; the
    comparison is a theorem only when (X,Σ,I) and (X,Σ_I,J) are both in the
    class, reported via iterated_preconditions.
    """
    report = JoinInclusionReport()
    universe = sigma.universe
    K = join_ideals(I, J, cap).join

    check_cap(1 << universe.size, cap, "B-family scan")
    for m in range(universe.full + 1):
        if (
            largest_algebra_member(I, m)
            and largest_algebra_member(J, m)
            and not largest_algebra_member(K, m)
        ):
            report.b_intersection_included = False
            report.b_witness = m
            break

    tI = triple_in_T(sigma, I, cap)
    tJ = triple_in_T(sigma, J, cap)
    if tI and tJ:
        tK = triple_in_T(sigma, K, cap)
        report.triple_preserved = bool(tK)
        report.triple_witness = tK.witness

    first = symdiff_closure(sigma, I, cap)
    check_cap(len(first.family) * len(J), cap, "iterated closure")
    iterated = {e ^ j for e in first.family for j in J}
    joint = symdiff_closure(sigma, K, cap)
    report.iterated_family = SetFamily(universe, iterated)
    report.joint_family = joint.family
    report.iterated_symdiff_equal = iterated == set(joint.family.members)
    if not report.iterated_symdiff_equal:
        diff = iterated ^ set(joint.family.members)
        report.iterated_witness = min(diff, key=family_key)
    if tI and first.is_algebra:
        # the second triple of the iterated-closure theorem lives over the
        # first closure, not over sigma
        inner = generated_algebra(first.family)
        report.iterated_preconditions = bool(triple_in_T(inner, J, cap))
    return report
