"""Finite set-system engine.

Ground sets are small named universes (at most MAX_POINTS points); subsets are
plain int bitmasks with point i stored in bit i.  On a finite universe every
algebra is a sigma-algebra and every ideal closed under binary unions is closed
under countable ones, so the sigma-variants of all notions collapse onto the
finite ones; this is asserted here once and relied on everywhere else.
"""

from __future__ import annotations

from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

MAX_POINTS = 32
ENUM_CAP = 1 << 20


class CapExceeded(Exception):
    """An enumeration would exceed the configured cap."""


def check_cap(count: int, cap: int = ENUM_CAP, what: str = "enumeration") -> None:
    if count > cap:
        raise CapExceeded(f"{what} needs {count} items, cap is {cap}")


def family_key(mask: int) -> Tuple[int, int]:
    """Canonical sort key: cardinality, then mask value (point 0 = lowest bit)."""
    return (mask.bit_count(), mask)


def iter_points(mask: int) -> Iterator[int]:
    while mask:
        lsb = mask & -mask
        yield lsb.bit_length() - 1
        mask ^= lsb


def iter_submasks(mask: int) -> Iterator[int]:
    # standard subset-enumeration trick, ascending would need a sort; order here
    # is the descending (sub-1) chain ending at 0
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


class Universe:
    """Ordered ground set of distinct named points."""

    __slots__ = ("names", "_index")

    def __init__(self, names: Iterable[str]):
        names = tuple(str(n) for n in names)
        if len(names) > MAX_POINTS:
            raise ValueError(f"universe too large: {len(names)} > {MAX_POINTS}")
        if len(set(names)) != len(names):
            raise ValueError("duplicate point names")
        self.names = names
        self._index = {n: i for i, n in enumerate(names)}

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def full(self) -> int:
        return (1 << len(self.names)) - 1

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown point {name!r}") from None

    def subset(self, points: Iterable[str]) -> int:
        m = 0
        for p in points:
            m |= 1 << self.index(p)
        return m

    def points(self, mask: int) -> Tuple[str, ...]:
        self.check(mask)
        return tuple(self.names[i] for i in iter_points(mask))

    def set_str(self, mask: int) -> str:
        return "{" + ",".join(self.points(mask)) + "}"

    def check(self, mask: int) -> int:
        if not 0 <= mask <= self.full:
            raise ValueError(f"mask {mask:#x} out of range for universe of size {self.size}")
        return mask

    def complement(self, mask: int) -> int:
        return self.full & ~self.check(mask)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Universe) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"Universe({list(self.names)!r})"


class SetFamily:
    """Deduplicated family of subsets in canonical order (cardinality, then mask)."""

    __slots__ = ("universe", "members", "_member_set")

    def __init__(self, universe: Universe, members: Iterable[int]):
        ms = sorted({universe.check(m) for m in members}, key=family_key)
        self.universe = universe
        self.members = tuple(ms)
        self._member_set = frozenset(ms)

    def __contains__(self, mask: int) -> bool:
        return mask in self._member_set

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, SetFamily)
            and self.universe == other.universe
            and self.members == other.members
        )

    def __hash__(self) -> int:
        return hash((self.universe, self.members))

    def union_of_members(self) -> int:
        u = 0
        for m in self.members:
            u |= m
        return u

    def __repr__(self) -> str:
        shown = ", ".join(self.universe.set_str(m) for m in self.members[:6])
        more = "" if len(self.members) <= 6 else f", ... ({len(self.members)} sets)"
        return f"SetFamily[{shown}{more}]"


class FiniteAlgebra:
    """Algebra of subsets stored by its atom partition.

    Membership, complements and unions never enumerate elements; element
    enumeration is lazy and cap-guarded.
    """

    __slots__ = ("universe", "atoms", "_atom_at")

    def __init__(self, universe: Universe, atoms: Iterable[int]):
        atoms = sorted({universe.check(a) for a in atoms}, key=family_key)
        cover = 0
        for a in atoms:
            if a == 0:
                raise ValueError("empty atom")
            if cover & a:
                raise ValueError("atoms overlap")
            cover |= a
        if cover != universe.full:
            raise ValueError("atoms do not cover the universe")
        self.universe = universe
        self.atoms = tuple(atoms)
        at = [0] * universe.size
        for k, a in enumerate(atoms):
            for i in iter_points(a):
                at[i] = k
        self._atom_at = tuple(at)

    def atom_index_of_point(self, point: int) -> int:
        return self._atom_at[point]

    def atom_of_point(self, point: int) -> int:
        return self.atoms[self._atom_at[point]]

    def __contains__(self, mask: int) -> bool:
        self.universe.check(mask)
        for a in self.atoms:
            inter = a & mask
            if inter and inter != a:
                return False
        return True

    def element_count(self) -> int:
        return 1 << len(self.atoms)

    def elements(self, cap: int = ENUM_CAP) -> Iterator[int]:
        """All members in canonical order.  Cap-guarded."""
        check_cap(self.element_count(), cap, "algebra element enumeration")
        masks = []
        for sel in range(self.element_count()):
            m = 0
            for k in iter_points(sel):
                m |= self.atoms[k]
            masks.append(m)
        masks.sort(key=family_key)
        return iter(masks)

    def element_family(self, cap: int = ENUM_CAP) -> SetFamily:
        return SetFamily(self.universe, self.elements(cap))

    def atoms_inside(self, mask: int) -> Tuple[int, ...]:
        """Indices of atoms contained in mask; mask must be a member."""
        if mask not in self:
            raise ValueError(f"{self.universe.set_str(mask)} is not a member")
        return tuple(k for k, a in enumerate(self.atoms) if a & mask)

    def refines(self, other: "FiniteAlgebra") -> bool:
        """True iff self contains other (every other-atom is a union of self-atoms)."""
        return all(a in self for a in other.atoms)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FiniteAlgebra)
            and self.universe == other.universe
            and self.atoms == other.atoms
        )

    def __hash__(self) -> int:
        return hash((self.universe, self.atoms))

    def __repr__(self) -> str:
        return f"FiniteAlgebra(atoms={[self.universe.set_str(a) for a in self.atoms]})"


def trivial_algebra(universe: Universe) -> FiniteAlgebra:
    return FiniteAlgebra(universe, [universe.full] if universe.size else [])


def powerset_algebra(universe: Universe) -> FiniteAlgebra:
    return FiniteAlgebra(universe, [1 << i for i in range(universe.size)])


def generated_algebra(generators: SetFamily) -> FiniteAlgebra:
    """Smallest algebra containing the generators.

    Atoms are the nonempty cells of the common refinement by each generator and
    its complement.
    """
    universe = generators.universe
    blocks = [universe.full] if universe.size else []
    for g in generators:
        nxt: List[int] = []
        for b in blocks:
            inside = b & g
            outside = b & ~g
            if inside and outside:
                nxt.append(inside)
                nxt.append(outside)
            else:
                nxt.append(b)
        blocks = nxt
    return FiniteAlgebra(universe, blocks)


def is_ideal_of_some_algebra(family: SetFamily) -> bool:
    """Ideal-of-some-algebra criterion: contains the empty set, closed under
    union and difference."""
    if 0 not in family:
        return False
    for a in family:
        for b in family:
            if (a | b) not in family or (a & ~b) not in family:
                return False
    return True


class Ideal(SetFamily):
    """SetFamily validated as an ideal of some algebra on its universe."""

    __slots__ = ()

    def __init__(self, universe: Universe, members: Iterable[int]):
        super().__init__(universe, members)
        if not is_ideal_of_some_algebra(self):
            raise ValueError("family is not an ideal of any algebra")

    def __repr__(self) -> str:
        shown = ", ".join(self.universe.set_str(m) for m in self.members[:6])
        more = "" if len(self.members) <= 6 else f", ... ({len(self.members)} sets)"
        return f"Ideal[{shown}{more}]"


def trivial_ideal(universe: Universe) -> Ideal:
    return Ideal(universe, [0])


def largest_algebra_member(ideal: Ideal, candidate: int) -> bool:
    """Membership of candidate in B_I, the largest algebra of which the ideal
    is an ideal: candidate ∩ A ∈ I for every A ∈ I."""
    ideal.universe.check(candidate)
    return all((candidate & a) in ideal for a in ideal)


def largest_algebra_family(ideal: Ideal, cap: int = ENUM_CAP) -> SetFamily:
    """B_I materialized by exhaustive scan.  Only viable on small universes."""
    universe = ideal.universe
    check_cap(1 << universe.size, cap, "B_I enumeration")
    return SetFamily(
        universe,
        (m for m in range(universe.full + 1) if largest_algebra_member(ideal, m)),
    )


class TripleCheck:
    """Outcome of the triple-class test, truthy iff the triple qualifies.

    witness, when present, is a pair (E, A) with E in the algebra, A in the
    ideal and E ∩ A outside the ideal.
    """

    __slots__ = ("ok", "witness")

    def __init__(self, ok: bool, witness: Optional[Tuple[int, int]] = None):
        self.ok = ok
        self.witness = witness

    def __bool__(self) -> bool:
        return self.ok

    def __repr__(self) -> str:
        return f"TripleCheck(ok={self.ok}, witness={self.witness})"


def triple_in_T(algebra: FiniteAlgebra, ideal: Ideal, cap: int = ENUM_CAP) -> TripleCheck:
    """Whether (X, algebra, ideal) lies in the triple class: the algebra is
    contained in B_I.

    Tested on every algebra element while the element count is under the cap.
    Beyond the cap only the atoms are tested; that suffices because B_I is
    itself an algebra (unions: (E∪F)∩A = (E∩A)∪(F∩A); complements:
    E^c∩A = A∖(E∩A); both stay in the ideal), so the atoms generate inside it.
    Finite scale makes the sigma-variant identical.
    """
    if algebra.universe != ideal.universe:
        raise ValueError("algebra and ideal live on different universes")
    if algebra.element_count() <= cap:
        candidates: Iterable[int] = algebra.elements(cap)
    else:
        candidates = algebra.atoms
    for e in candidates:
        for a in ideal:
            if (e & a) not in ideal:
                return TripleCheck(False, (e, a))
    return TripleCheck(True)


class SymdiffClosure:
    """The family {A △ I : A ∈ algebra, I ∈ ideal} with provenance.

    provenance maps each member to its canonical decomposition (A, I): the
    first pair in canonical scan order (A ascending, then I ascending).
    is_algebra reports whether the family is closed under complement and union;
    the family is well-defined even when the triple is outside the class, in
    which case it may fail to be an algebra.
    """

    __slots__ = ("family", "is_algebra", "provenance")

    def __init__(self, family: SetFamily, is_algebra: bool, provenance: Dict[int, Tuple[int, int]]):
        self.family = family
        self.is_algebra = is_algebra
        self.provenance = provenance


def symdiff_closure(algebra: FiniteAlgebra, ideal: Ideal, cap: int = ENUM_CAP) -> SymdiffClosure:
    if algebra.universe != ideal.universe:
        raise ValueError("algebra and ideal live on different universes")
    check_cap(algebra.element_count() * max(len(ideal), 1), cap, "symmetric-difference closure")
    universe = algebra.universe
    provenance: Dict[int, Tuple[int, int]] = {}
    for a in algebra.elements(cap):
        for i in ideal:
            e = a ^ i
            if e not in provenance:
                provenance[e] = (a, i)
    family = SetFamily(universe, provenance.keys())
    members = family._member_set
    is_algebra = all(universe.complement(m) in members for m in family) and all(
        (m | n) in members for m in family for n in family
    )
    return SymdiffClosure(family, is_algebra, provenance)


def algebra_from_family(family: SetFamily) -> FiniteAlgebra:
    """Interpret a family known to be an algebra by its atom partition."""
    alg = generated_algebra(family)
    if alg.element_count() != len(family):
        raise ValueError("family is not an algebra")
    return alg
