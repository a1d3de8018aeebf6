"""Brute-force reference implementations and random instance generators.

Everything recomputes from definitions using nothing but bitmask arithmetic,
so agreement with the library is meaningful.  Oracles stay exponential and
unapologetic; keep the universes they see small.
"""

from fractions import Fraction
from itertools import product as iproduct
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

ZERO = Fraction(0)


def submasks(mask: int):
    s = mask
    while True:
        yield s
        if s == 0:
            return
        s = (s - 1) & mask


def bits(mask: int) -> List[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


# -- set-system closures -------------------------------------------------------


def closure_complement_intersection(full: int, seed: Iterable[int]) -> FrozenSet[int]:
    """Generated algebra: fixpoint under complement and pairwise intersection."""
    elems: Set[int] = set(seed) | {0, full}
    while True:
        new: Set[int] = set()
        for a in elems:
            c = full & ~a
            if c not in elems:
                new.add(c)
            for b in elems:
                if (a & b) not in elems:
                    new.add(a & b)
        if not new:
            return frozenset(elems)
        elems |= new


def closure_union_difference(seed: Iterable[int]) -> FrozenSet[int]:
    """Smallest ideal-of-some-algebra containing the seeds."""
    elems: Set[int] = set(seed) | {0}
    while True:
        new: Set[int] = set()
        for a in elems:
            for b in elems:
                for c in (a | b, a & ~b):
                    if c not in elems:
                        new.add(c)
        if not new:
            return frozenset(elems)
        elems |= new


def is_ideal_family(members: Iterable[int]) -> bool:
    ms = set(members)
    if 0 not in ms:
        return False
    return all((a | b) in ms and (a & ~b) in ms for a in ms for b in ms)


def symdiff_family(alg_elements: Iterable[int], ideal_members: Iterable[int]) -> FrozenSet[int]:
    return frozenset(a ^ i for a in alg_elements for i in ideal_members)


def triple_fails(alg_elements: Iterable[int], ideal_members: Iterable[int]) -> Optional[Tuple[int, int]]:
    ms = set(ideal_members)
    for a in alg_elements:
        for i in ms:
            if (a & i) not in ms:
                return (a, i)
    return None


# -- measure extension ----------------------------------------------------------


def extension_oracle(
    full: int,
    alg_elements: Sequence[int],
    weight_of: Dict[int, Fraction],
    ideal_members: Sequence[int],
):
    """Recompute the extension from the definition: elements are the symmetric
    differences, the weight of A^I is the weight of A, and every failure mode
    is detected by inspection.  Returns ("NotInT", w) / ("NullityViolation", w)
    / ("ok", elements frozenset, weight dict)."""
    bad = triple_fails(alg_elements, ideal_members)
    if bad is not None:
        return ("NotInT", bad)
    alg_set = set(alg_elements)
    for i in ideal_members:
        if i in alg_set and weight_of[i] != 0:
            return ("NullityViolation", i)
    elems = symdiff_family(alg_elements, ideal_members)
    weights: Dict[int, Fraction] = {}
    for a in alg_elements:
        for i in ideal_members:
            e = a ^ i
            w = weight_of[a]
            if e in weights and weights[e] != w:
                return ("AmbiguousProvenance", e)
            weights[e] = w
    return ("ok", elems, weights)


def null_members_oracle(
    alg_elements: Sequence[int], weight_of: Dict[int, Fraction], ideal_members: Sequence[int]
) -> FrozenSet[int]:
    """Null ideal of the extension per the symmetric-difference formula."""
    return frozenset(
        a ^ i for a in alg_elements if weight_of[a] == 0 for i in ideal_members
    )


# -- functions and measurability --------------------------------------------------


def constant_on_atoms(values: Sequence, atoms: Sequence[int]) -> bool:
    for atom in atoms:
        pts = bits(atom)
        if any(values[p] != values[pts[0]] for p in pts[1:]):
            return False
    return True


def functions_on_atoms(atoms: Sequence[int], value_set: Sequence, size: int):
    """Every function measurable for the algebra, as point-value lists."""
    for combo in iproduct(value_set, repeat=len(atoms)):
        values = [None] * size
        for atom, v in zip(atoms, combo):
            for p in bits(atom):
                values[p] = v
        yield values


# -- topology ----------------------------------------------------------------------


def clopen_sets(full: int, opens: Iterable[int]) -> Set[int]:
    op = set(opens)
    return {m for m in op if (full & ~m) in op}


def nonzero_null_continuous_exists(full: int, opens: Iterable[int], null_mask: int) -> bool:
    """Direct search: a continuous function is constant on clopen pieces, so a
    nonzero one vanishing off the null part exists exactly when some nonempty
    clopen set sits inside it."""
    return any(m != 0 and m & ~null_mask == 0 for m in clopen_sets(full, opens))


# -- modification statements ---------------------------------------------------------


class _UF:
    def __init__(self, n: int):
        self.p = list(range(n))

    def find(self, a: int) -> int:
        while self.p[a] != a:
            self.p[a] = self.p[self.p[a]]
            a = self.p[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.p[ra] = rb


def _consistent(n: int, groups: Iterable[Iterable[int]], forced: Dict[int, Fraction]) -> bool:
    uf = _UF(n)
    for grp in groups:
        pts = list(grp)
        for p in pts[1:]:
            uf.union(pts[0], p)
    seen: Dict[int, Fraction] = {}
    for p, v in forced.items():
        r = uf.find(p)
        if r in seen and seen[r] != v:
            return False
        seen[r] = v
    return True


def modification_exists_oracle(
    values: Sequence[Fraction],
    top_atoms: Sequence[int],
    row_null_masks: Sequence[int],
    y_size: int,
) -> bool:
    """A top-measurable version of the process agreeing off each row's null
    mask exists iff no top atom is forced to two values."""
    n = len(values)
    forced = {
        x * y_size + y: values[x * y_size + y]
        for x in range(len(row_null_masks))
        for y in range(y_size)
        if not row_null_masks[x] >> y & 1
    }
    return _consistent(n, [bits(a) for a in top_atoms], forced)


def skew_modification_oracle(
    values: Sequence[Fraction],
    top_atoms: Sequence[int],
    row_algebra_atoms: Sequence[Sequence[int]],
    row_null_masks: Sequence[int],
    mu_null_rows: int,
    y_size: int,
) -> bool:
    """Same consistency question against the hereditary skew enlargement:
    points in null rows or null columns float free as singletons, top atoms
    bind only outside that region, and each live row must stay measurable
    for its own algebra."""
    x_size = len(row_null_masks)
    n = x_size * y_size
    region = 0
    for x in range(x_size):
        row_mask = ((1 << y_size) - 1) << (x * y_size)
        if mu_null_rows >> x & 1:
            region |= row_mask
        else:
            region |= row_null_masks[x] << (x * y_size)
    groups: List[List[int]] = [bits(a & ~region) for a in top_atoms]
    for x in range(x_size):
        if mu_null_rows >> x & 1:
            continue
        for atom in row_algebra_atoms[x]:
            groups.append([x * y_size + y for y in bits(atom)])
    forced = {
        x * y_size + y: values[x * y_size + y]
        for x in range(x_size)
        for y in range(y_size)
        if not row_null_masks[x] >> y & 1
    }
    return _consistent(n, groups, forced)


# -- random instance generators -------------------------------------------------------


def rand_partition(rng, size: int) -> List[int]:
    """Random partition of {0..size-1} into nonempty atoms."""
    labels = [rng.randrange(size) for _ in range(size)]
    atoms: Dict[int, int] = {}
    for p, lab in enumerate(labels):
        atoms[lab] = atoms.get(lab, 0) | (1 << p)
    return sorted(atoms.values())


def rand_weights(rng, count: int, force_null: bool = False) -> List[Fraction]:
    denom = rng.choice([2, 3, 4, 6, 8])
    ws = [Fraction(rng.randrange(0, 4), denom) for _ in range(count)]
    if all(w == 0 for w in ws):
        ws[rng.randrange(count)] = Fraction(1, denom)
    if force_null and all(w != 0 for w in ws) and count > 1:
        ws[rng.randrange(count)] = ZERO
    return ws


def rand_ideal_members(rng, full: int, inside: Optional[int] = None, seeds: int = 2) -> FrozenSet[int]:
    """Random ideal-of-some-algebra, optionally kept inside a region."""
    region = full if inside is None else inside
    chosen = []
    for _ in range(seeds):
        m = rng.randrange(full + 1) & region
        chosen.append(m)
    return closure_union_difference(chosen)


def atom_refined_ideal(rng, atoms: Sequence[int], null_atoms: Sequence[int], seeds: int = 2) -> FrozenSet[int]:
    """Random ideal valid for extension by construction: seeds live inside the
    union of null atoms and the closure also absorbs intersections with every
    atom, which forces the triple condition."""
    region = 0
    for a in null_atoms:
        if rng.random() < 0.8:
            region |= a
    chosen = [rng.randrange(region + 1) & region if region else 0 for _ in range(seeds)]
    elems: Set[int] = set(chosen) | {0}
    while True:
        new: Set[int] = set()
        for a in elems:
            for b in elems:
                for c in (a | b, a & ~b):
                    if c not in elems:
                        new.add(c)
            for atom in atoms:
                if (a & atom) not in elems:
                    new.add(a & atom)
        if not new:
            return frozenset(elems)
        elems |= new
