"""Exact rational measures on finite algebras and their extensions by null
ideals.

The extension of a measure m by an ideal ideal is defined on the
symmetric-difference closure {A △ I} by giving A △ I the weight m(A); this is
well defined exactly when the triple (X, Σ, ideal) is in the triple class and
every Σ-member of the ideal is m-null.  Everything here is finitely additive
and, the universe being finite, automatically countably additive; no separate
sigma-variants exist.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .ideals import join_ideals
from .setalg import (
    ENUM_CAP,
    FiniteAlgebra,
    Ideal,
    SetFamily,
    check_cap,
    family_key,
    generated_algebra,
    iter_points,
    iter_submasks,
    symdiff_closure,
    triple_in_T,
)


class ExtensionError(Exception):
    pass


class NotInT(ExtensionError):
    """The triple fails the class condition; witness = (E, A), E∩A outside the ideal."""

    def __init__(self, witness: Tuple[int, int]):
        self.witness = witness
        super().__init__(f"triple not in the admissible class, witness {witness}")


class NullityViolation(ExtensionError):
    """witness = measurable ideal member with positive measure."""

    def __init__(self, witness: int):
        self.witness = witness
        super().__init__(f"ideal member {witness:#x} is measurable with positive measure")


class AmbiguousProvenance(ExtensionError):
    """Internal consistency failure; must never fire when preconditions hold."""


def as_fraction(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError("floats are not allowed in exact measures")
    return Fraction(x)


class RationalMeasure:
    """Nonnegative exact rational weights on the atoms of a finite algebra."""

    __slots__ = ("algebra", "atom_weights", "total")

    def __init__(self, algebra: FiniteAlgebra, atom_weights: Sequence):
        weights = tuple(as_fraction(w) for w in atom_weights)
        if len(weights) != len(algebra.atoms):
            raise ValueError("one weight per atom required")
        if any(w < 0 for w in weights):
            raise ValueError("weights must be nonnegative")
        self.algebra = algebra
        self.atom_weights = weights
        self.total = sum(weights, Fraction(0))

    @property
    def universe(self):
        return self.algebra.universe

    @property
    def is_probability(self) -> bool:
        return self.total == 1

    def of(self, mask: int) -> Fraction:
        total = Fraction(0)
        covered = 0
        for w, a in zip(self.atom_weights, self.algebra.atoms):
            if a & mask:
                if a & mask != a:
                    raise ValueError(
                        f"{self.universe.set_str(mask)} is not measurable"
                    )
                total += w
                covered |= a
        if covered != mask:
            raise ValueError(f"{self.universe.set_str(mask)} is not measurable")
        return total

    def null_atom_indices(self) -> Tuple[int, ...]:
        return tuple(k for k, w in enumerate(self.atom_weights) if w == 0)

    def nonnull_atom_indices(self) -> Tuple[int, ...]:
        return tuple(k for k, w in enumerate(self.atom_weights) if w != 0)

    def null_mask(self) -> int:
        """Union of the null atoms: the largest null measurable set."""
        m = 0
        for k in self.null_atom_indices():
            m |= self.algebra.atoms[k]
        return m

    def integral(self, values: Sequence[Fraction]) -> Fraction:
        """Sum of f dm for f measurable (constant on atoms)."""
        total = Fraction(0)
        for w, a in zip(self.atom_weights, self.algebra.atoms):
            pts = list(iter_points(a))
            v = values[pts[0]]
            if any(values[p] != v for p in pts[1:]):
                raise ValueError("function is not measurable")
            total += w * v
        return total

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, RationalMeasure)
            and self.algebra == other.algebra
            and self.atom_weights == other.atom_weights
        )

    def __hash__(self) -> int:
        return hash((self.algebra, self.atom_weights))

    def __repr__(self) -> str:
        pairs = ", ".join(
            f"{self.universe.set_str(a)}={w}" for a, w in zip(self.algebra.atoms, self.atom_weights)
        )
        return f"RationalMeasure({pairs})"


def null_ideal(m: RationalMeasure, cap: int = ENUM_CAP) -> Ideal:
    """All measure-zero members: the unions of null atoms."""
    null_atoms = [m.algebra.atoms[k] for k in m.null_atom_indices()]
    check_cap(1 << len(null_atoms), cap, "null ideal enumeration")
    members = []
    for sel in range(1 << len(null_atoms)):
        u = 0
        for i in iter_points(sel):
            u |= null_atoms[i]
        members.append(u)
    return Ideal(m.universe, members)


def hereditary_null_family(m: RationalMeasure, cap: int = ENUM_CAP) -> Ideal:
    """Downward closure of the null ideal in the power set: all subsets of the
    largest null set.  This is the null family of the completion."""
    n = m.null_mask()
    check_cap(1 << n.bit_count(), cap, "hereditary null enumeration")
    return Ideal(m.universe, iter_submasks(n))


class MeasureExtension:
    """Extension of a base measure by a null ideal, with provenance.

    atom_provenance gives for each atom of the extended algebra its canonical
    decomposition (A, I); member_provenance covers every member.  Constructing
    the object re-checks that the extension restricts to the base and that the
    ideal is contained in the extended null ideal.
    """

    __slots__ = ("base", "ideal", "extended", "atom_provenance", "member_provenance")

    def __init__(
        self,
        base: RationalMeasure,
        ideal: Ideal,
        extended: RationalMeasure,
        atom_provenance: Dict[int, Tuple[int, int]],
        member_provenance: Dict[int, Tuple[int, int]],
    ):
        self.base = base
        self.ideal = ideal
        self.extended = extended
        self.atom_provenance = atom_provenance
        self.member_provenance = member_provenance
        for e in base.algebra.elements():
            if extended.of(e) != base.of(e):
                raise AmbiguousProvenance(
                    f"extension disagrees with base on {base.universe.set_str(e)}"
                )
        for i in ideal:
            if extended.of(i) != 0:
                raise AmbiguousProvenance(
                    f"ideal member {base.universe.set_str(i)} not null in the extension"
                )

    @property
    def universe(self):
        return self.base.universe


def extend_by_ideal(m: RationalMeasure, ideal: Ideal, cap: int = ENUM_CAP) -> MeasureExtension:
    """The extension m_I on the symmetric-difference closure."""
    tc = triple_in_T(m.algebra, ideal, cap)
    if not tc:
        raise NotInT(tc.witness)
    for i in ideal:
        if i in m.algebra and m.of(i) != 0:
            raise NullityViolation(i)
    sc = symdiff_closure(m.algebra, ideal, cap)
    if not sc.is_algebra:
        # the closure is an algebra whenever the triple is in the class
        raise AmbiguousProvenance("closure failed to be an algebra inside the class")
    ext_algebra = generated_algebra(sc.family)
    weights: List[Fraction] = []
    atom_provenance: Dict[int, Tuple[int, int]] = {}
    for atom in ext_algebra.atoms:
        a, i = sc.provenance[atom]
        atom_provenance[atom] = (a, i)
        weights.append(m.of(a))
    extended = RationalMeasure(ext_algebra, weights)
    # well-definedness: the provenance weight of every member must equal the
    # sum of its atom weights, for every admissible decomposition
    if len(sc.family) * m.algebra.element_count() <= cap:
        for member in sc.family:
            got = extended.of(member)
            for a in m.algebra.elements(cap):
                if (a ^ member) in ideal and m.of(a) != got:
                    raise AmbiguousProvenance(
                        f"member {m.universe.set_str(member)} has weight {got} "
                        f"but decomposition through {m.universe.set_str(a)} gives {m.of(a)}"
                    )
    return MeasureExtension(m, ideal, extended, atom_provenance, sc.provenance)


def complete(m: RationalMeasure, cap: int = ENUM_CAP) -> MeasureExtension:
    """Extension by the hereditary closure of the null ideal; the result is
    complete (every subset of a null set is measurable and null)."""
    return extend_by_ideal(m, hereditary_null_family(m, cap), cap)


def is_complete(m: RationalMeasure) -> bool:
    n = m.null_mask()
    return all((1 << p) in m.algebra for p in iter_points(n))


class NullIdealReport:
    """Outcomes of the three null-ideal formulas for an extension."""

    __slots__ = (
        "symdiff_formula",
        "symdiff_witness",
        "equals_ideal",
        "sigma_cap_equals_null",
        "null_inside_ideal",
        "biconditional_ii",
        "union_formula",
        "union_witness",
        "difference_condition",
        "biconditional_iii",
    )

    def __init__(self):
        self.symdiff_formula = True
        self.symdiff_witness: Optional[int] = None
        self.equals_ideal = False
        self.sigma_cap_equals_null = False
        self.null_inside_ideal = False
        self.biconditional_ii = False
        self.union_formula = False
        self.union_witness: Optional[int] = None
        self.difference_condition = False
        self.biconditional_iii = False


def null_ideal_formulas(ext: MeasureExtension, cap: int = ENUM_CAP) -> NullIdealReport:
    """Checks, for mu_I:

    (i)   (Sigma_I)_0 = {A △ I : A null in Sigma, I in the ideal};
    (ii)  (Sigma_I)_0 = I  iff  Sigma ∩ I = Sigma_0  iff  Sigma_0 ⊆ I;
    (iii) (Sigma_I)_0 = {A ∪ I}  iff  A ∖ I ∈ Sigma for all null A, I in I.
    """
    report = NullIdealReport()
    base, ideal, extended = ext.base, ext.ideal, ext.extended
    base_null = set(null_ideal(base, cap).members)
    ext_null = {e for e in extended.algebra.elements(cap) if extended.of(e) == 0}

    rhs = {a ^ i for a in base_null for i in ideal}
    report.symdiff_formula = ext_null == rhs
    if not report.symdiff_formula:
        report.symdiff_witness = min(ext_null ^ rhs, key=family_key)

    ideal_set = set(ideal.members)
    report.equals_ideal = ext_null == ideal_set
    sigma_cap = {i for i in ideal if i in base.algebra}
    report.sigma_cap_equals_null = sigma_cap == base_null
    report.null_inside_ideal = base_null <= ideal_set
    report.biconditional_ii = (
        report.equals_ideal == report.sigma_cap_equals_null == report.null_inside_ideal
    )

    union_rhs = {a | i for a in base_null for i in ideal}
    report.union_formula = ext_null == union_rhs
    if not report.union_formula:
        report.union_witness = min(ext_null ^ union_rhs, key=family_key)
    report.difference_condition = all(
        (a & ~i) in base.algebra for a in base_null for i in ideal
    )
    report.biconditional_iii = report.union_formula == report.difference_condition
    return report


def weight_multiset(m: RationalMeasure) -> Tuple[Fraction, ...]:
    """Non-null atom weights sorted; preserved by extension (the measure
    algebras are isomorphic)."""
    return tuple(sorted(w for w in m.atom_weights if w != 0))


class IteratedExtensionReport:
    __slots__ = (
        "forward",
        "forward_error",
        "joint",
        "joint_error",
        "reversed",
        "reversed_error",
        "forward_equals_joint",
        "reversed_equals_joint",
    )

    def __init__(self):
        self.forward: Optional[RationalMeasure] = None
        self.forward_error: Optional[ExtensionError] = None
        self.joint: Optional[RationalMeasure] = None
        self.joint_error: Optional[ExtensionError] = None
        self.reversed: Optional[RationalMeasure] = None
        self.reversed_error: Optional[ExtensionError] = None
        self.forward_equals_joint: Optional[bool] = None
        self.reversed_equals_joint: Optional[bool] = None


def iterate_extensions(
    m: RationalMeasure, I: Ideal, J: Ideal, cap: int = ENUM_CAP
) -> IteratedExtensionReport:
    """(m_I)_J versus m_{I∨J} versus (m_J)_I, with per-leg errors.

    Whenever two legs are defined they must agree (same extended algebra and
    atom weights).
    """
    report = IteratedExtensionReport()
    try:
        first = extend_by_ideal(m, I, cap)
        report.forward = extend_by_ideal(first.extended, J, cap).extended
    except ExtensionError as e:
        report.forward_error = e
    try:
        K = join_ideals(I, J, cap).join
        report.joint = extend_by_ideal(m, K, cap).extended
    except ExtensionError as e:
        report.joint_error = e
    try:
        firstJ = extend_by_ideal(m, J, cap)
        report.reversed = extend_by_ideal(firstJ.extended, I, cap).extended
    except ExtensionError as e:
        report.reversed_error = e
    if report.forward is not None and report.joint is not None:
        report.forward_equals_joint = report.forward == report.joint
    if report.reversed is not None and report.joint is not None:
        report.reversed_equals_joint = report.reversed == report.joint
    return report


def measurable_representative(
    values: Sequence, ext: MeasureExtension, cap: int = ENUM_CAP
) -> Tuple[Fraction, ...]:
    """Base-measurable representative of an extended-measurable function.

    For each threshold just above a value v_i the level set {f < r} is a fixed
    member of the extended algebra; decompose it through the provenance map as
    A_i △ I_i and set g(x) = min{v_i : x ∈ A_i}, the finite form of the
    inf-over-rationals construction.  Points lying in no A_i (possible only
    inside the union of the I_i) get the top value.  The difference set
    {f ≠ g} always lands in the ideal: it is contained in ∪I_i and is
    measurable for the extension, and a measurable subset of an ideal member
    is itself in the ideal when the triple is in the class.
    """
    universe = ext.universe
    vals = tuple(as_fraction(v) for v in values)
    if len(vals) != universe.size:
        raise ValueError("one value per point required")
    ext_alg = ext.extended.algebra
    for atom in ext_alg.atoms:
        pts = list(iter_points(atom))
        if any(vals[p] != vals[pts[0]] for p in pts[1:]):
            raise ValueError("function is not measurable for the extension")
    if universe.size == 0:
        return ()
    distinct = sorted(set(vals))
    level_decomp: List[Tuple[Fraction, int]] = []  # (value, A_i)
    for v in distinct:
        level = 0
        for p in range(universe.size):
            if vals[p] <= v:
                level |= 1 << p
        if level not in ext.member_provenance:
            raise AmbiguousProvenance("level set escaped the extended algebra")
        a, _ = ext.member_provenance[level]
        level_decomp.append((v, a))
    out: List[Fraction] = []
    for p in range(universe.size):
        for v, a in level_decomp:
            if a & (1 << p):
                out.append(v)
                break
        else:
            out.append(distinct[-1])
    bad = 0
    for p in range(universe.size):
        if out[p] != vals[p]:
            bad |= 1 << p
    if bad not in ext.ideal:
        raise AmbiguousProvenance("difference set escaped the ideal")
    return tuple(out)


def prescribed_null_extension(
    m: RationalMeasure, family: SetFamily, cap: int = ENUM_CAP
) -> Optional[MeasureExtension]:
    """Extension of m making every member of family null, when one exists.

    Criterion (finite form): no measurable set of positive measure is covered
    by the union of the family.  The witnessing extension is by the hereditary
    ideal of all subsets of that union; the returned extension restricted to
    the algebra generated by Sigma and the family equals the extension by the
    generated ideal.
    """
    cover = family.union_of_members()
    for a, w in zip(m.algebra.atoms, m.atom_weights):
        if a & ~cover == 0 and w > 0:
            return None
    check_cap(1 << cover.bit_count(), cap, "prescribed-null extension")
    hereditary = Ideal(m.universe, iter_submasks(cover))
    return extend_by_ideal(m, hereditary, cap)
