"""Product universes, rectangle algebras, skew products, nil null ideals, and
exact checkers for the Fubini-type compatibility conditions.

A product instance is a triple of space layers: a left probability space, a
family of right probability spaces indexed by left points (constant family =
ordinary second factor), and a top space over the product universe.  The
conditions named P0, P1, P2, C, C_I, Cbar relate the top measure to the
factors:

  P0:   the rectangle algebra is contained in the top algebra
  P1:   P0 and the top measure restricts to the product measure
  P2:   P1 and every top set is null-equivalent to a rectangle-algebra set
  C:    every top set has measurable vertical sections off a null set of
        columns, section measure constant on traces of left atoms, and the
        top weight equals the weighted sum of section measures; C_I is the
        same with the exceptional column set drawn from a prescribed ideal
  Cbar: the mirror of C through horizontal sections (single right space)

Everything decidable here is decided exactly; the quantifier over exceptional
sets collapses to the canonical largest candidate, which is checked and
recorded on the report.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .linalg import Vec
from .measure import RationalMeasure, extend_by_ideal, null_ideal
from .setalg import (
    ENUM_CAP,
    FiniteAlgebra,
    Ideal,
    SetFamily,
    Universe,
    check_cap,
    family_key,
    iter_points,
)

ZERO = Fraction(0)


class ProductPreconditionError(Exception):
    def __init__(self, message: str, witness=None):
        self.witness = witness
        super().__init__(message)


def product_universe(xu: Universe, yu: Universe) -> Universe:
    """Point (x, y) lives at index x·|Y| + y."""
    names = [f"{xn},{yn}" for xn in xu.names for yn in yu.names]
    return Universe(names)


def section_v(E: int, x: int, y_size: int) -> int:
    """Vertical section E_x = {y : (x,y) ∈ E}."""
    return (E >> (x * y_size)) & ((1 << y_size) - 1)


def section_h(E: int, y: int, x_size: int, y_size: int) -> int:
    """Horizontal section E^y = {x : (x,y) ∈ E}."""
    out = 0
    for x in range(x_size):
        if E >> (x * y_size + y) & 1:
            out |= 1 << x
    return out


def rectangle(A: int, B: int, y_size: int) -> int:
    out = 0
    for x in iter_points(A):
        out |= B << (x * y_size)
    return out


def assemble_from_sections(sections: Sequence[int], y_size: int) -> int:
    E = 0
    for x, s in enumerate(sections):
        E |= s << (x * y_size)
    return E


def product_algebra(sigma: FiniteAlgebra, tau: FiniteAlgebra) -> FiniteAlgebra:
    """Rectangle algebra; its atoms are the products of atom pairs."""
    pu = product_universe(sigma.universe, tau.universe)
    y_size = tau.universe.size
    atoms = [rectangle(a, b, y_size) for a in sigma.atoms for b in tau.atoms]
    return FiniteAlgebra(pu, atoms)


def product_measure(mu: RationalMeasure, nu: RationalMeasure) -> RationalMeasure:
    alg = product_algebra(mu.algebra, nu.algebra)
    weights = [wa * wb for wa in mu.atom_weights for wb in nu.atom_weights]
    return RationalMeasure(alg, weights)


FamilyLike = Union[Ideal, SetFamily]


def skew_member(
    E: int,
    S: FamilyLike,
    T: Sequence[FamilyLike],
    y_size: int,
) -> bool:
    """Whether E belongs to the skew product of S with the per-column family T:
    some member N of S covers every column whose section escapes its T_x."""
    bad = 0
    for x in range(len(T)):
        if section_v(E, x, y_size) not in T[x]:
            bad |= 1 << x
    union = S.union_of_members()
    if union in S:
        # union-closed fast path: the union is the single weakest witness
        return bad & ~union == 0
    return any(bad & ~n == 0 for n in S)


class ProductSpace:
    """Left space, per-left-point right spaces over one shared right universe,
    and a top space over the product universe.  All three layers carry
    probability measures."""

    __slots__ = (
        "x_universe",
        "y_universe",
        "universe",
        "sigma",
        "mu",
        "right_algebras",
        "right_measures",
        "upsilon",
        "upsilon_measure",
    )

    def __init__(
        self,
        mu: RationalMeasure,
        right: Sequence[Tuple[FiniteAlgebra, RationalMeasure]],
        upsilon_measure: RationalMeasure,
    ):
        self.mu = mu
        self.sigma = mu.algebra
        self.x_universe = mu.algebra.universe
        if len(right) == 1:
            right = list(right) * self.x_universe.size
        if len(right) != self.x_universe.size:
            raise ValueError("one right space per left point required")
        self.right_algebras = tuple(t for t, _ in right)
        self.right_measures = tuple(n for _, n in right)
        self.y_universe = self.right_algebras[0].universe
        for t, n in right:
            if t.universe != self.y_universe:
                raise ValueError("right spaces must share one universe")
            if n.algebra != t:
                raise ValueError("right measure must live on its right algebra")
        self.universe = product_universe(self.x_universe, self.y_universe)
        self.upsilon_measure = upsilon_measure
        self.upsilon = upsilon_measure.algebra
        if self.upsilon.universe != self.universe:
            raise ValueError("top space must live on the product universe")
        if not mu.is_probability or not upsilon_measure.is_probability:
            raise ValueError("layers must carry probability measures")
        if any(not n.is_probability for n in self.right_measures):
            raise ValueError("layers must carry probability measures")

    @property
    def x_size(self) -> int:
        return self.x_universe.size

    @property
    def y_size(self) -> int:
        return self.y_universe.size

    def constant_right_algebra(self) -> bool:
        return all(t == self.right_algebras[0] for t in self.right_algebras)

    def constant_right(self) -> bool:
        return self.constant_right_algebra() and all(
            n == self.right_measures[0] for n in self.right_measures
        )

    def section(self, E: int, x: Optional[int] = None, y: Optional[int] = None) -> int:
        if (x is None) == (y is None):
            raise ValueError("give exactly one of x, y")
        if x is not None:
            return section_v(E, x, self.y_size)
        return section_h(E, y, self.x_size, self.y_size)

    def with_top(self, upsilon_measure: RationalMeasure) -> "ProductSpace":
        return ProductSpace(
            self.mu,
            list(zip(self.right_algebras, self.right_measures)),
            upsilon_measure,
        )


def trivial_product_space(mu: RationalMeasure, nu: RationalMeasure) -> ProductSpace:
    """Ordinary product: top = rectangle algebra with the product measure."""
    return ProductSpace(mu, [(nu.algebra, nu)], product_measure(mu, nu))


class NilNullTesters:
    """Membership predicates for the nil null ideals.

    right: sections null off a null column set; right_completed uses the
    hereditary (completed) per-column null families; left mirrors through
    rows and the hereditary left null family; two_sided intersects the two
    completed one-sided ideals.  The left forms need a constant right family.
    """

    __slots__ = ("right", "right_completed", "left", "two_sided")

    def __init__(self, right, right_completed, left, two_sided):
        self.right = right
        self.right_completed = right_completed
        self.left = left
        self.two_sided = two_sided


def nil_null_ideals(ps: ProductSpace) -> NilNullTesters:
    y_size = ps.y_size
    n_max = ps.mu.null_mask()
    null_sets = [set(null_ideal(n).members) for n in ps.right_measures]
    null_masks = [n.null_mask() for n in ps.right_measures]

    def right(E: int) -> bool:
        return all(
            section_v(E, x, y_size) in null_sets[x]
            for x in range(ps.x_size)
            if not n_max >> x & 1
        )

    def right_completed(E: int) -> bool:
        return all(
            section_v(E, x, y_size) & ~null_masks[x] == 0
            for x in range(ps.x_size)
            if not n_max >> x & 1
        )

    left = None
    two_sided = None
    if ps.constant_right():
        m_max = ps.right_measures[0].null_mask()
        sigma_null = set(null_ideal(ps.mu).members)

        def left(E: int) -> bool:
            # completed left factor: rows need only sit inside the largest
            # null left set
            return all(
                section_h(E, y, ps.x_size, y_size) & ~n_max == 0
                for y in range(y_size)
                if not m_max >> y & 1
            )

        def two_sided(E: int) -> bool:
            return right_completed(E) and left(E)

    return NilNullTesters(right, right_completed, left, two_sided)


class ConditionOutcome:
    __slots__ = ("name", "holds", "witness", "note")

    def __init__(self, name: str, holds: bool, witness=None, note: str = ""):
        self.name = name
        self.holds = holds
        self.witness = witness
        self.note = note

    def __bool__(self) -> bool:
        return self.holds

    def __repr__(self) -> str:
        tail = f", witness={self.witness!r}" if self.witness is not None else ""
        return f"ConditionOutcome({self.name}, {self.holds}{tail})"


class FubiniReport:
    __slots__ = ("results", "exceptional_columns", "exceptional_rows", "pi_system_used")

    def __init__(self):
        self.results: Dict[str, ConditionOutcome] = {}
        self.exceptional_columns: Optional[int] = None
        self.exceptional_rows: Optional[int] = None
        self.pi_system_used = False

    def holds(self, name: str) -> bool:
        return self.results[name].holds

    def outcome(self, name: str) -> ConditionOutcome:
        return self.results[name]

    def all_hold(self) -> bool:
        return all(r.holds for r in self.results.values())


CONDITIONS = ("P0", "P1", "P2", "C", "C_I", "Cbar")


def _require_constant_algebra(ps: ProductSpace, name: str) -> FiniteAlgebra:
    if not ps.constant_right_algebra():
        raise ValueError(f"[{name}] needs a single right algebra")
    return ps.right_algebras[0]


def _check_P0(ps: ProductSpace) -> ConditionOutcome:
    tau = _require_constant_algebra(ps, "P0")
    rect = product_algebra(ps.sigma, tau)
    for atom in rect.atoms:
        if atom not in ps.upsilon:
            return ConditionOutcome("P0", False, witness=atom, note="rectangle atom not in top algebra")
    return ConditionOutcome("P0", True)


def _check_P1(ps: ProductSpace) -> ConditionOutcome:
    if not ps.constant_right():
        raise ValueError("[P1] needs a single right space")
    p0 = _check_P0(ps)
    if not p0:
        return ConditionOutcome("P1", False, witness=p0.witness, note="P0 fails")
    pm = product_measure(ps.mu, ps.right_measures[0])
    for atom in pm.algebra.atoms:
        lhs = ps.upsilon_measure.of(atom)
        rhs = pm.of(atom)
        if lhs != rhs:
            return ConditionOutcome(
                "P1", False, witness=(atom, lhs, rhs), note="top measure differs from product measure"
            )
    return ConditionOutcome("P1", True)


def _check_P2(ps: ProductSpace) -> ConditionOutcome:
    p1 = _check_P1(ps)
    if not p1:
        return ConditionOutcome("P2", False, witness=p1.witness, note="P1 fails")
    tau = ps.right_algebras[0]
    rect = product_algebra(ps.sigma, tau)
    # null-equivalence to a rectangle set holds for all of the top algebra
    # exactly when no rectangle atom carries two non-null top atoms
    for r_atom in rect.atoms:
        heavy = [
            a
            for a, w in zip(ps.upsilon.atoms, ps.upsilon_measure.atom_weights)
            if w > 0 and a & r_atom == a
        ]
        if len(heavy) > 1:
            return ConditionOutcome(
                "P2",
                False,
                witness=(r_atom, heavy[0], heavy[1]),
                note="rectangle atom carries two non-null top atoms",
            )
    return ConditionOutcome("P2", True)


def _exceptional_columns(ps: ProductSpace, I: Optional[Ideal]) -> int:
    """Largest admissible exceptional column set: the union of the prescribed
    ideal, else the union of the null left atoms.  Any admissible set sits
    inside it and enlarging preserves all three clauses, so checking only this
    one decides the condition."""
    if I is None:
        return ps.mu.null_mask()
    if any(n not in ps.sigma or ps.mu.of(n) != 0 for n in I):
        raise ValueError("prescribed ideal must consist of null left-algebra sets")
    return I.union_of_members()


def _check_C_on(
    ps: ProductSpace, E: int, n_mask: int
) -> Optional[Tuple[int, str, object]]:
    """One set against the three clauses; None when it passes."""
    y_size = ps.y_size
    values: Dict[int, Fraction] = {}
    for x in range(ps.x_size):
        if n_mask >> x & 1:
            continue
        s = section_v(E, x, y_size)
        if s not in ps.right_algebras[x]:
            return (E, "section", x)
        values[x] = ps.right_measures[x].of(s)
    total = ZERO
    for atom, w in zip(ps.sigma.atoms, ps.mu.atom_weights):
        if atom & ~n_mask == 0:
            continue
        pts = [x for x in iter_points(atom) if not n_mask >> x & 1]
        v = values[pts[0]]
        if any(values[x] != v for x in pts[1:]):
            return (E, "not constant on left atom", atom)
        total += w * v
    if total != ps.upsilon_measure.of(E):
        return (E, "integral mismatch", (ps.upsilon_measure.of(E), total))
    return None


def _check_C(
    ps: ProductSpace,
    I: Optional[Ideal],
    cap: int,
    pi_system: Optional[bool],
    report: FubiniReport,
) -> ConditionOutcome:
    name = "C" if I is None else "C_I"
    n_mask = _exceptional_columns(ps, I)
    report.exceptional_columns = n_mask
    count = ps.upsilon.element_count()
    use_pi = pi_system if pi_system is not None else count > cap
    if use_pi:
        # Dynkin argument: the passing sets form a system closed under the
        # operations generating the algebra from its atoms
        report.pi_system_used = True
        todo: Iterable[int] = ps.upsilon.atoms
    else:
        todo = ps.upsilon.elements(cap)
    for E in todo:
        failure = _check_C_on(ps, E, n_mask)
        if failure is not None:
            return ConditionOutcome(name, False, witness=failure)
    return ConditionOutcome(name, True)


def _check_Cbar(ps: ProductSpace, cap: int, pi_system: Optional[bool], report: FubiniReport) -> ConditionOutcome:
    if not ps.constant_right():
        raise ValueError("[Cbar] needs a single right space")
    nu = ps.right_measures[0]
    m_mask = nu.null_mask()
    report.exceptional_rows = m_mask
    count = ps.upsilon.element_count()
    use_pi = pi_system if pi_system is not None else count > cap
    if use_pi:
        report.pi_system_used = True
        todo: Iterable[int] = ps.upsilon.atoms
    else:
        todo = ps.upsilon.elements(cap)
    for E in todo:
        values: Dict[int, Fraction] = {}
        bad = None
        for y in range(ps.y_size):
            if m_mask >> y & 1:
                continue
            s = section_h(E, y, ps.x_size, ps.y_size)
            if s not in ps.sigma:
                bad = (E, "section", y)
                break
            values[y] = ps.mu.of(s)
        if bad is not None:
            return ConditionOutcome("Cbar", False, witness=bad)
        total = ZERO
        for atom, w in zip(nu.algebra.atoms, nu.atom_weights):
            if atom & ~m_mask == 0:
                continue
            pts = [y for y in iter_points(atom) if not m_mask >> y & 1]
            v = values[pts[0]]
            if any(values[y] != v for y in pts[1:]):
                return ConditionOutcome("Cbar", False, witness=(E, "not constant on right atom", atom))
            total += w * v
        if total != ps.upsilon_measure.of(E):
            return ConditionOutcome(
                "Cbar", False, witness=(E, "integral mismatch", (ps.upsilon_measure.of(E), total))
            )
    return ConditionOutcome("Cbar", True)


def check_fubini(
    ps: ProductSpace,
    which: Union[str, Sequence[str]] = "all",
    I: Optional[Ideal] = None,
    cap: int = ENUM_CAP,
    pi_system: Optional[bool] = None,
) -> FubiniReport:
    """Evaluate the requested conditions exactly.

    which: one name, a sequence of names, or "all" for every condition that
    applies to the instance shape.  C_I needs the ideal argument.  Two
    theorem-level implications are enforced on every call: P0 and C passing
    forces P1, and C passing forces the top null ideal into the right nil
    null ideal; a violation raises AssertionError since it can only be a bug.
    """
    if isinstance(which, str):
        names = list(CONDITIONS) if which == "all" else [which]
    else:
        names = list(which)
    if which == "all":
        # keep only the conditions the instance shape supports
        if not ps.constant_right_algebra():
            names = [n for n in names if n not in ("P0", "P1", "P2", "Cbar")]
        elif not ps.constant_right():
            names = [n for n in names if n not in ("P1", "P2", "Cbar")]
        if I is None:
            names = [n for n in names if n != "C_I"]
    for n in names:
        if n not in CONDITIONS:
            raise ValueError(f"unknown condition {n!r}")
    if "C_I" in names and I is None:
        raise ValueError("C_I needs the ideal argument")

    report = FubiniReport()
    for n in names:
        if n == "P0":
            report.results[n] = _check_P0(ps)
        elif n == "P1":
            report.results[n] = _check_P1(ps)
        elif n == "P2":
            report.results[n] = _check_P2(ps)
        elif n == "C":
            report.results[n] = _check_C(ps, None, cap, pi_system, report)
        elif n == "C_I":
            report.results[n] = _check_C(ps, I, cap, pi_system, report)
        elif n == "Cbar":
            report.results[n] = _check_Cbar(ps, cap, pi_system, report)

    if report.results.get("P0") and report.results.get("C") and ps.constant_right():
        p1 = _check_P1(ps)
        if not p1:
            raise AssertionError(f"P0 and C hold but P1 fails: {p1.witness}")
    if report.results.get("C"):
        testers = nil_null_ideals(ps)
        for E, w in zip(ps.upsilon.atoms, ps.upsilon_measure.atom_weights):
            if w == 0 and not testers.right(E):
                raise AssertionError(
                    f"C holds but null top atom {E:#x} escapes the right nil null ideal"
                )
    return report


def skew_null_ideal_family(ps: ProductSpace, I: Ideal, cap: int = ENUM_CAP) -> SetFamily:
    """Materialize the skew ideal 'columns of I free, other sections null':
    row-wise cartesian product of choices."""
    n_star = I.union_of_members()
    row_choices: List[List[int]] = []
    total = 1
    for x in range(ps.x_size):
        if n_star >> x & 1:
            choices = list(range(1 << ps.y_size))
        else:
            choices = sorted(null_ideal(ps.right_measures[x]).members, key=family_key)
        row_choices.append(choices)
        total *= len(choices)
        check_cap(total, cap, "skew ideal materialization")
    members = [0]
    for x, choices in enumerate(row_choices):
        members = [m | (c << (x * ps.y_size)) for m in members for c in choices]
    return SetFamily(ps.universe, members)


def extend_product_by_skew_ideal(
    ps: ProductSpace, I: Ideal, cap: int = ENUM_CAP
) -> ProductSpace:
    """Extend the top measure by the skew ideal built from I and the
    per-column null ideals; the compatibility condition survives.

    Preconditions, both checked: the instance satisfies C, and every top set
    has measurable sections off some member of I.
    """
    c_report = check_fubini(ps, "C", cap=cap)
    if not c_report.holds("C"):
        raise ProductPreconditionError(
            "instance does not satisfy C", witness=c_report.outcome("C").witness
        )
    n_star = I.union_of_members()
    if n_star not in ps.sigma or ps.mu.of(n_star) != 0:
        raise ProductPreconditionError("ideal must consist of null left sets", witness=n_star)
    right_families = [t.element_family() for t in ps.right_algebras]
    for E in ps.upsilon.elements(cap):
        if not skew_member(E, I, right_families, ps.y_size):
            raise ProductPreconditionError(
                "top set has unmeasurable sections beyond the prescribed ideal", witness=E
            )
    had_CI = check_fubini(ps, "C_I", I=I, cap=cap).holds("C_I")

    K_family = skew_null_ideal_family(ps, I, cap)
    K = Ideal(ps.universe, K_family.members)
    ext = extend_by_ideal(ps.upsilon_measure, K, cap)
    out = ps.with_top(ext.extended)

    after = check_fubini(out, "C", cap=cap)
    if not after.holds("C"):
        raise AssertionError(f"C lost through skew extension: {after.outcome('C').witness}")
    if had_CI:
        after_I = check_fubini(out, "C_I", I=I, cap=cap)
        if not after_I.holds("C_I"):
            raise AssertionError(
                f"C_I lost through skew extension: {after_I.outcome('C_I').witness}"
            )
    return out


def section_repair(
    ps: ProductSpace,
    h: Sequence[Fraction],
    N: int,
    M: Optional[int] = None,
) -> Vec:
    """Zero out the columns of N (then the rows of M).

    The result is top-measurable, differs from h only on a top-null block,
    and has every vertical (for two-sided repair also horizontal) section
    measurable.  Requires null-column rectangles (and for the two-sided form
    null-row rectangles) to be measurable and null in the top space.
    """
    y_size = ps.y_size
    full_y = (1 << y_size) - 1
    if N not in ps.sigma or ps.mu.of(N) != 0:
        raise ProductPreconditionError("column set must be a null left set", witness=N)
    for A in null_ideal(ps.mu):
        block = rectangle(A, full_y, y_size)
        if block not in ps.upsilon:
            raise ProductPreconditionError(
                "null-column rectangle not in the top algebra", witness=block
            )
    if ps.upsilon_measure.of(rectangle(N, full_y, y_size)) != 0:
        raise ProductPreconditionError(
            "removed columns carry positive top measure", witness=N
        )
    values = [Fraction(v) for v in h]
    if len(values) != ps.universe.size:
        raise ValueError("one value per product point required")
    for x in iter_points(N):
        for y in range(y_size):
            values[x * y_size + y] = ZERO
    for x in range(ps.x_size):
        if N >> x & 1:
            continue
        sec = values[x * y_size : (x + 1) * y_size]
        levels = {v for v in sec}
        for v in levels:
            lvl = 0
            for y in range(y_size):
                if sec[y] == v:
                    lvl |= 1 << y
            if lvl not in ps.right_algebras[x]:
                raise ProductPreconditionError(
                    "section stays unmeasurable outside the removed columns", witness=x
                )
    if M is not None:
        if not ps.constant_right():
            raise ValueError("row repair needs a single right space")
        nu = ps.right_measures[0]
        if M not in nu.algebra or nu.of(M) != 0:
            raise ProductPreconditionError("row set must be a null right set", witness=M)
        full_x = (1 << ps.x_size) - 1
        for B in null_ideal(nu):
            block = rectangle(full_x, B, y_size)
            if block not in ps.upsilon:
                raise ProductPreconditionError(
                    "null-row rectangle not in the top algebra", witness=block
                )
        if ps.upsilon_measure.of(rectangle(full_x, M, y_size)) != 0:
            raise ProductPreconditionError(
                "removed rows carry positive top measure", witness=M
            )
        for y in iter_points(M):
            for x in range(ps.x_size):
                values[x * y_size + y] = ZERO
    return tuple(values)
