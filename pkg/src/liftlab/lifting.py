"""Vector liftings on finite measure spaces.

A lifting here is a linear selector on measurable functions: it fixes every
value on atoms of positive measure and fills in values on null atoms by a
rational functional of the non-null values.  That row representation is a
bijection onto liftings (rows summing to 1 correspond exactly to linear
selectors fixing constants), which makes existence, classification, and
transport through measure extensions all finitely checkable.

Function spaces: on a finite universe every ℒ^p coincides with the space of
all measurable functions, so a single wrapper type serves them all; the p
parameter survives only in signatures of callers that quote it.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .linalg import ONE, ZERO, Vec, dot, solve
from .measure import MeasureExtension, RationalMeasure, measurable_representative
from .setalg import (
    ENUM_CAP,
    FiniteAlgebra,
    SetFamily,
    Universe,
    check_cap,
    generated_algebra,
    iter_points,
)


class ZeroTotalMass(Exception):
    pass


class InfeasibleFixConstraints(Exception):
    """Carries the violated linear system: (null atom, matrix rows, rhs)."""

    def __init__(self, atom: int, system: Sequence[Vec], rhs: Sequence[Fraction]):
        self.atom = atom
        self.system = tuple(system)
        self.rhs = tuple(rhs)
        super().__init__(f"no section row exists for null atom {atom:#x}")


class StrongConditionFails(Exception):
    def __init__(self, witness: int):
        self.witness = witness
        super().__init__(f"clopen atom {witness:#x} lies inside the null part")


class MeasurableFunction:
    """Exact rational function on a universe, one value per point."""

    __slots__ = ("universe", "values")

    def __init__(self, universe: Universe, values: Sequence):
        vals = tuple(Fraction(v) for v in values)
        if len(vals) != universe.size:
            raise ValueError("one value per point required")
        self.universe = universe
        self.values = vals

    @classmethod
    def indicator(cls, universe: Universe, mask: int) -> "MeasurableFunction":
        universe.check(mask)
        return cls(universe, [ONE if mask >> p & 1 else ZERO for p in range(universe.size)])

    @classmethod
    def constant(cls, universe: Universe, c) -> "MeasurableFunction":
        return cls(universe, [Fraction(c)] * universe.size)

    def is_measurable(self, algebra: FiniteAlgebra) -> bool:
        for atom in algebra.atoms:
            pts = list(iter_points(atom))
            if any(self.values[p] != self.values[pts[0]] for p in pts[1:]):
                return False
        return True

    def level_set(self, value) -> int:
        v = Fraction(value)
        out = 0
        for p, x in enumerate(self.values):
            if x == v:
                out |= 1 << p
        return out

    def __add__(self, other: "MeasurableFunction") -> "MeasurableFunction":
        return MeasurableFunction(self.universe, [a + b for a, b in zip(self.values, other.values)])

    def __sub__(self, other: "MeasurableFunction") -> "MeasurableFunction":
        return MeasurableFunction(self.universe, [a - b for a, b in zip(self.values, other.values)])

    def __mul__(self, other: "MeasurableFunction") -> "MeasurableFunction":
        return MeasurableFunction(self.universe, [a * b for a, b in zip(self.values, other.values)])

    def scale(self, c) -> "MeasurableFunction":
        c = Fraction(c)
        return MeasurableFunction(self.universe, [c * a for a in self.values])

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, MeasurableFunction)
            and self.universe == other.universe
            and self.values == other.values
        )

    def __hash__(self) -> int:
        return hash((self.universe, self.values))

    def __repr__(self) -> str:
        return f"MeasurableFunction({list(map(str, self.values))})"


FunctionLike = Union[MeasurableFunction, Sequence]


def as_values(f: FunctionLike, universe: Universe) -> Tuple[Fraction, ...]:
    if isinstance(f, MeasurableFunction):
        if f.universe != universe:
            raise ValueError("function lives on a different universe")
        return f.values
    vals = tuple(Fraction(v) for v in f)
    if len(vals) != universe.size:
        raise ValueError("one value per point required")
    return vals


class VectorLifting:
    """Linear selector in row form.

    Values on non-null atoms are reproduced verbatim; the value on each null
    atom is the row functional applied to the non-null values.  Row sums are
    forced to 1 so constants are fixed.
    """

    __slots__ = ("measure", "nonnull_atoms", "null_atoms", "rows")

    def __init__(self, measure: RationalMeasure, rows: Sequence[Vec]):
        self.measure = measure
        self.nonnull_atoms = measure.nonnull_atom_indices()
        self.null_atoms = measure.null_atom_indices()
        rows = tuple(tuple(Fraction(c) for c in row) for row in rows)
        if len(rows) != len(self.null_atoms):
            raise ValueError("one row per null atom required")
        for row in rows:
            if len(row) != len(self.nonnull_atoms):
                raise ValueError("row width must match the non-null atom count")
            if sum(row, ZERO) != 1:
                raise ValueError("rows must sum to 1")
        if not self.nonnull_atoms and self.null_atoms:
            raise ZeroTotalMass("no atoms of positive measure to lift from")
        self.rows = rows

    @property
    def algebra(self) -> FiniteAlgebra:
        return self.measure.algebra

    @property
    def universe(self) -> Universe:
        return self.measure.universe

    @property
    def space(self) -> Tuple[FiniteAlgebra, RationalMeasure]:
        return (self.algebra, self.measure)

    def atom_values(self, f: FunctionLike) -> Dict[int, Fraction]:
        """Output value per atom index."""
        vals = as_values(f, self.universe)
        atoms = self.algebra.atoms
        per_atom = []
        for atom in atoms:
            pts = list(iter_points(atom))
            v = vals[pts[0]]
            if any(vals[p] != v for p in pts[1:]):
                raise ValueError("function is not measurable")
            per_atom.append(v)
        nonnull_vec = tuple(per_atom[k] for k in self.nonnull_atoms)
        out = {k: per_atom[k] for k in self.nonnull_atoms}
        for row, k in zip(self.rows, self.null_atoms):
            out[k] = dot(row, nonnull_vec)
        return out

    def apply(self, f: FunctionLike) -> MeasurableFunction:
        out = self.atom_values(f)
        values = [ZERO] * self.universe.size
        for k, v in out.items():
            for p in iter_points(self.algebra.atoms[k]):
                values[p] = v
        return MeasurableFunction(self.universe, values)

    def fixes(self, f: FunctionLike) -> bool:
        vals = as_values(f, self.universe)
        return self.apply(vals).values == vals

    def check_axioms(self) -> bool:
        """Re-check linearity, the two selector laws, and unit fixing on the
        spanning set of atom indicators."""
        alg = self.algebra
        m = self.measure
        one = MeasurableFunction.constant(self.universe, 1)
        if self.apply(one) != one:
            return False
        indicators = [MeasurableFunction.indicator(self.universe, a) for a in alg.atoms]
        for f in indicators:
            rf = self.apply(f)
            if not rf.is_measurable(alg):
                return False
            diff = 0
            for p in range(self.universe.size):
                if rf.values[p] != f.values[p]:
                    diff |= 1 << p
            if diff not in alg or m.of(diff) != 0:
                return False  # (l1) fails
            for g in indicators:
                if self.apply(f + g) != self.apply(f) + self.apply(g):
                    return False
        # (l2) needs no scan: the output reads only non-null atom values
        return True

    def to_payload(self) -> dict:
        return {
            "universe": list(self.universe.names),
            "atoms": list(self.algebra.atoms),
            "weights": [str(w) for w in self.measure.atom_weights],
            "rows": [[str(c) for c in row] for row in self.rows],
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "VectorLifting":
        universe = Universe(payload["universe"])
        algebra = FiniteAlgebra(universe, payload["atoms"])
        measure = RationalMeasure(algebra, [Fraction(w) for w in payload["weights"]])
        rows = [tuple(Fraction(c) for c in row) for row in payload["rows"]]
        return cls(measure, rows)


def build_vector_lifting(
    measure: RationalMeasure, fix: Optional[Sequence[FunctionLike]] = None
) -> VectorLifting:
    """Lifting with default mass-proportional rows, or the canonical solution
    fixing every listed function.

    Each fixed function must be measurable; its values on null atoms must be
    expressible as a consistent row applied to its non-null values, jointly
    across the whole list.  The solver pins free coefficients at zero, so the
    result is deterministic; when the fixed classes together with constants
    span the quotient by null functions, it is the unique lifting fixing them.
    """
    algebra = measure.algebra
    universe = measure.universe
    nonnull = measure.nonnull_atom_indices()
    null = measure.null_atom_indices()
    if universe.size and not nonnull:
        raise ZeroTotalMass("lifting needs positive total mass")
    total = sum((measure.atom_weights[k] for k in nonnull), ZERO)
    if fix is None:
        default = tuple(measure.atom_weights[k] / total for k in nonnull)
        return VectorLifting(measure, [default] * len(null))
    per_atom_cols: List[List[Fraction]] = []
    per_atom_rhs: List[List[Fraction]] = []
    system: List[Vec] = [tuple(ONE for _ in nonnull)]
    for f in fix:
        vals = as_values(f, universe)
        per_atom = []
        for atom in algebra.atoms:
            pts = list(iter_points(atom))
            v = vals[pts[0]]
            if any(vals[p] != v for p in pts[1:]):
                raise ValueError("fixed function is not measurable")
            per_atom.append(v)
        system.append(tuple(per_atom[k] for k in nonnull))
        per_atom_cols.append(per_atom)
    rows: List[Vec] = []
    for k in null:
        rhs = [ONE] + [col[k] for col in per_atom_cols]
        row = solve(system, rhs)
        if row is None:
            raise InfeasibleFixConstraints(algebra.atoms[k], system, rhs)
        rows.append(row)
        per_atom_rhs.append(rhs)
    return VectorLifting(measure, rows)


class FiniteTopology:
    """Family of open sets: closed under union and intersection, containing
    the empty set and the whole universe."""

    __slots__ = ("universe", "opens")

    def __init__(self, universe: Universe, opens: Iterable[int]):
        fam = SetFamily(universe, set(opens) | {0, universe.full})
        members = set(fam.members)
        for a in members:
            for b in members:
                if a | b not in members or a & b not in members:
                    raise ValueError(
                        f"opens not closed under lattice operations at "
                        f"{universe.set_str(a)}, {universe.set_str(b)}"
                    )
        self.universe = universe
        self.opens = fam

    def is_open(self, mask: int) -> bool:
        return mask in self.opens

    def is_clopen(self, mask: int) -> bool:
        return mask in self.opens and (self.universe.full & ~mask) in self.opens

    def clopen_algebra(self) -> FiniteAlgebra:
        clopens = [m for m in self.opens if self.is_clopen(m)]
        return generated_algebra(SetFamily(self.universe, clopens))

    def continuous(self, f: FunctionLike) -> bool:
        """Every level set open, which forces them clopen."""
        vals = as_values(f, self.universe)
        for v in set(vals):
            lvl = 0
            for p, x in enumerate(vals):
                if x == v:
                    lvl |= 1 << p
            if lvl not in self.opens:
                return False
        return True


def discrete_topology(universe: Universe) -> FiniteTopology:
    return FiniteTopology(universe, range(universe.full + 1))


def indiscrete_topology(universe: Universe) -> FiniteTopology:
    return FiniteTopology(universe, [])


class StrongConditionReport:
    __slots__ = ("ok", "witness")

    def __init__(self, ok: bool, witness: Optional[int]):
        self.ok = ok
        self.witness = witness

    def __bool__(self) -> bool:
        return self.ok


def check_strong_condition(measure: RationalMeasure, top: FiniteTopology) -> StrongConditionReport:
    """No nonzero continuous function may vanish almost everywhere; finitely,
    no clopen atom may sit inside the union of the null atoms."""
    if top.universe != measure.universe:
        raise ValueError("topology and measure live on different universes")
    for o in top.opens:
        if o not in measure.algebra:
            raise ValueError(f"open set {measure.universe.set_str(o)} is not measurable")
    null_mask = measure.null_mask()
    for d in top.clopen_algebra().atoms:
        if d & ~null_mask == 0 and d:
            return StrongConditionReport(False, d)
    return StrongConditionReport(True, None)


def build_strong_vector_lifting(measure: RationalMeasure, top: FiniteTopology) -> VectorLifting:
    """Rows average mass-proportionally inside the containing clopen atom, so
    every clopen-measurable (= continuous) function is fixed."""
    sc = check_strong_condition(measure, top)
    if not sc:
        raise StrongConditionFails(sc.witness)
    algebra = measure.algebra
    nonnull = measure.nonnull_atom_indices()
    clopen = top.clopen_algebra()
    rows: List[Vec] = []
    for k in measure.null_atom_indices():
        d = clopen.atoms[clopen.atom_index_of_point(next(iter_points(algebra.atoms[k])))]
        inside = [j for j in nonnull if algebra.atoms[j] & ~d == 0]
        mass = sum((measure.atom_weights[j] for j in inside), ZERO)
        # the strong condition guarantees positive mass inside d
        row = [ZERO] * len(nonnull)
        for pos, j in enumerate(nonnull):
            if j in inside:
                row[pos] = measure.atom_weights[j] / mass
        rows.append(tuple(row))
    return VectorLifting(measure, rows)


class LiftingClass:
    __slots__ = (
        "vector",
        "order_preserving",
        "multiplicative",
        "order_witness",
        "mult_witness",
    )

    def __init__(self, vector, order_preserving, multiplicative, order_witness, mult_witness):
        self.vector = vector
        self.order_preserving = order_preserving
        self.multiplicative = multiplicative
        self.order_witness = order_witness
        self.mult_witness = mult_witness


def classify_lifting(L: VectorLifting) -> LiftingClass:
    """Order-preserving means nonnegative rows; multiplicative means each row
    is a coordinate evaluation.  Witnesses are function pairs that re-verify
    the failures."""
    vector = L.check_axioms()
    order_preserving = True
    order_witness = None
    multiplicative = True
    mult_witness = None
    for row, k in zip(L.rows, L.null_atoms):
        for pos, c in enumerate(row):
            if c < 0 and order_witness is None:
                f = MeasurableFunction.indicator(L.universe, L.algebra.atoms[L.nonnull_atoms[pos]])
                order_preserving = False
                order_witness = (f, L.algebra.atoms[k])
            if c != 0 and c != 1 and mult_witness is None:
                f = MeasurableFunction.indicator(L.universe, L.algebra.atoms[L.nonnull_atoms[pos]])
                multiplicative = False
                mult_witness = (f, f, L.algebra.atoms[k])
    if multiplicative and not order_preserving:
        raise AssertionError("a coordinate-evaluation lifting cannot break order")
    return LiftingClass(vector, order_preserving, multiplicative, order_witness, mult_witness)


def lift_through_extension(L: VectorLifting, ext: MeasureExtension) -> VectorLifting:
    """Transport a lifting through an extension by null sets.

    Every function measurable for the extension splits as a base-measurable
    part plus a null part; the transported lifting applies the old one to the
    base part.  In row form: a new null atom inside an old atom of positive
    measure reads the coordinate of that atom's surviving piece, and a new
    null atom inside an old null atom reads the old row through the pieces.
    The construction is verified per new atom against the decomposition.
    """
    if L.measure != ext.base:
        raise ValueError("lifting must live over the extension's base")
    base = ext.base
    extended = ext.extended
    base_alg = base.algebra
    ext_alg = extended.algebra
    new_nonnull = extended.nonnull_atom_indices()
    # each base atom of positive measure keeps exactly one surviving piece
    piece_of_base: Dict[int, int] = {}
    for pos, k in enumerate(new_nonnull):
        atom = ext_alg.atoms[k]
        parent = base_alg.atom_index_of_point(next(iter_points(atom)))
        if parent in piece_of_base:
            raise AssertionError("two surviving pieces inside one base atom")
        piece_of_base[parent] = pos
    null_row_of = {k: row for k, row in zip(L.null_atoms, L.rows)}
    rows: List[Vec] = []
    for k in extended.null_atom_indices():
        atom = ext_alg.atoms[k]
        parent = base_alg.atom_index_of_point(next(iter_points(atom)))
        row = [ZERO] * len(new_nonnull)
        if base.atom_weights[parent] > 0:
            row[piece_of_base[parent]] = ONE
        else:
            for c, j in zip(null_row_of[parent], L.nonnull_atoms):
                row[piece_of_base[j]] = c
        rows.append(tuple(row))
    out = VectorLifting(extended, rows)
    # cross-check against the decomposition route on new atom indicators
    for atom in ext_alg.atoms:
        f = MeasurableFunction.indicator(extended.universe, atom)
        g = measurable_representative(f.values, ext)
        if out.apply(f).values != L.apply(g).values:
            raise AssertionError("transported lifting disagrees with the decomposition route")
    return out


SET_MAP_PROPERTIES = ("L1", "L2", "N", "E", "V", "M", "theta", "C")


class GammaFlatReport:
    """Induced set map A ↦ {ρ(χ_A) ≥ 1} with property outcomes.

    The first five properties hold for every lifting; monotonicity,
    intersection-multiplicativity, and complement-preservation are evaluated
    and may fail, each failure carrying a witness pair.
    """

    __slots__ = ("mapping", "outcomes", "witnesses")

    def __init__(self, mapping, outcomes, witnesses):
        self.mapping = mapping
        self.outcomes = outcomes
        self.witnesses = witnesses


def gamma_flat(L: VectorLifting, cap: int = ENUM_CAP) -> GammaFlatReport:
    algebra = L.algebra
    universe = L.universe
    check_cap(algebra.element_count() ** 2, cap, "set-map property scan")
    mapping: Dict[int, int] = {}
    for A in algebra.elements(cap):
        rf = L.apply(MeasurableFunction.indicator(universe, A))
        img = 0
        for p, v in enumerate(rf.values):
            if v >= 1:
                img |= 1 << p
        mapping[A] = img
    outcomes: Dict[str, bool] = {}
    witnesses: Dict[str, object] = {}

    outcomes["N"] = mapping[0] == 0
    outcomes["E"] = mapping[universe.full] == universe.full
    outcomes["L1"] = True
    for A, img in mapping.items():
        d = A ^ img
        if d not in algebra or L.measure.of(d) != 0:
            outcomes["L1"] = False
            witnesses["L1"] = A
            break
    outcomes["L2"] = True
    for A, img in mapping.items():
        for B, img2 in mapping.items():
            d = A ^ B
            if d in algebra and L.measure.of(d) == 0 and img != img2:
                outcomes["L2"] = False
                witnesses["L2"] = (A, B)
                break
        if not outcomes["L2"]:
            break
    outcomes["V"] = True
    for A, img in mapping.items():
        if img & mapping[universe.full ^ A]:
            outcomes["V"] = False
            witnesses["V"] = A
            break
    outcomes["M"] = True
    for A, img in mapping.items():
        for B, img2 in mapping.items():
            if A & ~B == 0 and img & ~img2:
                outcomes["M"] = False
                witnesses["M"] = (A, B)
                break
        if not outcomes["M"]:
            break
    outcomes["theta"] = True
    for A, img in mapping.items():
        for B, img2 in mapping.items():
            if mapping[A & B] != img & img2:
                outcomes["theta"] = False
                witnesses["theta"] = (A, B)
                break
        if not outcomes["theta"]:
            break
    outcomes["C"] = True
    for A, img in mapping.items():
        if mapping[universe.full ^ A] != universe.full ^ img:
            outcomes["C"] = False
            witnesses["C"] = A
            break
    return GammaFlatReport(mapping, outcomes, witnesses)
