"""Stochastic processes over finite product spaces and their measurable
modifications.

A process is a family of per-row random variables, stored as one function on
the product universe whose vertical sections must all be measurable for
their row algebras.  The module decides the five-statement equivalence
circle around the existence of a top-measurable modification: direct
existence, measurability for the section-measurable part of the top algebra
extended by everywhere-null-section sets, measurability for two skew
extensions (null sections off a null row set, measurably so or not), and the
completed-space variant.  A modification is built constructively by the
threshold method: each sub-level set of the process is traded for a
top-measurable representative, and the modification takes the least
threshold whose representative contains the point.

The bridge to sectionwise maps checks that a family of row selectors keeps
every top-measurable function measurable exactly when it keeps every
top-measurable process one.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .lifting import FunctionLike, MeasurableFunction, VectorLifting, as_values
from .marginal import MarginalMap, MarginalDecision, is_2marginal_exact
from .measure import complete, is_complete
from .product import ProductPreconditionError, ProductSpace, check_fubini, rectangle
from .setalg import ENUM_CAP, FiniteAlgebra, check_cap, iter_points


class Process:
    """Family of per-row variables on a product space.

    Stored as the associated function on the product universe; construction
    fails loudly when some vertical section is not measurable for its row
    algebra, since such a family is not a process at all.
    """

    __slots__ = ("product_space", "function")

    def __init__(self, product_space: ProductSpace, values: FunctionLike):
        self.product_space = product_space
        self.function = (
            values
            if isinstance(values, MeasurableFunction) and values.universe == product_space.universe
            else MeasurableFunction(product_space.universe, as_values(values, product_space.universe))
        )
        ys = product_space.y_size
        for x in range(product_space.x_size):
            sec = self.function.values[x * ys : (x + 1) * ys]
            if not _section_measurable(sec, product_space.right_algebras[x]):
                raise ValueError(
                    f"vertical section at row {x} is not measurable for its row algebra"
                )

    @property
    def values(self) -> Tuple[Fraction, ...]:
        return self.function.values

    def section(self, x: int) -> Tuple[Fraction, ...]:
        ys = self.product_space.y_size
        return tuple(self.function.values[x * ys : (x + 1) * ys])

    def is_top_measurable(self) -> bool:
        return self.function.is_measurable(self.product_space.upsilon)

    def is_modification_of(self, other: "Process") -> bool:
        """Sections agree up to the per-row null sets.  Both section families
        are measurable, so this is pointwise equality off each row's null
        mask."""
        if self.product_space is not other.product_space and self.product_space.universe != other.product_space.universe:
            raise ValueError("processes live on different product spaces")
        return _agrees_off_null(self.values, other.values, self.product_space)

    def __eq__(self, other) -> bool:
        return isinstance(other, Process) and self.function == other.function

    def __hash__(self) -> int:
        return hash(self.function)

    def __repr__(self) -> str:
        return f"Process({self.function.values})"


def _section_measurable(sec: Sequence[Fraction], algebra: FiniteAlgebra) -> bool:
    for atom in algebra.atoms:
        pts = list(iter_points(atom))
        if any(sec[p] != sec[pts[0]] for p in pts[1:]):
            return False
    return True


def _agrees_off_null(a: Sequence[Fraction], b: Sequence[Fraction], ps: ProductSpace) -> bool:
    ys = ps.y_size
    for x in range(ps.x_size):
        nm = ps.right_measures[x].null_mask()
        for y in range(ys):
            if not nm >> y & 1 and a[x * ys + y] != b[x * ys + y]:
                return False
    return True


# ---------------------------------------------------------------------------
# the extension families


def _hereditary_region(ps: ProductSpace) -> int:
    """Largest member of the hereditary skew family: full rows over the null
    left part, the per-row null columns elsewhere.  The family itself is the
    whole powerset of this region, since exceptional row sets only need to
    sit inside a null left set and subsets of null masks stay admissible."""
    n_mask = ps.mu.null_mask()
    ys = ps.y_size
    region = 0
    for x in range(ps.x_size):
        if n_mask >> x & 1:
            region |= ((1 << ys) - 1) << (x * ys)
        else:
            region |= ps.right_measures[x].null_mask() << (x * ys)
    return region


def hereditary_skew_algebra(ps: ProductSpace) -> FiniteAlgebra:
    """Top algebra extended by the hereditary skew family.  Its atoms are the
    single points of the region together with the off-region parts of the
    top atoms."""
    region = _hereditary_region(ps)
    atoms = [1 << p for p in iter_points(region)]
    for a in ps.upsilon.atoms:
        rest = a & ~region
        if rest:
            atoms.append(rest)
    return FiniteAlgebra(ps.universe, atoms)


def _null_section_member(sec: int, algebra: FiniteAlgebra, null_mask: int) -> bool:
    return sec in algebra and sec & ~null_mask == 0


def _threshold_sets(values: Sequence[Fraction]) -> List[Tuple[Fraction, int]]:
    levels = sorted(set(values))
    out = []
    for t in levels:
        mask = 0
        for p, v in enumerate(values):
            if v <= t:
                mask |= 1 << p
        out.append((t, mask))
    return out


def _sections_of(E: int, ps: ProductSpace) -> List[int]:
    ys = ps.y_size
    full = (1 << ys) - 1
    return [(E >> (x * ys)) & full for x in range(ps.x_size)]


def _stmt_everywhere_null_sections(
    Q: Process, ps: ProductSpace, cap: int
) -> Tuple[bool, Optional[List[Tuple[Fraction, int]]]]:
    """Measurability for the section-measurable part of the top algebra
    extended by the sets whose every section is a null member of its row
    algebra.  Returns the per-threshold representatives when it holds."""
    check_cap(ps.upsilon.element_count(), cap, "top algebra enumeration")
    members = [
        A
        for A in ps.upsilon.elements(cap)
        if all(s in alg for s, alg in zip(_sections_of(A, ps), ps.right_algebras))
    ]
    null_masks = [m.null_mask() for m in ps.right_measures]
    reps: List[Tuple[Fraction, int]] = []
    for t, L in _threshold_sets(Q.values):
        # admissible representatives are closed under union, so the union of
        # all of them is the canonical largest one; it makes the threshold
        # construction produce the pointwise smallest modification
        rep = None
        for A in members:
            diff = _sections_of(A ^ L, ps)
            if all(
                _null_section_member(s, alg, nm)
                for s, alg, nm in zip(diff, ps.right_algebras, null_masks)
            ):
                rep = A if rep is None else rep | A
        if rep is None:
            return False, None
        reps.append((t, rep))
    return True, reps


def _stmt_skew_measurable_sections(Q: Process, ps: ProductSpace, cap: int) -> bool:
    """Measurability for the top algebra extended by the skew family whose
    members have null measurable sections off the null left part."""
    check_cap(ps.upsilon.element_count(), cap, "top algebra enumeration")
    n_mask = ps.mu.null_mask()
    null_masks = [m.null_mask() for m in ps.right_measures]
    live = [x for x in range(ps.x_size) if not n_mask >> x & 1]
    members = list(ps.upsilon.elements(cap))
    ys = ps.y_size
    full = (1 << ys) - 1
    for _, L in _threshold_sets(Q.values):
        if not any(
            all(
                _null_section_member(
                    ((A ^ L) >> (x * ys)) & full, ps.right_algebras[x], null_masks[x]
                )
                for x in live
            )
            for A in members
        ):
            return False
    return True


def _stmt_hereditary_skew(Q: Process, ps: ProductSpace) -> bool:
    return Q.function.is_measurable(hereditary_skew_algebra(ps))


def _consistent_assignment(
    n: int, groups: List[List[int]], forced: Dict[int, Fraction]
) -> Optional[List[Fraction]]:
    """Assign one rational per position so that each group is constant and
    the forced positions keep their values; unconstrained classes get zero.
    None when the constraints conflict."""
    parent = list(range(n))

    def find(p: int) -> int:
        while parent[p] != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p

    for g in groups:
        for q in g[1:]:
            parent[find(q)] = find(g[0])
    value: Dict[int, Fraction] = {}
    for p, v in forced.items():
        r = find(p)
        if r in value:
            if value[r] != v:
                return None
        else:
            value[r] = v
    return [value.get(find(p), Fraction(0)) for p in range(n)]


def _stmt_completed(Q: Process, ps: ProductSpace, cap: int) -> Optional[List[Fraction]]:
    """Completed-space variant: a function measurable for the completed top
    algebra, with sections measurable for the per-row completed algebras,
    agreeing with the process off each row's null mask.  Returns a witness
    or None."""
    ups_hat = complete(ps.upsilon_measure, cap).extended.algebra
    ys = ps.y_size
    n = ps.universe.size
    groups = [list(iter_points(a)) for a in ups_hat.atoms]
    forced: Dict[int, Fraction] = {}
    for x in range(ps.x_size):
        t_hat = complete(ps.right_measures[x], cap).extended.algebra
        groups += [
            [x * ys + y for y in iter_points(b)] for b in t_hat.atoms
        ]
        nm = ps.right_measures[x].null_mask()
        for y in range(ys):
            if not nm >> y & 1:
                forced[x * ys + y] = Q.values[x * ys + y]
    return _consistent_assignment(n, groups, forced)


# ---------------------------------------------------------------------------
# gates and the constructor


def modification_gate(ps: ProductSpace) -> bool:
    """Whether every subset of a null-row block with measurable sections
    belongs to the top algebra.  Such sets are unions of single-row pieces,
    so the per-point row atoms decide."""
    n_mask = ps.mu.null_mask()
    ys = ps.y_size
    for x in iter_points(n_mask):
        for b in ps.right_algebras[x].atoms:
            if (b << (x * ys)) not in ps.upsilon:
                return False
    return True


def modification_gate_reduced(ps: ProductSpace) -> bool:
    """Weaker gate: the null-row rectangles themselves are top sets."""
    yfull = ps.y_universe.full
    return all(
        rectangle(ps.sigma.atoms[k], yfull, ps.y_size) in ps.upsilon
        for k in ps.mu.null_atom_indices()
    )


def construct_modification(
    Q: Process, ps: Optional[ProductSpace] = None, cap: int = ENUM_CAP
) -> Optional[Process]:
    """Top-measurable process agreeing with Q up to the per-row null sets,
    or None when no such process exists.

    Built by the threshold method: each sub-level set of Q is exchanged for
    a top representative with measurable sections, differing from it only in
    null section members; the modification at a point is the least threshold
    whose representative contains it.  The preconditions are re-verified on
    the result, so a returned process is always a valid modification.
    """
    ps = ps or Q.product_space
    ok, reps = _stmt_everywhere_null_sections(Q, ps, cap)
    if not ok:
        return None
    n = ps.universe.size
    top = reps[-1][0]
    out = []
    for p in range(n):
        out.append(min((t for t, B in reps if B >> p & 1), default=top))
    U = Process(ps, out)
    assert U.is_top_measurable(), "threshold representative left the top algebra"
    assert U.is_modification_of(Q), "threshold construction broke a live value"
    return U


class ModificationReport:
    """Outcome of the five-statement equivalence circle.

    statements maps the statement names to booleans: "exists" (a
    top-measurable modification exists), "null-sections" (measurable for the
    section-measurable top part extended by everywhere-null-section sets),
    "skew" (extension by null measurable sections off a null row set),
    "skew-hereditary" (hereditary variant), "completed" (completed-space
    variant).  The gate reports whether subsets of null-row blocks with
    measurable sections are all top sets; under it the five statements are
    equivalent and `equivalent` is set.
    """

    __slots__ = (
        "statements",
        "modification",
        "completed_witness",
        "gate",
        "gate_reduced",
        "equivalent",
    )

    def __init__(self, statements, modification, completed_witness, gate, gate_reduced, equivalent):
        self.statements: Dict[str, bool] = statements
        self.modification: Optional[Process] = modification
        self.completed_witness = completed_witness
        self.gate = gate
        self.gate_reduced = gate_reduced
        self.equivalent: Optional[bool] = equivalent

    def holds(self, name: str) -> bool:
        return self.statements[name]

    def __repr__(self) -> str:
        flags = ", ".join(f"{k}={v}" for k, v in self.statements.items())
        return f"ModificationReport({flags}, gate={self.gate})"


MM_STATEMENTS = ("exists", "null-sections", "skew", "skew-hereditary", "completed")


def check_mm_statements(
    Q: Process, ps: Optional[ProductSpace] = None, cap: int = ENUM_CAP
) -> ModificationReport:
    """Evaluate the five modification statements and enforce the implication
    diagram.

    Requires the section condition on the product space; it supplies the
    standing hypotheses (top sets have measurable sections off the null left
    part, and null top sets have null sections there, which places the
    completion inside the hereditary skew extension).  The diagram
    exists ⟺ null-sections ⟹ skew ⟺ skew-hereditary, exists ⟹ completed ⟹
    skew-hereditary always holds; under the gate all five are equivalent,
    and under the reduced gate the last two are.  A violation raises
    AssertionError since it can only be a bug.
    """
    ps = ps or Q.product_space
    c_rep = check_fubini(ps, "C", cap=cap)
    if not c_rep.holds("C"):
        raise ProductPreconditionError(
            "modification statements need the section condition",
            c_rep.outcome("C").witness,
        )
    gate = modification_gate(ps)
    gate_reduced = modification_gate_reduced(ps)
    U = construct_modification(Q, ps, cap)
    b, _ = _stmt_everywhere_null_sections(Q, ps, cap)
    c = _stmt_skew_measurable_sections(Q, ps, cap)
    d = _stmt_hereditary_skew(Q, ps)
    e_witness = _stmt_completed(Q, ps, cap)
    statements = {
        "exists": U is not None,
        "null-sections": b,
        "skew": c,
        "skew-hereditary": d,
        "completed": e_witness is not None,
    }
    a, e = statements["exists"], statements["completed"]
    assert a == b, "modification existence must match the null-section extension"
    assert not b or c, "extension by a smaller family cannot lose measurability"
    assert c == d, "the two skew extensions must agree on processes"
    assert not a or e, "an actual modification also witnesses the completed variant"
    assert not e or d, "the completed variant must imply the hereditary extension"
    equivalent = None
    if gate:
        assert len(set(statements.values())) == 1, (
            "under the gate all five statements are equivalent"
        )
        equivalent = statements["exists"]
    if gate_reduced:
        assert d == e, "under the reduced gate the last two statements agree"
    return ModificationReport(statements, U, e_witness, gate, gate_reduced, equivalent)


def check_skew_modification_equivalence(
    Q: Process, ps: Optional[ProductSpace] = None, cap: int = ENUM_CAP
) -> bool:
    """A process has a modification measurable for the hereditary skew
    extension exactly when it is itself measurable for it.  Returns the
    common truth value; a one-sided outcome raises AssertionError.

    Needs the section condition, like the statement circle.
    """
    ps = ps or Q.product_space
    c_rep = check_fubini(ps, "C", cap=cap)
    if not c_rep.holds("C"):
        raise ProductPreconditionError(
            "the equivalence needs the section condition", c_rep.outcome("C").witness
        )
    rhs = _stmt_hereditary_skew(Q, ps)
    skew_alg = hereditary_skew_algebra(ps)
    ys = ps.y_size
    groups = [list(iter_points(a)) for a in skew_alg.atoms]
    forced: Dict[int, Fraction] = {}
    for x in range(ps.x_size):
        groups += [
            [x * ys + y for y in iter_points(b)] for b in ps.right_algebras[x].atoms
        ]
        nm = ps.right_measures[x].null_mask()
        for y in range(ys):
            if not nm >> y & 1:
                forced[x * ys + y] = Q.values[x * ys + y]
    witness = _consistent_assignment(ps.universe.size, groups, forced)
    lhs = witness is not None
    if lhs:
        W = Process(ps, witness)
        assert W.is_modification_of(Q)
        assert W.function.is_measurable(skew_alg)
    assert lhs == rhs, "skew modification existence must match skew measurability"
    return rhs


# ---------------------------------------------------------------------------
# the bridge to sectionwise maps


class BridgeReport:
    """Two-sided comparison: the row selector family keeps top-measurable
    functions measurable (marginal side) iff it keeps top-measurable
    processes measurable (process side).  With the hypotheses met and both
    sides decided exactly, disagreement raises; witness_process carries a
    common counterexample when both sides fail."""

    __slots__ = (
        "hypotheses",
        "marginal_side",
        "process_side",
        "witness_process",
        "holds",
        "note",
    )

    def __init__(self, hypotheses, marginal_side, process_side, witness_process, holds, note=""):
        self.hypotheses: Dict[str, bool] = hypotheses
        self.marginal_side: MarginalDecision = marginal_side
        self.process_side: MarginalDecision = process_side
        self.witness_process: Optional[Process] = witness_process
        self.holds: Optional[bool] = holds
        self.note = note

    def __repr__(self) -> str:
        return (
            f"BridgeReport(marginal={self.marginal_side.holds}, "
            f"process={self.process_side.holds}, holds={self.holds})"
        )


def marginal_modification_bridge(
    rho,
    ps: ProductSpace,
    cap: int = ENUM_CAP,
    samples: int = 200,
    seed: int = 0,
) -> BridgeReport:
    """Check that the sectionwise map of a row selector family preserves
    top measurability on all functions iff it does so on all processes.

    Hypotheses, evaluated and reported: the section condition, left-atom
    rectangles inside the top algebra, and one of the two side conditions
    (subsets of null-row blocks with measurable sections are top sets, or
    the selectors send zero to zero over a complete left measure).  Selector
    families of vector liftings are decided exactly; callables are sampled.
    """
    M = MarginalMap("vertical", rho, ps)
    c_rep = check_fubini(ps, "C", cap=cap)
    yfull = ps.y_universe.full
    zero_fixed = all(
        M.section_image(x, (Fraction(0),) * ps.y_size) == (Fraction(0),) * ps.y_size
        for x in range(ps.x_size)
    )
    hyp = {
        "C": c_rep.holds("C"),
        "left_rectangles_top": all(
            rectangle(a, yfull, ps.y_size) in ps.upsilon for a in ps.sigma.atoms
        ),
        "null_blocks_gate": modification_gate(ps),
        "zero_fixed_and_complete": zero_fixed and is_complete(ps.mu),
        "selectors_are_liftings": M.linear,
    }
    marginal_side = is_2marginal_exact(M, "measurable", cap=cap, samples=samples, seed=seed)
    process_side = is_2marginal_exact(
        M, "measurable-sections", cap=cap, samples=samples, seed=seed
    )
    applicable = (
        hyp["C"]
        and hyp["left_rectangles_top"]
        and (hyp["null_blocks_gate"] or hyp["zero_fixed_and_complete"])
    )
    witness = None
    if process_side.witness is not None:
        witness = Process(ps, process_side.witness)
    holds = None
    if applicable and marginal_side.proved and process_side.proved:
        assert marginal_side.holds == process_side.holds, (
            "the marginal side and the process side must agree under the hypotheses"
        )
        holds = marginal_side.holds
    note = "exact decisions" if M.linear else "sampled decisions for a callable selector"
    return BridgeReport(hyp, marginal_side, process_side, witness, holds, note)
