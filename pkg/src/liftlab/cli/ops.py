"""Task runners shared by the direct subcommands and scenario files.

Every op takes the resolved scenario, its argument object, a task-local RNG,
and the enumeration cap, and returns a detail dict plus an optional witness
payload.  Witness payloads carry enough structure to be re-verified against
the scenario alone, which is what `--verify-witness` replays.  Domain errors
a task can legitimately produce (failed class membership, nullity clashes,
missing strong condition, precondition failures) are returned as an "error"
detail so scenarios can expect them; anything else propagates.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple

from ..ideals import join_ideals, join_inclusion_checks
from ..lifting import (
    InfeasibleFixConstraints,
    MeasurableFunction,
    StrongConditionFails,
    ZeroTotalMass,
    check_strong_condition,
    classify_lifting,
)
from ..marginal import (
    MarginalMap,
    build_product_lifting,
    generates_sections,
    is_2marginal_exact,
    odot as odot_check,
)
from ..measure import NotInT, NullityViolation, extend_by_ideal, null_ideal
from ..processes import (
    Process,
    check_mm_statements,
    check_skew_modification_equivalence,
)
from ..product import (
    ProductPreconditionError,
    ProductSpace,
    check_fubini,
    extend_product_by_skew_ideal,
)
from ..setalg import (
    ENUM_CAP,
    FiniteAlgebra,
    SetFamily,
    Universe,
    generated_algebra,
    is_ideal_of_some_algebra,
    symdiff_closure,
    triple_in_T,
)
from .scenario import Scenario, ScenarioError, grid_str, points_of, rational_str

DOMAIN_ERRORS = (
    NotInT,
    NullityViolation,
    ZeroTotalMass,
    InfeasibleFixConstraints,
    StrongConditionFails,
    ProductPreconditionError,
)


class OpResult:
    __slots__ = ("details", "witness")

    def __init__(self, details: Dict[str, Any], witness: Optional[Dict[str, Any]] = None):
        self.details = details
        self.witness = witness


class Op:
    """Runner plus reference schema (argument name -> scenario section) so
    scenario validation can resolve every reference at parse time."""

    def __init__(
        self,
        name: str,
        refs: Dict[str, str],
        run: Callable[[Scenario, Dict[str, Any], random.Random, int], OpResult],
        verify: Optional[Callable[[Scenario, Dict[str, Any], Dict[str, Any], int], bool]] = None,
    ):
        self.name = name
        self.refs = refs
        self.run = run
        self.verify = verify

    def validate_refs(self, scn: Scenario, args: Dict[str, Any], where: str) -> None:
        for arg, section in self.refs.items():
            if arg not in args:
                continue
            value = args[arg]
            names = value if isinstance(value, list) else [value]
            for n in names:
                scn._get(section, n, f"{where}.{arg}")


def _pts(u: Universe, mask: int) -> List[str]:
    return points_of(u, mask)


def _triple_witness(u: Universe, witness: Optional[Tuple[int, int]]) -> Optional[Dict[str, Any]]:
    if witness is None:
        return None
    A, I = witness
    return {"A": _pts(u, A), "I": _pts(u, I), "intersection": _pts(u, A & I)}


# -- check-triple -------------------------------------------------------------


def _run_check_triple(scn, args, rng, cap) -> OpResult:
    alg = scn.algebra(args.get("algebra"), "args.algebra")
    ideal = scn.ideal(args.get("ideal"), "args.ideal")
    u = alg.universe
    tc = triple_in_T(alg, ideal, cap)
    sc = symdiff_closure(alg, ideal, cap)
    union = SetFamily(u, list(alg.elements(cap)) + list(ideal.members))
    gen = generated_algebra(union)
    details: Dict[str, Any] = {
        "holds": bool(tc),
        "symdiff_size": len(sc.family.members),
        "symdiff_is_algebra": sc.is_algebra,
        "generated_size": gen.element_count(),
        "witness": _triple_witness(u, tc.witness),
    }
    if len(sc.family.members) <= 32:
        details["symdiff_members"] = [_pts(u, m) for m in sc.family.members]
    return OpResult(details, witness=details["witness"])


def _verify_check_triple(scn, args, witness, cap) -> bool:
    alg = scn.algebra(args.get("algebra"), "args.algebra")
    ideal = scn.ideal(args.get("ideal"), "args.ideal")
    u = alg.universe
    A = u.subset(witness["A"])
    I = u.subset(witness["I"])
    return A in alg and I in ideal and (A & I) not in ideal


# -- gen-algebra ---------------------------------------------------------------


def _run_gen_algebra(scn, args, rng, cap) -> OpResult:
    fam = scn.family(args.get("family"), "args.family")
    gen = generated_algebra(fam)
    return OpResult(
        {
            "atom_count": len(gen.atoms),
            "size": gen.element_count(),
            "atoms": [_pts(fam.universe, a) for a in gen.atoms],
        }
    )


# -- extend ---------------------------------------------------------------------


def _run_extend(scn, args, rng, cap) -> OpResult:
    m = scn.measure(args.get("measure"), "args.measure")
    ideal = scn.ideal(args.get("ideal"), "args.ideal")
    u = m.universe
    try:
        ext = extend_by_ideal(m, ideal, cap)
    except NotInT as e:
        w = _triple_witness(u, e.witness)
        return OpResult({"error": "NotInT", "witness": w}, witness=w)
    except NullityViolation as e:
        w = {"set": _pts(u, e.witness)}
        return OpResult({"error": "NullityViolation", "witness": w}, witness=w)
    ext_m = ext.extended
    null = null_ideal(ext_m, cap)
    details = {
        "extended_atoms": [_pts(u, a) for a in ext_m.algebra.atoms],
        "weights": [rational_str(w) for w in ext_m.atom_weights],
        "extended_size": ext_m.algebra.element_count(),
        "null_member_count": len(null.members),
    }
    return OpResult(details)


def _verify_extend(scn, args, witness, cap) -> bool:
    m = scn.measure(args.get("measure"), "args.measure")
    ideal = scn.ideal(args.get("ideal"), "args.ideal")
    u = m.universe
    if "set" in witness:  # nullity clash: member measurable with positive mass
        s = u.subset(witness["set"])
        return s in ideal and s in m.algebra and m.of(s) != 0
    A = u.subset(witness["A"])
    I = u.subset(witness["I"])
    return A in m.algebra and I in ideal and (A & I) not in ideal


# -- join-ideals ------------------------------------------------------------------


def _run_join_ideals(scn, args, rng, cap) -> OpResult:
    I = scn.ideal(args.get("left"), "args.left")
    J = scn.ideal(args.get("right"), "args.right")
    u = I.universe
    jr = join_ideals(I, J, cap)
    details: Dict[str, Any] = {
        "left_is_ideal": is_ideal_of_some_algebra(I),
        "right_is_ideal": is_ideal_of_some_algebra(J),
        "join_size": len(jr.join.members),
        "decomposition_valid": jr.verify(),
    }
    if len(jr.join.members) <= 32:
        details["join_members"] = [_pts(u, m) for m in jr.join.members]
    if "algebra" in args:
        sigma = scn.algebra(args["algebra"], "args.algebra")
        rep = join_inclusion_checks(I, J, sigma, cap)
        details.update(
            {
                "b_intersection_included": rep.b_intersection_included,
                "triple_preserved": rep.triple_preserved,
                "iterated_size": len(rep.iterated_family.members),
                "joint_size": len(rep.joint_family.members),
                "iterated_equals_joint": rep.iterated_symdiff_equal,
                "iterated_preconditions": rep.iterated_preconditions,
            }
        )
    return OpResult(details)


# -- product-check ---------------------------------------------------------------


def _fubini_witness(ps: ProductSpace, name: str, w: Any) -> Optional[Dict[str, Any]]:
    # decoded by shape, not by name: a stacked condition inherits the witness
    # of the prerequisite that failed first
    if w is None:
        return None
    pu = ps.universe
    if isinstance(w, int):
        return {"condition": name, "set": _pts(pu, w)}
    if isinstance(w, tuple) and len(w) == 3:
        a, b, c = w
        if isinstance(b, str):  # clause witness from the section conditions
            out: Dict[str, Any] = {"condition": name, "set": _pts(pu, a), "clause": b}
            if b == "integral mismatch":
                out["top_value"] = rational_str(c[0])
                out["integral"] = rational_str(c[1])
            elif b == "section":
                factor = ps.right_measures[0].universe if name == "Cbar" else ps.mu.universe
                out["at"] = factor.names[c]
            else:  # constancy failed on a factor atom
                factor = ps.right_measures[0].universe if name == "Cbar" else ps.mu.universe
                out["atom"] = _pts(factor, c)
            return out
        if isinstance(b, Fraction):  # top measure vs product measure on an atom
            return {
                "condition": name,
                "set": _pts(pu, a),
                "top_value": rational_str(b),
                "product_value": rational_str(c),
            }
        return {  # non-null rectangle atom split by two top atoms
            "condition": name,
            "rectangle_atom": _pts(pu, a),
            "heavy": [_pts(pu, b), _pts(pu, c)],
        }
    return {"condition": name, "witness": str(w)}


def _run_product_check(scn, args, rng, cap) -> OpResult:
    ps = scn.product(args.get("product"), "args.product")
    which = args.get("which", "all")
    ideal = scn.ideal(args["ideal"], "args.ideal") if "ideal" in args else None
    rep = check_fubini(ps, which, I=ideal, cap=cap)
    details: Dict[str, Any] = {"conditions": {}}
    witness = None
    for name, outcome in rep.results.items():
        w = _fubini_witness(ps, name, outcome.witness)
        details["conditions"][name] = {"holds": bool(outcome), "witness": w}
        if w is not None and witness is None:
            witness = w
    details["all_hold"] = all(bool(o) for o in rep.results.values())
    return OpResult(details, witness=witness)


def _verify_product_check(scn, args, witness, cap) -> bool:
    ps = scn.product(args.get("product"), "args.product")
    ideal = scn.ideal(args["ideal"], "args.ideal") if "ideal" in args else None
    name = witness["condition"]
    rep = check_fubini(ps, name, I=ideal, cap=cap)
    again = _fubini_witness(ps, name, rep.outcome(name).witness)
    return again == witness


# -- build-lifting -----------------------------------------------------------------


def _lifting_from_args(scn, args, where="args"):
    if "lifting" in args:
        return scn.lifting(args["lifting"], where + ".lifting")
    return scn._lifting_from(args, where)


def _run_build_lifting(scn, args, rng, cap) -> OpResult:
    try:
        lf = _lifting_from_args(scn, args)
    except StrongConditionFails as e:
        m = scn.measure(args["measure"], "args.measure")
        w = {"clopen_null_atom": _pts(m.universe, e.witness)}
        return OpResult({"error": "StrongConditionFails", "witness": w}, witness=w)
    except DOMAIN_ERRORS as e:
        return OpResult({"error": type(e).__name__, "message": str(e)})
    m = lf.measure
    u = m.universe
    cls = classify_lifting(lf)
    details: Dict[str, Any] = {
        "row_count": len(lf.rows),
        "rows": [[rational_str(v) for v in row] for row in lf.rows],
        "vector_axioms": cls.vector,
        "order_preserving": cls.order_preserving,
        "multiplicative": cls.multiplicative,
        "null_atoms": [_pts(u, m.algebra.atoms[k]) for k in m.null_atom_indices()],
    }
    witness = None
    if "topology" in args:
        top = scn.topology(args["topology"], "args.topology")
        sc = check_strong_condition(m, top)
        details["strong_condition"] = sc.ok
        if sc.witness is not None:
            witness = {"clopen_null_atom": _pts(u, sc.witness)}
            details["strong_witness"] = witness
    return OpResult(details, witness=witness)


def _verify_build_lifting(scn, args, witness, cap) -> bool:
    m = scn.measure(args["measure"], "args.measure") if "measure" in args else scn.lifting(
        args["lifting"], "args.lifting"
    ).measure
    if "clopen_null_atom" not in witness:
        return False
    top = scn.topology(args["topology"], "args.topology")
    mask = m.universe.subset(witness["clopen_null_atom"])
    null = m.null_mask()
    return mask in top.clopen_algebra() and mask & ~null == 0 and mask != 0


# -- build-product-lifting ------------------------------------------------------------


def _run_build_product_lifting(scn, args, rng, cap) -> OpResult:
    ps = scn.product(args.get("product"), "args.product")
    gamma = scn.lifting(args.get("gamma"), "args.gamma")
    eta = scn.lifting(args.get("eta"), "args.eta")
    tops = None
    if "left_topology" in args or "right_topology" in args:
        tops = (
            scn.topology(args.get("left_topology"), "args.left_topology"),
            scn.topology(args.get("right_topology"), "args.right_topology"),
        )
    try:
        pl = build_product_lifting(gamma, eta, ps, topologies=tops, cap=cap)
    except DOMAIN_ERRORS as e:
        return OpResult({"error": type(e).__name__, "message": str(e)})
    kinds: Dict[str, int] = {}
    for entry in pl.certificate["basis"]:
        kinds[entry["kind"]] = kinds.get(entry["kind"], 0) + 1
    details = {
        "dimension": pl.certificate["dimension"],
        "mode": pl.certificate["mode"],
        "strong": pl.strong,
        "basis_kinds": kinds,
        "tensor_identity": pl.verify_tensor_identity(samples=25, seed=rng.randrange(1 << 30)),
        "sections_measurable": pl.sections_measurable(),
    }
    return OpResult(details)


# -- marginal-check ----------------------------------------------------------------


def _marginal_setup(scn, args, cap):
    ps = scn.product(args.get("product"), "args.product")
    if args.get("extend_by_nil"):
        ps = extend_product_by_skew_ideal(ps, null_ideal(ps.mu), cap)
    if "liftings" in args:
        inner = [scn.lifting(n, "args.liftings") for n in args["liftings"]]
    else:
        inner = scn.lifting(args.get("lifting"), "args.lifting")
    direction = args.get("direction", "vertical")
    M = MarginalMap(direction, inner, ps)
    return ps, M


def _run_marginal_check(scn, args, rng, cap) -> OpResult:
    ps, M = _marginal_setup(scn, args, cap)
    scope = args.get("scope", "measurable")
    dec = is_2marginal_exact(
        M, scope, cap=cap, samples=args.get("samples", 200), seed=rng.randrange(1 << 30)
    )
    details: Dict[str, Any] = {
        "holds": dec.holds,
        "proved": dec.proved,
        "scope": scope,
        "direction": M.direction,
        "extended": bool(args.get("extend_by_nil")),
        "note": dec.note,
        "witness": None,
    }
    witness = None
    if dec.witness is not None:
        witness = {"function": grid_str(dec.witness.values, ps.x_size, ps.y_size)}
        details["witness"] = witness
    if args.get("generates"):
        gen = generates_sections(M, cap=cap, samples=args.get("samples", 200), seed=rng.randrange(1 << 30))
        details["generates_sections"] = gen.holds
    return OpResult(details, witness=witness)


def _verify_marginal_check(scn, args, witness, cap) -> bool:
    ps, M = _marginal_setup(scn, args, cap)
    values = [Fraction(v) for row in witness["function"] for v in row]
    f = MeasurableFunction(ps.universe, values)
    if not f.is_measurable(ps.upsilon):
        return False
    scope = args.get("scope", "measurable")
    if scope == "measurable":
        return not M.apply(f).is_measurable(ps.upsilon)
    if scope == "measurable-sections":
        ys = ps.y_size
        for x in range(ps.x_size):
            sec = values[x * ys : (x + 1) * ys]
            for atom in ps.right_algebras[x].atoms:
                pts = [i for i in range(ys) if atom >> i & 1]
                if any(sec[p] != sec[pts[0]] for p in pts[1:]):
                    return False
        return not M.apply(f).is_measurable(ps.upsilon)
    # almost-everywhere scope: the violation is not pointwise, so replay the
    # exact decision and confirm it reproduces this witness
    dec = is_2marginal_exact(M, scope, cap=cap)
    return dec.holds is False and dec.witness is not None and tuple(dec.witness.values) == tuple(values)


# -- odot -----------------------------------------------------------------------------


def _run_odot(scn, args, rng, cap) -> OpResult:
    ps = scn.product(args.get("product"), "args.product")
    delta = scn.lifting(args.get("delta"), "args.delta")
    eta = scn.lifting(args.get("eta"), "args.eta")
    try:
        _, rep = odot_check(
            delta, eta, ps, samples=args.get("samples", 8), seed=rng.randrange(1 << 30), cap=cap
        )
    except DOMAIN_ERRORS as e:
        return OpResult({"error": type(e).__name__, "message": str(e)})
    details = {
        "hypotheses": dict(rep.hypotheses),
        "clauses": {
            name: {"applicable": c.applicable, "holds": c.holds, "proved": c.proved}
            for name, c in rep.clauses.items()
        },
        "ok": rep.ok(),
    }
    return OpResult(details)


# -- modify-process ---------------------------------------------------------------------


def _run_modify_process(scn, args, rng, cap) -> OpResult:
    Q = scn.process(args.get("process"), "args.process")
    ps = Q.product_space
    try:
        rep = check_mm_statements(Q, cap=cap)
    except ProductPreconditionError as e:
        return OpResult({"error": "ProductPreconditionError", "message": str(e)})
    details: Dict[str, Any] = {
        "statements": dict(rep.statements),
        "gate": rep.gate,
        "gate_reduced": rep.gate_reduced,
        "equivalent": rep.equivalent,
        "modification": None,
        "skew_equivalence": check_skew_modification_equivalence(Q, cap=cap),
    }
    witness = None
    if rep.modification is not None:
        witness = {"modification": grid_str(rep.modification.values, ps.x_size, ps.y_size)}
        details["modification"] = witness["modification"]
    return OpResult(details, witness=witness)


def _verify_modify_process(scn, args, witness, cap) -> bool:
    Q = scn.process(args.get("process"), "args.process")
    ps = Q.product_space
    values = [Fraction(v) for row in witness["modification"] for v in row]
    U = Process(ps, values)
    return U.is_top_measurable() and U.is_modification_of(Q)


OPS: Dict[str, Op] = {
    op.name: op
    for op in (
        Op(
            "check-triple",
            {"algebra": "algebras", "ideal": "ideals"},
            _run_check_triple,
            _verify_check_triple,
        ),
        Op("gen-algebra", {"family": "families"}, _run_gen_algebra),
        Op(
            "extend",
            {"measure": "measures", "ideal": "ideals"},
            _run_extend,
            _verify_extend,
        ),
        Op(
            "join-ideals",
            {"left": "ideals", "right": "ideals", "algebra": "algebras"},
            _run_join_ideals,
        ),
        Op(
            "product-check",
            {"product": "products", "ideal": "ideals"},
            _run_product_check,
            _verify_product_check,
        ),
        Op(
            "build-lifting",
            {"lifting": "liftings", "measure": "measures", "topology": "topologies"},
            _run_build_lifting,
            _verify_build_lifting,
        ),
        Op(
            "build-product-lifting",
            {
                "product": "products",
                "gamma": "liftings",
                "eta": "liftings",
                "left_topology": "topologies",
                "right_topology": "topologies",
            },
            _run_build_product_lifting,
        ),
        Op(
            "marginal-check",
            {"product": "products", "lifting": "liftings", "liftings": "liftings"},
            _run_marginal_check,
            _verify_marginal_check,
        ),
        Op(
            "odot",
            {"product": "products", "delta": "liftings", "eta": "liftings"},
            _run_odot,
        ),
        Op(
            "modify-process",
            {"process": "processes"},
            _run_modify_process,
            _verify_modify_process,
        ),
    )
}
