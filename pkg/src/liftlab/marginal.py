"""Marginal operators over finite product spaces.

Tensor products and separable rank of product functions; sectionwise image
maps that apply a selector along rows or columns and write zero outside its
domain; the marginal conditions for such maps; the composite of a column map
after a row map.  Product liftings close the module: vector liftings on the
top space compatible with a pair of factor liftings, including the variant
whose image sections are all fixed by the row selector.

The exact decision procedures all follow one scheme.  Top-measurable
functions form a rational subspace W; requiring a section to be measurable
cuts out a subspace; for every pattern S of exceptional rows the candidate
functions with that exact pattern fill the complement of finitely many
proper subspaces of a pattern cell U_S, on which the sectionwise map is
linear.  A violating function with pattern S exists iff the subspace of good
candidates is proper in U_S and every pattern-realizability subspace is
proper too; a rational vector space is never a finite union of proper
subspaces, so a moment-curve sweep then yields a witness, which is
re-verified by direct evaluation before being reported.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .lifting import (
    FiniteTopology,
    FunctionLike,
    MeasurableFunction,
    VectorLifting,
    as_values,
    build_vector_lifting,
    check_strong_condition,
    classify_lifting,
)
from .linalg import (
    ONE,
    ZERO,
    Subspace,
    Vec,
    extend_to_basis,
    indicator,
    nullspace,
    outside_all,
    solve,
    vec_add,
    vec_scale,
    vec_sub,
    zero_vec,
)
from .measure import RationalMeasure, is_complete, null_ideal
from .product import (
    ProductPreconditionError,
    ProductSpace,
    check_fubini,
    extend_product_by_skew_ideal,
    product_universe,
    rectangle,
    section_h,
    section_repair,
    section_v,
)
from .setalg import ENUM_CAP, FiniteAlgebra, check_cap, iter_points


def _measurable_values(values: Sequence[Fraction], algebra: FiniteAlgebra) -> bool:
    for atom in algebra.atoms:
        pts = list(iter_points(atom))
        if any(values[p] != values[pts[0]] for p in pts[1:]):
            return False
    return True


def _quotient_coords(values: Sequence[Fraction], m: RationalMeasure) -> Vec:
    """Coordinates of the class of a measurable function: its values on the
    atoms of positive measure."""
    out = []
    for k in m.nonnull_atom_indices():
        pts = list(iter_points(m.algebra.atoms[k]))
        v0 = values[pts[0]]
        if any(values[p] != v0 for p in pts[1:]):
            raise ValueError("function is not measurable")
        out.append(v0)
    return tuple(out)


# ---------------------------------------------------------------------------
# tensors


def tensor(f: FunctionLike, g: FunctionLike, ps: Optional[ProductSpace] = None) -> MeasurableFunction:
    """Product-form function (x, y) ↦ f(x)·g(y) on the product universe."""
    if ps is not None:
        fv = as_values(f, ps.x_universe)
        gv = as_values(g, ps.y_universe)
        uni = ps.universe
    else:
        if not isinstance(f, MeasurableFunction) or not isinstance(g, MeasurableFunction):
            raise ValueError("raw value sequences need an explicit product space")
        fv, gv = f.values, g.values
        uni = product_universe(f.universe, g.universe)
    return MeasurableFunction(uni, [a * b for a in fv for b in gv])


def product_topology(
    left: FiniteTopology,
    right: FiniteTopology,
    ps: ProductSpace,
    cap: int = ENUM_CAP,
) -> FiniteTopology:
    """Smallest topology on the product universe containing every open
    rectangle.  Intersections of unions of rectangles are again unions of
    rectangles, so closing the rectangle base under binary union suffices."""
    if left.universe != ps.x_universe or right.universe != ps.y_universe:
        raise ValueError("factor topologies must live on the factor universes")
    base = {rectangle(u, v, ps.y_size) for u in left.opens for v in right.opens}
    opens = set(base)
    frontier = set(base)
    while frontier:
        check_cap(len(opens), cap, "product topology enumeration")
        fresh = set()
        for a in frontier:
            for b in base:
                u = a | b
                if u not in opens:
                    opens.add(u)
                    fresh.add(u)
        frontier = fresh
    return FiniteTopology(ps.universe, opens)


class SeparableRank:
    """Least number of product-form terms summing to the function, with an
    exact decomposition.  `continuous` reports whether all factors are
    continuous for the given factor topologies (None when no topologies were
    supplied)."""

    __slots__ = ("rank", "pairs", "continuous")

    def __init__(self, rank: int, pairs, continuous: Optional[bool]):
        self.rank = rank
        self.pairs = tuple(pairs)
        self.continuous = continuous

    def __repr__(self) -> str:
        return f"SeparableRank({self.rank}, continuous={self.continuous})"


def separable_rank(
    h: FunctionLike,
    ps: ProductSpace,
    topologies: Optional[Tuple[FiniteTopology, FiniteTopology]] = None,
) -> SeparableRank:
    """Exact decomposition h = Σ f_i ⊗ g_i of minimal length.

    The g_i are a basis of the span of the vertical sections, so the rank is
    that span's dimension; the f_i are coordinate functions recovered through
    an invertible minor, which places them in the span of the horizontal
    sections.  When factor topologies are given, continuity of all the
    factors is decided as well (sections of a separately continuous function
    are continuous, and both spans consist of continuous functions then).
    """
    hv = as_values(h, ps.universe)
    xs, ys = ps.x_size, ps.y_size
    rows = [tuple(hv[x * ys + y] for y in range(ys)) for x in range(xs)]
    picked = extend_to_basis([], rows)
    gs = [rows[i] for i in picked]
    r = len(gs)
    # coordinates of every row in the chosen section basis
    eqs = [tuple(g[y] for g in gs) for y in range(ys)]
    fs: List[List[Fraction]] = [[] for _ in range(r)]
    for x in range(xs):
        c = solve(eqs, rows[x])
        assert c is not None, "vertical section escaped its own span"
        for i in range(r):
            fs[i].append(c[i])
    # the decomposition must re-sum exactly
    for x in range(xs):
        for y in range(ys):
            total = sum((fs[i][x] * gs[i][y] for i in range(r)), ZERO)
            assert total == hv[x * ys + y], "decomposition does not re-sum"
    cols = Subspace([tuple(hv[x * ys + y] for x in range(xs)) for y in range(ys)], xs)
    for i in range(r):
        assert cols.contains(tuple(fs[i])), "coordinate factor escaped the column span"
    continuous = None
    if topologies is not None:
        lt, rt = topologies
        continuous = all(lt.continuous(fs[i]) for i in range(r)) and all(
            rt.continuous(gs[i]) for i in range(r)
        )
    pairs = [
        (MeasurableFunction(ps.x_universe, fs[i]), MeasurableFunction(ps.y_universe, gs[i]))
        for i in range(r)
    ]
    return SeparableRank(r, pairs, continuous)


def tensor_basis_check(
    gamma_basis: Sequence[FunctionLike],
    eta_basis: Sequence[FunctionLike],
    ps: ProductSpace,
) -> bool:
    """Whether the pairwise tensors of two factor quotient bases form a
    quotient basis on the product.

    Needs the rectangle algebra inside the top space with product weights;
    tensors are then top-measurable and classes are read off on the top atoms
    of positive measure.
    """
    rep = check_fubini(ps, which="P1")
    if not rep.holds("P1"):
        raise ProductPreconditionError(
            "tensor bases need the rectangle algebra inside the top space "
            "with product weights",
            rep.outcome("P1").witness,
        )
    nu = ps.right_measures[0]
    fs = [as_values(f, ps.x_universe) for f in gamma_basis]
    gs = [as_values(g, ps.y_universe) for g in eta_basis]
    left = Subspace([_quotient_coords(f, ps.mu) for f in fs], len(ps.mu.nonnull_atom_indices()))
    if left.dim != len(fs) or left.dim != left.ambient:
        raise ValueError("left family is not a basis of the left quotient")
    right = Subspace([_quotient_coords(g, nu) for g in gs], len(nu.nonnull_atom_indices()))
    if right.dim != len(gs) or right.dim != right.ambient:
        raise ValueError("right family is not a basis of the right quotient")
    ups = ps.upsilon_measure
    coords = [
        _quotient_coords(tensor(f, g, ps).values, ups) for f in fs for g in gs
    ]
    span = Subspace(coords, len(ups.nonnull_atom_indices()))
    return span.dim == len(fs) * len(gs)


# ---------------------------------------------------------------------------
# sectionwise image maps


RowCallable = Callable[[int, Tuple[Fraction, ...]], Optional[Sequence]]
InnerMap = Union[VectorLifting, Sequence[VectorLifting], RowCallable]


class MarginalMap:
    """Sectionwise image map over a product space.

    With direction "vertical" the inner selector acts on every vertical
    section (the row over a left point) that lies in its domain, and the
    image row is written as zero otherwise; "horizontal" mirrors this along
    columns with a selector on the left factor.  A vector-lifting inner
    accepts exactly the sections measurable for that row's algebra.  Inner
    forms: one VectorLifting (broadcast), a sequence with one VectorLifting
    per row (vertical only), or a callable (index, section_values) -> values,
    returning None outside its domain.
    """

    __slots__ = ("direction", "inner", "product_space", "liftings", "linear")

    def __init__(self, direction: str, inner: InnerMap, product_space: ProductSpace):
        if direction not in ("vertical", "horizontal"):
            raise ValueError("direction must be 'vertical' or 'horizontal'")
        self.direction = direction
        self.product_space = product_space
        self.inner = inner
        ps = product_space
        count = ps.x_size if direction == "vertical" else ps.y_size
        liftings: Optional[Tuple[VectorLifting, ...]] = None
        if isinstance(inner, VectorLifting):
            liftings = (inner,) * count
        elif isinstance(inner, (list, tuple)):
            if direction != "vertical":
                raise ValueError("per-index selector families are rowwise only")
            if len(inner) != count or not all(isinstance(L, VectorLifting) for L in inner):
                raise ValueError("one vector lifting per row required")
            liftings = tuple(inner)
        elif not callable(inner):
            raise ValueError("inner must be a vector lifting, a family of them, or a callable")
        if liftings is not None:
            expected = ps.right_measures if direction == "vertical" else (ps.mu,) * count
            for L, m in zip(liftings, expected):
                if L.measure != m:
                    raise ValueError("selector measure does not match its section space")
        self.liftings = liftings
        self.linear = liftings is not None

    def section_image(self, i: int, sec: Tuple[Fraction, ...]) -> Optional[Tuple[Fraction, ...]]:
        """Image of one section under the inner selector, or None when the
        section is out of its domain."""
        if self.liftings is not None:
            L = self.liftings[i]
            if not _measurable_values(sec, L.algebra):
                return None
            return L.apply(sec).values
        out = self.inner(i, sec)
        if out is None:
            return None
        out = tuple(Fraction(v) for v in out)
        if len(out) != len(sec):
            raise ValueError("inner callable returned a section of the wrong width")
        return out

    def _iter_sections(self, values: Sequence[Fraction]):
        ps = self.product_space
        ys = ps.y_size
        if self.direction == "vertical":
            for x in range(ps.x_size):
                yield x, tuple(values[x * ys : (x + 1) * ys])
        else:
            for y in range(ys):
                yield y, tuple(values[x * ys + y] for x in range(ps.x_size))

    def pattern(self, f: FunctionLike) -> Tuple[int, ...]:
        """Indices of the sections written as zero (out of the inner domain)."""
        vals = as_values(f, self.product_space.universe)
        return tuple(i for i, sec in self._iter_sections(vals) if self.section_image(i, sec) is None)

    def apply(self, f: FunctionLike) -> MeasurableFunction:
        ps = self.product_space
        vals = as_values(f, ps.universe)
        ys = ps.y_size
        out = [ZERO] * len(vals)
        for i, sec in self._iter_sections(vals):
            img = self.section_image(i, sec)
            if img is None:
                continue
            if self.direction == "vertical":
                out[i * ys : (i + 1) * ys] = list(img)
            else:
                for x in range(ps.x_size):
                    out[x * ys + i] = img[x]
        return MeasurableFunction(ps.universe, out)


def eta_bullet(M: MarginalMap, f: FunctionLike) -> MeasurableFunction:
    """Image of f under the sectionwise map; the direction tag on the map
    decides whether the selector family acts along rows or columns."""
    return M.apply(f)


def row_invariance_check(M: MarginalMap, f: FunctionLike) -> bool:
    """Every section of the image is fixed by its own selector.  Image
    sections are selector outputs or zero, so this holds whenever the
    selectors are idempotent and send zero to zero."""
    img = M.apply(f).values
    return all(M.section_image(i, sec) == sec for i, sec in M._iter_sections(img))


def class_respect_check(M: MarginalMap, f: FunctionLike, g: FunctionLike) -> bool:
    """Columns of the two images agree off the largest null left set.  The
    caller supplies f and g equal up to a top-null set; the conclusion needs
    the section condition and class-respecting row selectors, and is stated
    for the completed left measure, hence pointwise off the null rows."""
    if M.direction != "vertical":
        raise ValueError("class respect is checked for rowwise maps")
    ps = M.product_space
    fi = M.apply(f).values
    gi = M.apply(g).values
    nm = ps.mu.null_mask()
    ys = ps.y_size
    return all(
        fi[x * ys + y] == gi[x * ys + y]
        for x in range(ps.x_size)
        if not nm >> x & 1
        for y in range(ys)
    )


# ---------------------------------------------------------------------------
# marginal decisions


MARGINAL_SCOPES = ("measurable", "measurable-sections", "measurable-sections-ae")


class MarginalDecision:
    """Outcome of a marginal-condition check.

    holds: every function in the scope keeps a top-measurable image.
    proved: the verdict is exact (subspace method, exhaustion, or a
    re-verified witness); a statistical pass stays unproved.  witness is a
    violating function re-verified by direct evaluation, pattern its
    exceptional section indices.
    """

    __slots__ = ("holds", "scope", "witness", "pattern", "proved", "note")

    def __init__(self, holds, scope, witness=None, pattern=(), proved=True, note=""):
        self.holds = holds
        self.scope = scope
        self.witness = witness
        self.pattern = pattern
        self.proved = proved
        self.note = note

    def __bool__(self) -> bool:
        return self.holds

    def __repr__(self) -> str:
        state = "holds" if self.holds else f"fails at pattern {self.pattern}"
        tag = "proved" if self.proved else "sampled"
        return f"MarginalDecision({self.scope}: {state}, {tag})"


def _append_note(note: str, extra: str) -> str:
    return f"{note}; {extra}" if note else extra


def _top_space(ps: ProductSpace) -> Subspace:
    n = ps.universe.size
    return Subspace([indicator(a, n) for a in ps.upsilon.atoms], n)


def _row_pairs(ps: ProductSpace, x: int) -> List[Tuple[int, int]]:
    ys = ps.y_size
    out = []
    for atom in ps.right_algebras[x].atoms:
        pts = list(iter_points(atom))
        out += [(x * ys + pts[0], x * ys + q) for q in pts[1:]]
    return out


def _col_pairs(ps: ProductSpace, y: int) -> List[Tuple[int, int]]:
    ys = ps.y_size
    out = []
    for atom in ps.sigma.atoms:
        pts = list(iter_points(atom))
        out += [(pts[0] * ys + y, q * ys + y) for q in pts[1:]]
    return out


def _pair_rows(vectors: Sequence[Vec], pairs: Sequence[Tuple[int, int]]) -> List[Vec]:
    # one linear equation per pair, expressed over the coefficient space
    return [tuple(v[p] - v[q] for v in vectors) for p, q in pairs]


def _point_rows(vectors: Sequence[Vec], points: Sequence[int]) -> List[Vec]:
    return [tuple(v[p] for v in vectors) for p in points]


def _solve_cut(space: Subspace, eqs: Sequence[Vec]) -> Subspace:
    """Subspace of `space` on which all the equations vanish; equations are
    rows over the coefficients of its basis."""
    if space.dim == 0 or not eqs:
        return space
    vecs = []
    for c in nullspace(eqs, ncols=space.dim):
        v = zero_vec(space.ambient)
        for ci, b in zip(c, space.basis):
            if ci:
                v = vec_add(v, vec_scale(ci, b))
        vecs.append(v)
    return Subspace(vecs, space.ambient)


def _preimage(space: Subspace, images: Sequence[Vec], target: Subspace) -> Subspace:
    """Subspace of `space` whose image (a linear map given by the images of
    the basis) lands inside target."""
    k, m = space.dim, target.dim
    if k == 0:
        return space
    n = space.ambient
    rows = [
        tuple([images[i][p] for i in range(k)] + [-target.basis[t][p] for t in range(m)])
        for p in range(n)
    ]
    vecs = []
    for s in nullspace(rows, ncols=k + m):
        v = zero_vec(n)
        for ci, b in zip(s[:k], space.basis):
            if ci:
                v = vec_add(v, vec_scale(ci, b))
        vecs.append(v)
    return Subspace(vecs, n)


def _scope_pairs(ps: ProductSpace, scope: str, direction: str) -> List[Tuple[int, int]]:
    if scope == "measurable":
        return []
    out: List[Tuple[int, int]] = []
    if direction == "vertical":
        if scope == "measurable-sections":
            sel = range(ps.x_size)
        else:
            nm = ps.mu.null_mask()
            sel = [x for x in range(ps.x_size) if not nm >> x & 1]
        for x in sel:
            out += _row_pairs(ps, x)
    else:
        if scope == "measurable-sections":
            sel = range(ps.y_size)
        else:
            if not ps.constant_right():
                raise ValueError("almost-everywhere column scope needs a single right space")
            mm = ps.right_measures[0].null_mask()
            sel = [y for y in range(ps.y_size) if not mm >> y & 1]
        for y in sel:
            out += _col_pairs(ps, y)
    return out


def _apply_rows(M: MarginalMap, S, v: Vec) -> Vec:
    """Image under the linearization that zeroes the rows in S and applies
    the selector elsewhere; on functions whose exact fallback pattern is S
    this agrees with the sectionwise map.  Sections off S must be
    measurable."""
    ps = M.product_space
    ys = ps.y_size
    out = [ZERO] * len(v)
    for x in range(ps.x_size):
        if x in S:
            continue
        img = M.liftings[x].apply(tuple(v[x * ys : (x + 1) * ys]))
        out[x * ys : (x + 1) * ys] = list(img.values)
    return tuple(out)


def _apply_cols(M: MarginalMap, R, v: Vec) -> Vec:
    ps = M.product_space
    xs, ys = ps.x_size, ps.y_size
    out = [ZERO] * len(v)
    for y in range(ys):
        if y in R:
            continue
        img = M.liftings[y].apply(tuple(v[x * ys + y] for x in range(xs)))
        for x in range(xs):
            out[x * ys + y] = img.values[x]
    return tuple(out)


def _transpose_mask(E: int, xs: int, ys: int) -> int:
    out = 0
    for x in range(xs):
        for y in range(ys):
            if E >> (x * ys + y) & 1:
                out |= 1 << (y * xs + x)
    return out


def _transpose_space(ps: ProductSpace) -> ProductSpace:
    if not ps.constant_right():
        raise ValueError("transposing needs a single right space")
    xs, ys = ps.x_size, ps.y_size
    uni_t = product_universe(ps.y_universe, ps.x_universe)
    weight_of = {
        _transpose_mask(a, xs, ys): w
        for a, w in zip(ps.upsilon.atoms, ps.upsilon_measure.atom_weights)
    }
    alg_t = FiniteAlgebra(uni_t, weight_of.keys())
    ups_t = RationalMeasure(alg_t, [weight_of[a] for a in alg_t.atoms])
    return ProductSpace(ps.right_measures[0], [(ps.sigma, ps.mu)], ups_t)


def _transposed(M: MarginalMap) -> MarginalMap:
    # a column map becomes a row map on the transposed space; the callable
    # signature (index, section) carries over unchanged
    ps_t = _transpose_space(M.product_space)
    inner = M.liftings[0] if M.liftings is not None else M.inner
    return MarginalMap("vertical", inner, ps_t)


def _transpose_decision(dec: MarginalDecision, ps: ProductSpace) -> MarginalDecision:
    if dec.witness is not None:
        xs, ys = ps.x_size, ps.y_size
        vals = [dec.witness.values[y * xs + x] for x in range(xs) for y in range(ys)]
        dec.witness = MeasurableFunction(ps.universe, vals)
    dec.note = _append_note(dec.note, "decided on the transposed space")
    return dec


def is_2marginal_exact(
    M: MarginalMap,
    scope: str = "measurable",
    cap: int = ENUM_CAP,
    samples: int = 200,
    seed: int = 0,
) -> MarginalDecision:
    """Decide whether the sectionwise map keeps every scope function
    top-measurable.

    Scopes: "measurable" is all top-measurable functions;
    "measurable-sections" additionally requires every section measurable;
    "measurable-sections-ae" requires sections measurable off the null part
    of the section index.  Exact for vector-lifting selectors by the
    pattern/subspace method; callable inner maps are routed to the
    randomized checker (samples, seed).
    """
    if scope not in MARGINAL_SCOPES:
        raise ValueError(f"unknown scope {scope!r}")
    if not M.linear:
        dec = is_2marginal_randomized(M, scope, samples=samples, seed=seed)
        dec.note = _append_note(dec.note, "nonlinear inner map routed to the randomized checker")
        return dec
    if M.direction == "horizontal":
        dec = is_2marginal_exact(_transposed(M), scope, cap=cap)
        return _transpose_decision(dec, M.product_space)
    ps = M.product_space
    W = _top_space(ps)
    row_pairs = [_row_pairs(ps, x) for x in range(ps.x_size)]
    D = _solve_cut(W, _pair_rows(W.basis, _scope_pairs(ps, scope, "vertical")))
    if D.dim == 0:
        return MarginalDecision(True, scope, note="scope subspace is zero")
    V = [_solve_cut(D, _pair_rows(D.basis, row_pairs[x])) for x in range(ps.x_size)]
    bad = [x for x in range(ps.x_size) if V[x].dim < D.dim]
    check_cap(1 << len(bad), cap, "exceptional row pattern enumeration")
    for smask in range(1 << len(bad)):
        S = frozenset(bad[i] for i in range(len(bad)) if smask >> i & 1)
        eqs: List[Vec] = []
        for x in bad:
            if x not in S:
                eqs += _pair_rows(D.basis, row_pairs[x])
        U = _solve_cut(D, eqs)
        if U.dim == 0:
            continue
        images = [_apply_rows(M, S, b) for b in U.basis]
        K = _preimage(U, images, W)
        if K.dim == U.dim:
            continue
        propers = [K]
        realizable = True
        for x in sorted(S):
            VxU = _solve_cut(U, _pair_rows(U.basis, row_pairs[x]))
            if VxU.dim == U.dim:
                realizable = False
                break
            propers.append(VxU)
        if not realizable:
            continue
        w = outside_all(U, propers)
        assert w is not None
        fn = MeasurableFunction(ps.universe, w)
        assert tuple(sorted(M.pattern(fn))) == tuple(sorted(S))
        assert not M.apply(fn).is_measurable(ps.upsilon)
        return MarginalDecision(False, scope, witness=fn, pattern=tuple(sorted(S)))
    return MarginalDecision(True, scope)


def is_2marginal_randomized(
    M: MarginalMap,
    scope: str = "measurable",
    samples: int = 200,
    seed: int = 0,
) -> MarginalDecision:
    """Seeded random search through the scope subspace.  A found violation
    is re-verified and therefore exact; a pass is statistical evidence only
    and keeps proved False."""
    if scope not in MARGINAL_SCOPES:
        raise ValueError(f"unknown scope {scope!r}")
    ps = M.product_space
    W = _top_space(ps)
    D = _solve_cut(W, _pair_rows(W.basis, _scope_pairs(ps, scope, M.direction)))
    if D.dim == 0:
        return MarginalDecision(True, scope, note="scope subspace is zero")
    rng = random.Random(seed)
    for _ in range(samples):
        v = zero_vec(ps.universe.size)
        for b in D.basis:
            c = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
            if c:
                v = vec_add(v, vec_scale(c, b))
        fn = MeasurableFunction(ps.universe, v)
        img = M.apply(fn)
        if not img.is_measurable(ps.upsilon):
            # independent re-check before reporting
            assert not _measurable_values(img.values, ps.upsilon)
            return MarginalDecision(
                False,
                scope,
                witness=fn,
                pattern=tuple(sorted(M.pattern(fn))),
                note=f"randomized search, seed {seed}",
            )
    return MarginalDecision(
        True, scope, proved=False, note=f"statistical pass: {samples} samples, seed {seed}"
    )


def generates_sections(
    M: MarginalMap,
    cap: int = ENUM_CAP,
    samples: int = 200,
    seed: int = 0,
) -> MarginalDecision:
    """Whether every column of every image of a top-measurable function is
    measurable for the left algebra.  Exact for vector-lifting selectors;
    callable inner maps are sampled."""
    if M.direction != "vertical":
        raise ValueError("section generation is a rowwise-map property")
    ps = M.product_space
    allpairs = [p for y in range(ps.y_size) for p in _col_pairs(ps, y)]
    W = _top_space(ps)
    if not M.linear:
        rng = random.Random(seed)
        for _ in range(samples):
            v = zero_vec(ps.universe.size)
            for b in W.basis:
                c = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
                if c:
                    v = vec_add(v, vec_scale(c, b))
            fn = MeasurableFunction(ps.universe, v)
            img = M.apply(fn).values
            bad_cols = [
                y
                for y in range(ps.y_size)
                if not _measurable_values(
                    [img[x * ps.y_size + y] for x in range(ps.x_size)], ps.sigma
                )
            ]
            if bad_cols:
                return MarginalDecision(
                    False,
                    "measurable",
                    witness=fn,
                    pattern=tuple(sorted(M.pattern(fn))),
                    note=f"column {bad_cols[0]} escapes; randomized search, seed {seed}",
                )
        return MarginalDecision(
            True, "measurable", proved=False,
            note=f"statistical pass: {samples} samples, seed {seed}",
        )
    row_pairs = [_row_pairs(ps, x) for x in range(ps.x_size)]
    V = [_solve_cut(W, _pair_rows(W.basis, row_pairs[x])) for x in range(ps.x_size)]
    bad = [x for x in range(ps.x_size) if V[x].dim < W.dim]
    check_cap(1 << len(bad), cap, "exceptional row pattern enumeration")
    for smask in range(1 << len(bad)):
        S = frozenset(bad[i] for i in range(len(bad)) if smask >> i & 1)
        eqs: List[Vec] = []
        for x in bad:
            if x not in S:
                eqs += _pair_rows(W.basis, row_pairs[x])
        U = _solve_cut(W, eqs)
        if U.dim == 0:
            continue
        images = [_apply_rows(M, S, b) for b in U.basis]
        K = _solve_cut(U, _pair_rows(images, allpairs))
        if K.dim == U.dim:
            continue
        propers = [K]
        realizable = True
        for x in sorted(S):
            VxU = _solve_cut(U, _pair_rows(U.basis, row_pairs[x]))
            if VxU.dim == U.dim:
                realizable = False
                break
            propers.append(VxU)
        if not realizable:
            continue
        w = outside_all(U, propers)
        assert w is not None
        fn = MeasurableFunction(ps.universe, w)
        img = M.apply(fn).values
        bad_cols = [
            y
            for y in range(ps.y_size)
            if not _measurable_values([img[x * ps.y_size + y] for x in range(ps.x_size)], ps.sigma)
        ]
        assert bad_cols, "witness must break a column"
        return MarginalDecision(
            False,
            "measurable",
            witness=fn,
            pattern=tuple(sorted(S)),
            note=f"column {bad_cols[0]} escapes the left algebra",
        )
    return MarginalDecision(True, "measurable")


# ---------------------------------------------------------------------------
# the composite of a column map after a row map


class OdotMap:
    """Composite sectionwise map: the row selector first, then the column
    selector on every intermediate column it accepts, zero elsewhere."""

    __slots__ = ("delta", "eta", "product_space", "vertical", "horizontal")

    def __init__(self, delta: InnerMap, eta: InnerMap, ps: ProductSpace):
        self.delta = delta
        self.eta = eta
        self.product_space = ps
        self.vertical = MarginalMap("vertical", eta, ps)
        self.horizontal = MarginalMap("horizontal", delta, ps)

    def intermediate(self, f: FunctionLike) -> MeasurableFunction:
        return self.vertical.apply(f)

    def apply(self, f: FunctionLike) -> MeasurableFunction:
        return self.horizontal.apply(self.vertical.apply(f))


class ClauseOutcome:
    """One clause of the composite property report.  applicable False means
    a hypothesis failed and the clause was skipped; missing lists which."""

    __slots__ = ("name", "applicable", "missing", "holds", "witness", "proved", "note")

    def __init__(self, name, applicable, missing=(), holds=None, witness=None, proved=False, note=""):
        self.name = name
        self.applicable = applicable
        self.missing = tuple(missing)
        self.holds = holds
        self.witness = witness
        self.proved = proved
        self.note = note

    def __repr__(self) -> str:
        if not self.applicable:
            return f"ClauseOutcome({self.name}: skipped, missing {list(self.missing)})"
        return f"ClauseOutcome({self.name}: {'holds' if self.holds else 'fails'})"


class OdotReport:
    __slots__ = ("clauses", "hypotheses", "samples", "seed")

    def __init__(self, clauses, hypotheses, samples, seed):
        self.clauses: Dict[str, ClauseOutcome] = clauses
        self.hypotheses: Dict[str, bool] = hypotheses
        self.samples = samples
        self.seed = seed

    def clause(self, name: str) -> ClauseOutcome:
        return self.clauses[name]

    def ok(self) -> bool:
        """No applicable clause failed."""
        return all(c.holds is not False for c in self.clauses.values() if c.applicable)


ODOT_CLAUSES = (
    "column-factorization",
    "column-idempotence",
    "class-respect",
    "constants-fixed",
    "rectangle-compatibility",
    "linearity",
    "multiplicativity",
    "positivity",
)


def _random_combo(rng, basis, n, lo=-5, hi=5, den=3):
    v = zero_vec(n)
    for b in basis:
        c = Fraction(rng.randint(lo, hi), rng.randint(1, den))
        if c:
            v = vec_add(v, vec_scale(c, b))
    return v


def odot(
    delta: InnerMap,
    eta: InnerMap,
    ps: ProductSpace,
    samples: int = 8,
    seed: int = 0,
    cap: int = ENUM_CAP,
) -> Tuple[OdotMap, OdotReport]:
    """Compose the column selector after the row selector and evaluate the
    clause family for such composites.

    Each clause carries its own hypotheses; clauses whose hypotheses fail are
    reported as skipped with the missing ones listed.  Identities that follow
    from linearity on a spanning family are marked proved; the rest are
    evaluated on the family plus seeded random combinations and stay marked
    as sampled.
    """
    if not ps.constant_right():
        raise ValueError("the composite needs a single right space")
    omap = OdotMap(delta, eta, ps)
    Meta, Mdelta = omap.vertical, omap.horizontal
    rng = random.Random(seed)
    n = ps.universe.size
    atom_fns = [MeasurableFunction.indicator(ps.universe, a) for a in ps.upsilon.atoms]
    one = MeasurableFunction.constant(ps.universe, 1)
    base = [indicator(a, n) for a in ps.upsilon.atoms]
    fam = list(atom_fns) + [one]
    fam += [
        MeasurableFunction(ps.universe, _random_combo(rng, base, n)) for _ in range(samples)
    ]

    fub = check_fubini(ps, cap=cap)
    nu = ps.right_measures[0]
    null_rows_rect = all(
        rectangle(ps.sigma.atoms[k], ps.y_universe.full, ps.y_size) in ps.upsilon
        for k in ps.mu.null_atom_indices()
    )
    both_lift = isinstance(delta, VectorLifting) and isinstance(eta, VectorLifting)
    cls_d = classify_lifting(delta) if isinstance(delta, VectorLifting) else None
    cls_e = classify_lifting(eta) if isinstance(eta, VectorLifting) else None
    gen = generates_sections(Meta, cap=cap, samples=samples * 25, seed=seed)
    hyp = {
        "C": fub.holds("C"),
        "null_row_rectangles_top": null_rows_rect,
        "mu_complete": is_complete(ps.mu),
        "selectors_are_liftings": both_lift,
        "row_selector_class_respect": Meta.linear,
        "column_selector_multiplicative": bool(cls_d and cls_d.multiplicative),
        "row_selector_multiplicative": bool(cls_e and cls_e.multiplicative),
        "column_selector_positive": bool(cls_d and cls_d.order_preserving),
        "row_selector_positive": bool(cls_e and cls_e.order_preserving),
        "row_map_generates_sections": gen.holds,
    }
    clauses: Dict[str, ClauseOutcome] = {}

    def evaluate(name, applicable_missing, check, proved=False, note=""):
        missing = [k for k in applicable_missing if not hyp[k]]
        if missing:
            clauses[name] = ClauseOutcome(name, False, missing=missing, note=note)
            return
        holds, witness = check()
        clauses[name] = ClauseOutcome(
            name, True, holds=holds, witness=witness, proved=bool(proved and holds), note=note
        )

    xs, ys = ps.x_size, ps.y_size

    def columns(values):
        return [tuple(values[x * ys + y] for x in range(xs)) for y in range(ys)]

    def check_factorization():
        for f in fam:
            mid = Meta.apply(f).values
            out = omap.apply(f).values
            for y, col in enumerate(columns(mid)):
                img = Mdelta.section_image(y, col)
                got = tuple(out[x * ys + y] for x in range(xs))
                want = img if img is not None else tuple([ZERO] * xs)
                if got != want:
                    return False, (f, y)
        return True, None

    def check_idempotence():
        for f in fam:
            out = omap.apply(f).values
            for y, col in enumerate(columns(out)):
                img = Mdelta.section_image(y, col)
                if img != col:
                    return False, (f, y)
        return True, None

    def check_class_respect():
        null_atoms = [ps.upsilon.atoms[k] for k in ps.upsilon_measure.null_atom_indices()]
        if not null_atoms:
            return True, None
        perts = [indicator(a, n) for a in null_atoms]
        perts.append(_random_combo(rng, perts, n))
        for f in fam[: len(ps.upsilon.atoms) + 3]:
            base_img = omap.apply(f)
            for p in perts:
                g = MeasurableFunction(ps.universe, vec_add(f.values, p))
                if omap.apply(g) != base_img:
                    return False, (f, MeasurableFunction(ps.universe, p))
        return True, None

    def check_constants():
        tested = False
        for k in (ONE, Fraction(-2), Fraction(1, 2)):
            crow = (k,) * ys
            ccol = (k,) * xs
            if any(Meta.section_image(x, crow) != crow for x in range(xs)) or any(
                Mdelta.section_image(y, ccol) != ccol for y in range(ys)
            ):
                continue
            tested = True
            kf = MeasurableFunction.constant(ps.universe, k)
            if omap.apply(kf) != kf:
                return False, kf
        if not tested:
            return None, None
        return True, None

    def check_rectangles():
        fs = [MeasurableFunction.indicator(ps.x_universe, a) for a in ps.sigma.atoms]
        gs = [MeasurableFunction.indicator(ps.y_universe, b) for b in nu.algebra.atoms]
        fs.append(MeasurableFunction(ps.x_universe, _random_combo(
            rng, [indicator(a, xs) for a in ps.sigma.atoms], xs)))
        gs.append(MeasurableFunction(ps.y_universe, _random_combo(
            rng, [indicator(b, ys) for b in nu.algebra.atoms], ys)))
        for f in fs:
            for g in gs:
                lhs = omap.apply(tensor(f, g, ps))
                rhs = tensor(delta.apply(f), eta.apply(g), ps)
                if lhs != rhs:
                    return False, (f, g)
        return True, None

    def check_linearity():
        pool = fam[: len(ps.upsilon.atoms) + 2] + fam[-2:]
        for a in (Fraction(2), Fraction(-1), Fraction(1, 3)):
            for i, f in enumerate(pool):
                g = pool[(i * 7 + 3) % len(pool)]
                lhs = omap.apply(f.scale(a) + g)
                rhs = omap.apply(f).scale(a) + omap.apply(g)
                if lhs != rhs:
                    return False, (f, g, a)
        return True, None

    def check_multiplicativity():
        pool = fam[: len(ps.upsilon.atoms) + 2] + fam[-2:]
        for i, f in enumerate(pool):
            g = pool[(i * 5 + 2) % len(pool)]
            if omap.apply(f * g) != omap.apply(f) * omap.apply(g):
                return False, (f, g)
        return True, None

    def check_positivity():
        pool = list(atom_fns) + [one]
        pool += [
            MeasurableFunction(ps.universe, _random_combo(rng, base, n, lo=0, hi=5))
            for _ in range(samples)
        ]
        for f in pool:
            if any(v < 0 for v in omap.apply(f).values):
                return False, f
        return True, None

    evaluate("column-factorization", (), check_factorization, proved=True,
             note="definition-level identity, checked on the family")
    evaluate("column-idempotence", (), check_idempotence,
             note="needs the column selector idempotent with zero fixed; "
                  "automatic for vector liftings")
    evaluate("class-respect", ("C", "mu_complete", "row_selector_class_respect"),
             check_class_respect,
             note="perturbations along null top atoms span the null classes")
    evaluate("constants-fixed", (), check_constants, proved=True)
    evaluate("rectangle-compatibility", ("C", "selectors_are_liftings"), check_rectangles,
             proved=True, note="bilinearity reduces to the atom pairs")
    evaluate("linearity",
             ("C", "null_row_rectangles_top", "selectors_are_liftings",
              "row_map_generates_sections", "mu_complete"),
             check_linearity)
    evaluate("multiplicativity",
             ("C", "null_row_rectangles_top", "selectors_are_liftings",
              "row_map_generates_sections", "mu_complete",
              "column_selector_multiplicative", "row_selector_multiplicative"),
             check_multiplicativity)
    evaluate("positivity", ("column_selector_positive", "row_selector_positive"),
             check_positivity)
    for name in ODOT_CLAUSES:
        assert name in clauses
    ordered = {name: clauses[name] for name in ODOT_CLAUSES}
    return omap, OdotReport(ordered, hyp, samples, seed)


# ---------------------------------------------------------------------------
# preserving / weak marginal equivalence


def _realizability(U: Subspace, cuts: List[Subspace]) -> Optional[List[Subspace]]:
    propers = []
    for c in cuts:
        if c.dim == U.dim:
            return None
        propers.append(c)
    return propers


def _composite_decide(delta: VectorLifting, eta, ps: ProductSpace, cap: int, mode: str) -> MarginalDecision:
    """Exact decision for the composite map: mode "preserving" asks that all
    images are top-measurable, mode "l1" that additionally every image equals
    its input off the null top atoms.  Row and column fallback patterns are
    enumerated jointly."""
    Meta = MarginalMap("vertical", eta, ps)
    Mdelta = MarginalMap("horizontal", delta, ps)
    W = _top_space(ps)
    n = ps.universe.size
    row_pairs = [_row_pairs(ps, x) for x in range(ps.x_size)]
    col_pairs = [_col_pairs(ps, y) for y in range(ps.y_size)]
    nullmask = ps.upsilon_measure.null_mask()
    offpts = [p for p in range(n) if not nullmask >> p & 1]
    V = [_solve_cut(W, _pair_rows(W.basis, row_pairs[x])) for x in range(ps.x_size)]
    bad = [x for x in range(ps.x_size) if V[x].dim < W.dim]
    check_cap(1 << len(bad), cap, "exceptional row pattern enumeration")
    for smask in range(1 << len(bad)):
        S = frozenset(bad[i] for i in range(len(bad)) if smask >> i & 1)
        eqs: List[Vec] = []
        for x in bad:
            if x not in S:
                eqs += _pair_rows(W.basis, row_pairs[x])
        US = _solve_cut(W, eqs)
        if US.dim == 0:
            continue
        imagesL = [_apply_rows(Meta, S, b) for b in US.basis]
        cand = [
            y
            for y in range(ps.y_size)
            if _solve_cut(US, _pair_rows(imagesL, col_pairs[y])).dim < US.dim
        ]
        check_cap(1 << len(cand), cap, "exceptional column pattern enumeration")
        for rmask in range(1 << len(cand)):
            R = frozenset(cand[i] for i in range(len(cand)) if rmask >> i & 1)
            ceqs: List[Vec] = []
            for y in cand:
                if y not in R:
                    ceqs += _pair_rows(imagesL, col_pairs[y])
            U = _solve_cut(US, ceqs)
            if U.dim == 0:
                continue
            imgL = [_apply_rows(Meta, S, b) for b in U.basis]
            imgM = [_apply_cols(Mdelta, R, v) for v in imgL]
            if mode == "preserving":
                K = _preimage(U, imgM, W)
            else:
                diffs = [vec_sub(m, b) for m, b in zip(imgM, U.basis)]
                K1 = _solve_cut(U, _point_rows(diffs, offpts))
                imgM1 = [
                    _apply_cols(Mdelta, R, _apply_rows(Meta, S, b)) for b in K1.basis
                ]
                K = _preimage(K1, imgM1, W)
            if K.dim == U.dim:
                continue
            cuts = [_solve_cut(U, _pair_rows(U.basis, row_pairs[x])) for x in sorted(S)]
            imgL_for_R = imgL
            cuts += [
                _solve_cut(U, _pair_rows(imgL_for_R, col_pairs[y])) for y in sorted(R)
            ]
            propers = _realizability(U, cuts)
            if propers is None:
                continue
            w = outside_all(U, [K] + propers)
            assert w is not None
            fn = MeasurableFunction(ps.universe, w)
            mid = Meta.apply(fn)
            assert tuple(sorted(Meta.pattern(fn))) == tuple(sorted(S))
            assert tuple(sorted(Mdelta.pattern(mid))) == tuple(sorted(R))
            out = Mdelta.apply(mid)
            broken = not out.is_measurable(ps.upsilon)
            if mode == "l1" and not broken:
                broken = any(out.values[p] != w[p] for p in offpts)
            assert broken, "witness must break the composite condition"
            return MarginalDecision(
                False,
                "measurable",
                witness=fn,
                pattern=(tuple(sorted(S)), tuple(sorted(R))),
                note=f"row/column fallback patterns {sorted(S)}/{sorted(R)}",
            )
    return MarginalDecision(True, "measurable")


def _weak_marginal_exact(eta, ps: ProductSpace, cap: int) -> MarginalDecision:
    """Exact weak 2-marginal decision: off the canonical exceptional column
    set (the null right atoms) every image column and every input column must
    be measurable on the left and agree up to left-null sets.  Enlarging the
    exceptional set is harmless, so the canonical one decides the existential
    form."""
    Meta = MarginalMap("vertical", eta, ps)
    W = _top_space(ps)
    row_pairs = [_row_pairs(ps, x) for x in range(ps.x_size)]
    col_pairs = [_col_pairs(ps, y) for y in range(ps.y_size)]
    mm = ps.right_measures[0].null_mask()
    good_cols = [y for y in range(ps.y_size) if not mm >> y & 1]
    mu_null = ps.mu.null_mask()
    good_rows = [x for x in range(ps.x_size) if not mu_null >> x & 1]
    ys = ps.y_size
    V = [_solve_cut(W, _pair_rows(W.basis, row_pairs[x])) for x in range(ps.x_size)]
    bad = [x for x in range(ps.x_size) if V[x].dim < W.dim]
    check_cap(1 << len(bad), cap, "exceptional row pattern enumeration")
    for smask in range(1 << len(bad)):
        S = frozenset(bad[i] for i in range(len(bad)) if smask >> i & 1)
        eqs: List[Vec] = []
        for x in bad:
            if x not in S:
                eqs += _pair_rows(W.basis, row_pairs[x])
        U = _solve_cut(W, eqs)
        if U.dim == 0:
            continue
        imagesL = [_apply_rows(Meta, S, b) for b in U.basis]
        diffs = [vec_sub(m, b) for m, b in zip(imagesL, U.basis)]
        weqs: List[Vec] = []
        for y in good_cols:
            weqs += _pair_rows(U.basis, col_pairs[y])
            weqs += _pair_rows(imagesL, col_pairs[y])
            weqs += _point_rows(diffs, [x * ys + y for x in good_rows])
        K = _solve_cut(U, weqs)
        if K.dim == U.dim:
            continue
        propers = _realizability(U, [_solve_cut(U, _pair_rows(U.basis, row_pairs[x])) for x in sorted(S)])
        if propers is None:
            continue
        w = outside_all(U, [K] + propers)
        assert w is not None
        fn = MeasurableFunction(ps.universe, w)
        img = Meta.apply(fn).values
        broken = False
        for y in good_cols:
            colf = [w[x * ys + y] for x in range(ps.x_size)]
            coli = [img[x * ys + y] for x in range(ps.x_size)]
            if not _measurable_values(colf, ps.sigma) or not _measurable_values(coli, ps.sigma):
                broken = True
                break
            if any(colf[x] != coli[x] for x in good_rows):
                broken = True
                break
        assert broken, "witness must break the weak marginal condition"
        return MarginalDecision(
            False, "measurable", witness=fn, pattern=tuple(sorted(S)),
            note=f"column {y} breaks off the canonical exceptional set",
        )
    return MarginalDecision(True, "measurable")


class EquivalenceReport:
    """Two-sided report: the composite primitive-selector property on the
    left, image preservation plus the weak marginal condition on the right.
    directions lists which implications had their hypotheses met (and were
    asserted); holds compares the sides when both were."""

    __slots__ = (
        "mode",
        "hypotheses",
        "branch",
        "composite_l1",
        "preserving",
        "weak_marginal",
        "directions",
        "holds",
        "note",
    )

    def __init__(self, mode, hypotheses, branch, composite_l1, preserving, weak_marginal,
                 directions, holds, note=""):
        self.mode = mode
        self.hypotheses = hypotheses
        self.branch = branch
        self.composite_l1 = composite_l1
        self.preserving = preserving
        self.weak_marginal = weak_marginal
        self.directions = directions
        self.holds = holds
        self.note = note

    def __repr__(self) -> str:
        return (
            f"EquivalenceReport({self.mode}: l1={self.composite_l1.holds}, "
            f"preserving={self.preserving.holds}, weak={self.weak_marginal.holds}, "
            f"branch={self.branch})"
        )


def _is_atomic(m: RationalMeasure) -> bool:
    # the whole space is one measure atom: only weights 0 and a single 1
    return sorted(w for w in m.atom_weights if w) == [ONE]


def preserving_and_weak_marginal_equivalence(
    delta,
    eta,
    ps: ProductSpace,
    set_maps: bool = False,
    cap: int = ENUM_CAP,
    samples: int = 120,
    seed: int = 0,
) -> EquivalenceReport:
    """Equivalence between the composite being a primitive selector on the
    product (images top-measurable and equal to the input up to null sets)
    and the conjunction: images stay top-measurable, and the row map is a
    weak 2-marginal off the canonical exceptional column set.

    The forward implication needs the mirrored section condition and a
    primitive column selector.  The reverse needs left rectangles inside the
    top space and either a non-atomic left factor, or the atomic branch
    (section condition, full right rectangles in the top, class-respecting
    row selector).  Vector-lifting selectors are decided exactly; set maps
    (set_maps=True, callables or dicts on the factor algebras) exhaustively,
    where the atomic branch instead needs complement-compatibility of the
    row set map and a complete left measure; anything else is sampled.
    Violated implications whose sides were decided exactly raise
    AssertionError.
    """
    if not ps.constant_right():
        raise ValueError("the composite needs a single right space")
    if set_maps:
        return _set_equivalence(delta, eta, ps, cap)
    fub = check_fubini(ps, cap=cap)
    yfull = ps.y_universe.full
    xfull = ps.x_universe.full
    nu = ps.right_measures[0]
    hyp = {
        "Cbar": fub.holds("Cbar"),
        "C": fub.holds("C"),
        "column_selector_primitive": isinstance(delta, VectorLifting),
        "left_rectangles_top": all(
            rectangle(a, yfull, ps.y_size) in ps.upsilon for a in ps.sigma.atoms
        ),
        "left_factor_atomic": _is_atomic(ps.mu),
        "right_rectangles_top": all(
            rectangle(xfull, b, ps.y_size) in ps.upsilon for b in nu.algebra.atoms
        ),
        "row_selector_class_respect": isinstance(eta, VectorLifting),
        "mu_complete": is_complete(ps.mu),
    }
    exact = isinstance(delta, VectorLifting) and _rowwise_linear(eta)
    if exact:
        l1 = _composite_decide(delta, eta, ps, cap, "l1")
        pres = _composite_decide(delta, eta, ps, cap, "preserving")
        weak = _weak_marginal_exact(eta, ps, cap)
    else:
        l1, pres, weak = _composite_sampled(delta, eta, ps, samples, seed)
    fwd_ok = hyp["Cbar"] and hyp["column_selector_primitive"]
    rev_ok = hyp["Cbar"] and hyp["left_rectangles_top"] and (
        not hyp["left_factor_atomic"]
        or (hyp["C"] and hyp["right_rectangles_top"] and hyp["row_selector_class_respect"])
    )
    branch = None
    if rev_ok:
        branch = "non-atomic-left" if not hyp["left_factor_atomic"] else "atomic-left"
    rhs = pres.holds and weak.holds
    all_proved = l1.proved and pres.proved and weak.proved
    if fwd_ok and all_proved and rhs and not l1.holds:
        raise AssertionError("forward equivalence direction violated")
    if rev_ok and all_proved and l1.holds and not rhs:
        raise AssertionError("reverse equivalence direction violated")
    directions = tuple(d for d, ok in (("forward", fwd_ok), ("reverse", rev_ok)) if ok)
    holds = (l1.holds == rhs) if (fwd_ok and rev_ok) else None
    return EquivalenceReport(
        "functions", hyp, branch, l1, pres, weak, directions, holds,
        note="exact subspace decisions" if exact else "sampled decisions",
    )


def _rowwise_linear(eta) -> bool:
    return isinstance(eta, VectorLifting) or (
        isinstance(eta, (list, tuple)) and all(isinstance(L, VectorLifting) for L in eta)
    )


def _composite_sampled(delta, eta, ps, samples, seed):
    Meta = MarginalMap("vertical", eta, ps)
    Mdelta = MarginalMap("horizontal", delta, ps)
    W = _top_space(ps)
    n = ps.universe.size
    nullmask = ps.upsilon_measure.null_mask()
    mm = ps.right_measures[0].null_mask()
    good_cols = [y for y in range(ps.y_size) if not mm >> y & 1]
    mu_null = ps.mu.null_mask()
    good_rows = [x for x in range(ps.x_size) if not mu_null >> x & 1]
    ys = ps.y_size
    rng = random.Random(seed)
    l1_w = pres_w = weak_w = None
    for _ in range(samples):
        v = _random_combo(rng, W.basis, n)
        fn = MeasurableFunction(ps.universe, v)
        mid = Meta.apply(fn)
        out = Mdelta.apply(mid)
        if pres_w is None and not out.is_measurable(ps.upsilon):
            pres_w = fn
        if l1_w is None and (
            not out.is_measurable(ps.upsilon)
            or any(out.values[p] != v[p] for p in range(n) if not nullmask >> p & 1)
        ):
            l1_w = fn
        if weak_w is None:
            for y in good_cols:
                colf = [v[x * ys + y] for x in range(ps.x_size)]
                coli = [mid.values[x * ys + y] for x in range(ps.x_size)]
                if (
                    not _measurable_values(colf, ps.sigma)
                    or not _measurable_values(coli, ps.sigma)
                    or any(colf[x] != coli[x] for x in good_rows)
                ):
                    weak_w = fn
                    break
    note = f"sampled: {samples} functions, seed {seed}"

    def dec(w):
        if w is None:
            return MarginalDecision(True, "measurable", proved=False, note=note)
        return MarginalDecision(False, "measurable", witness=w, note=note)

    return dec(l1_w), dec(pres_w), dec(weak_w)


def _wrap_set_map(m):
    if callable(m):
        return m
    table = dict(m)
    return table.get


def _set_equivalence(delta, eta, ps: ProductSpace, cap: int) -> EquivalenceReport:
    """Exhaustive set-map form of the equivalence.  The column selector is a
    primitive set lifting on the left algebra (validated); the row selector
    is any total set map on the right algebra into subsets of the right
    universe."""
    dmap = _wrap_set_map(delta)
    emap = _wrap_set_map(eta)
    nu = ps.right_measures[0]
    tau = nu.algebra
    xs, ys = ps.x_size, ps.y_size
    xfull, yfull = ps.x_universe.full, ps.y_universe.full
    mu_null = ps.mu.null_mask()
    # validate the column selector: member images, null symmetric
    # differences, constancy on classes
    by_class: Dict[int, int] = {}
    for A in ps.sigma.elements(cap):
        d = dmap(A)
        if d is None or d & ~xfull:
            raise ValueError("the column set map must be defined on the left algebra")
        if d not in ps.sigma or (d ^ A) & ~mu_null:
            raise ValueError("the column set map is not a primitive set lifting")
        key = A & ~mu_null
        if by_class.setdefault(key, d) != d:
            raise ValueError("the column set map is not constant on classes")
    eta_V = True
    eta_class = True
    by_class_e: Dict[int, int] = {}
    nu_null = nu.null_mask()
    for B in tau.elements(cap):
        e = emap(B)
        if e is None or e & ~yfull:
            raise ValueError("the row set map must be total on the right algebra")
        if emap(yfull ^ B) != yfull ^ e:
            eta_V = False
        key = B & ~nu_null
        if by_class_e.setdefault(key, e) != e:
            eta_class = False
    fub = check_fubini(ps, cap=cap)
    hyp = {
        "Cbar": fub.holds("Cbar"),
        "C": fub.holds("C"),
        "column_selector_primitive": True,
        "left_rectangles_top": all(
            rectangle(a, yfull, ys) in ps.upsilon for a in ps.sigma.atoms
        ),
        "left_factor_atomic": _is_atomic(ps.mu),
        "right_rectangles_top": all(
            rectangle(xfull, b, ys) in ps.upsilon for b in tau.atoms
        ),
        "row_selector_class_respect": eta_class,
        "row_selector_complement_compatible": eta_V,
        "mu_complete": is_complete(ps.mu),
    }
    mm_pts = [y for y in range(ys) if not nu_null >> y & 1]
    l1_w = pres_w = weak_w = None
    for E in ps.upsilon.elements(cap):
        H = 0
        for x in range(xs):
            Ex = section_v(E, x, ys)
            if Ex in tau:
                H |= emap(Ex) << (x * ys)
        P = 0
        for y in range(ys):
            colH = section_h(H, y, xs, ys)
            if colH in ps.sigma:
                c = dmap(colH)
                for x in iter_points(c):
                    P |= 1 << (x * ys + y)
        inside = P in ps.upsilon
        if pres_w is None and not inside:
            pres_w = E
        if l1_w is None and (not inside or ps.upsilon_measure.of(P ^ E) != 0):
            l1_w = E
        if weak_w is None:
            for y in mm_pts:
                colH = section_h(H, y, xs, ys)
                Ey = section_h(E, y, xs, ys)
                if colH not in ps.sigma or Ey not in ps.sigma or (colH ^ Ey) & ~mu_null:
                    weak_w = E
                    break

    def dec(w):
        if w is None:
            return MarginalDecision(True, "sets")
        return MarginalDecision(False, "sets", witness=w)

    l1, pres, weak = dec(l1_w), dec(pres_w), dec(weak_w)
    fwd_ok = hyp["Cbar"] and hyp["left_rectangles_top"]
    branch = None
    if not hyp["left_factor_atomic"]:
        branch = "non-atomic-left"
    elif hyp["C"] and hyp["right_rectangles_top"] and hyp["row_selector_class_respect"]:
        branch = "atomic-left"
    elif (
        hyp["right_rectangles_top"]
        and hyp["row_selector_complement_compatible"]
        and hyp["mu_complete"]
    ):
        branch = "atomic-left-complement-compatible"
    rev_ok = fwd_ok and branch is not None
    rhs = pres.holds and weak.holds
    if fwd_ok and rhs and not l1.holds:
        raise AssertionError("forward equivalence direction violated (set maps)")
    if rev_ok and l1.holds and not rhs:
        raise AssertionError("reverse equivalence direction violated (set maps)")
    directions = tuple(d for d, ok in (("forward", fwd_ok), ("reverse", rev_ok)) if ok)
    holds = (l1.holds == rhs) if (fwd_ok and rev_ok) else None
    return EquivalenceReport(
        "sets", hyp, branch, l1, pres, weak, directions, holds,
        note="exhaustive over the top algebra",
    )


# ---------------------------------------------------------------------------
# smoothness


class SmoothnessReport:
    """Smoothness of a row selector: it is a primitive selector whose
    sectionwise map keeps top-measurable functions measurable and whose image
    columns are all measurable on the left.  When a column selector is given
    and the preconditions hold, the equivalence with the materialized
    composite being a multiplicative lifting is asserted."""

    __slots__ = (
        "smooth",
        "two_marginal",
        "generates",
        "preconditions",
        "composite_multiplicative",
        "composite",
        "biconditional_checked",
        "note",
    )

    def __init__(self, smooth, two_marginal, generates, preconditions,
                 composite_multiplicative, composite, biconditional_checked, note=""):
        self.smooth = smooth
        self.two_marginal = two_marginal
        self.generates = generates
        self.preconditions = preconditions
        self.composite_multiplicative = composite_multiplicative
        self.composite = composite
        self.biconditional_checked = biconditional_checked
        self.note = note

    def __bool__(self) -> bool:
        return self.smooth


def _composite_lifting_class(delta, eta, ps, gen, samples, seed):
    """Materialize the composite on the atom indicators and decide whether it
    is a multiplicative lifting.  Returns (flag, lifting or None, note); any
    failed materialization step falsifies membership in the class."""
    Meta = MarginalMap("vertical", eta, ps)
    Mdelta = MarginalMap("horizontal", delta, ps)

    def apply(f):
        return Mdelta.apply(Meta.apply(f))

    ups = ps.upsilon_measure
    nonnull = ups.nonnull_atom_indices()
    nullidx = ups.null_atom_indices()
    nullmask = ups.null_mask()
    n = ps.universe.size
    imgs = []
    for j in nonnull:
        out = apply(MeasurableFunction.indicator(ps.universe, ups.algebra.atoms[j])).values
        imgs.append(out)
        atom = ups.algebra.atoms[j]
        for p in range(n):
            if nullmask >> p & 1:
                continue
            if out[p] != (ONE if atom >> p & 1 else ZERO):
                return False, None, "an atom image is not equivalent to its atom"
    rows = []
    for k in nullidx:
        pts = list(iter_points(ups.algebra.atoms[k]))
        row = []
        for img in imgs:
            vals = {img[p] for p in pts}
            if len(vals) != 1:
                return False, None, "an atom image is not constant on a null atom"
            row.append(vals.pop())
        rows.append(tuple(row))
    one = MeasurableFunction.constant(ps.universe, 1)
    one_img = apply(one)
    if any(v != 1 for v in one_img.values):
        return False, None, "the composite does not fix the unit"
    split = [sum(img[p] for img in imgs) for p in range(n)]
    if split != list(one_img.values):
        return False, None, "the composite is not additive on the atom split"
    phi = VectorLifting(ups, rows)
    phi.check_axioms()
    rng = random.Random(seed)
    base = [indicator(a, n) for a in ups.algebra.atoms]
    probes = [MeasurableFunction(ps.universe, _random_combo(rng, base, n)) for _ in range(samples)]
    if gen.witness is not None:
        probes += [gen.witness, one - gen.witness]
        if apply(gen.witness) + apply(one - gen.witness) != one_img:
            return False, phi, "additivity fails at a complement pair"
    for f in probes:
        if phi.apply(f) != apply(f):
            return False, phi, "materialization disagrees: the composite is not linear"
    cls = classify_lifting(phi)
    if not cls.multiplicative:
        return False, phi, "materialized composite is not multiplicative"
    return True, phi, "materialized and classified"


def smoothness_check(
    eta: VectorLifting,
    ps: ProductSpace,
    delta: Optional[VectorLifting] = None,
    cap: int = ENUM_CAP,
    samples: int = 40,
    seed: int = 0,
) -> SmoothnessReport:
    """Decide smoothness of a row selector over the left factor: the
    sectionwise map must keep top-measurable functions measurable (the
    2-marginal condition) and generate left-measurable image columns.

    With a column selector supplied, the equivalence `smooth iff the
    composite is a multiplicative lifting` is asserted whenever its
    preconditions hold (complete left measure, both selectors multiplicative
    liftings, composite preserving, row map a 2-marginal, section conditions
    and null-row rectangles inside the top).
    """
    if not isinstance(eta, VectorLifting):
        raise ValueError("smoothness is decided exactly; the row selector must be a vector lifting")
    if not ps.constant_right():
        raise ValueError("smoothness needs a single right space")
    Meta = MarginalMap("vertical", eta, ps)
    two = is_2marginal_exact(Meta, "measurable", cap=cap)
    gen = generates_sections(Meta, cap=cap)
    smooth = two.holds and gen.holds
    pre: Dict[str, bool] = {}
    in_class = None
    phi = None
    checked = False
    note = ""
    if delta is not None:
        if not isinstance(delta, VectorLifting):
            raise ValueError("the column selector must be a vector lifting")
        fub = check_fubini(ps, cap=cap)
        null_rows_rect = all(
            rectangle(ps.sigma.atoms[k], ps.y_universe.full, ps.y_size) in ps.upsilon
            for k in ps.mu.null_atom_indices()
        )
        pre = {
            "mu_complete": is_complete(ps.mu),
            "C": fub.holds("C"),
            "Cbar": fub.holds("Cbar"),
            "null_row_rectangles_top": null_rows_rect,
            "column_selector_multiplicative": classify_lifting(delta).multiplicative,
            "row_selector_multiplicative": classify_lifting(eta).multiplicative,
            "row_map_2marginal": two.holds,
            "preserving": _composite_decide(delta, eta, ps, cap, "preserving").holds,
        }
        in_class, phi, note = _composite_lifting_class(delta, eta, ps, gen, samples, seed)
        if all(pre.values()):
            checked = True
            assert smooth == in_class, (
                "smoothness equivalence violated: smooth=%s, composite in class=%s (%s)"
                % (smooth, in_class, note)
            )
    return SmoothnessReport(smooth, two, gen, pre, in_class, phi, checked, note)


# ---------------------------------------------------------------------------
# product liftings


class ProductLifting:
    """A vector lifting on the top space built from a pair of factor
    liftings, together with the construction certificate: the ordered basis
    of fixed representatives with their provenance (tensor pair, continuous
    block, or repaired atom indicator)."""

    __slots__ = ("lifting", "gamma", "eta", "product_space", "certificate", "strong")

    def __init__(self, lifting, gamma, eta, product_space, certificate, strong=False):
        self.lifting = lifting
        self.gamma = gamma
        self.eta = eta
        self.product_space = product_space
        self.certificate = certificate
        self.strong = strong

    def apply(self, f: FunctionLike) -> MeasurableFunction:
        return self.lifting.apply(f)

    def tensor_identity(self, f: FunctionLike, g: FunctionLike) -> bool:
        """Image of a product-form function factors through the factor
        liftings: π(f⊗g) = γ(f)⊗η(g) pointwise."""
        ps = self.product_space
        lhs = self.lifting.apply(tensor(f, g, ps))
        rhs = tensor(self.gamma.apply(f), self.eta.apply(g), ps)
        return lhs == rhs

    def verify_tensor_identity(self, samples: int = 25, seed: int = 0) -> bool:
        ps = self.product_space
        rng = random.Random(seed)
        xs, ys = ps.x_size, ps.y_size
        lbase = [indicator(a, xs) for a in ps.sigma.atoms]
        rbase = [indicator(b, ys) for b in self.eta.algebra.atoms]
        for _ in range(samples):
            f = _random_combo(rng, lbase, xs)
            g = _random_combo(rng, rbase, ys)
            if not self.tensor_identity(f, g):
                return False
        return True

    def sections_measurable(self, f: Optional[FunctionLike] = None) -> bool:
        """Vertical sections of images are measurable for their row algebras;
        horizontal sections too when the certificate says they were repaired
        (mirrored section condition available at build time)."""
        ps = self.product_space
        ys = ps.y_size
        if f is not None:
            probes = [self.lifting.apply(f).values]
        else:
            probes = [entry["values"] for entry in self.certificate["basis"]]
        for vals in probes:
            for x in range(ps.x_size):
                if not _measurable_values(vals[x * ys : (x + 1) * ys], ps.right_algebras[x]):
                    return False
            if self.certificate.get("horizontal_sections"):
                for y in range(ys):
                    col = [vals[x * ys + y] for x in range(ps.x_size)]
                    if not _measurable_values(col, ps.sigma):
                        return False
        return True

    def to_payload(self) -> dict:
        cert = {
            "mode": self.certificate["mode"],
            "dimension": self.certificate["dimension"],
            "horizontal_sections": self.certificate.get("horizontal_sections", False),
            "left": [
                {"kind": e["kind"], "values": [str(v) for v in e["values"]]}
                for e in self.certificate["left"]
            ],
            "right": [
                {"kind": e["kind"], "values": [str(v) for v in e["values"]]}
                for e in self.certificate["right"]
            ],
            "basis": [
                {
                    "kind": e["kind"],
                    "pair": e.get("pair"),
                    "atom": e.get("atom"),
                    "values": [str(v) for v in e["values"]],
                }
                for e in self.certificate["basis"]
            ],
        }
        return {"lifting": self.lifting.to_payload(), "certificate": cert}


def _factor_basis(lifting: VectorLifting, measure: RationalMeasure, topology: Optional[FiniteTopology]):
    """Quotient basis of functions fixed by the factor lifting, continuous
    block first when a topology is given."""
    uni = measure.universe
    entries = []
    if topology is not None:
        sc = check_strong_condition(measure, topology)
        if not sc:
            raise ValueError("the factor topology fails the strong condition")
        for d in topology.clopen_algebra().atoms:
            f = MeasurableFunction.indicator(uni, d)
            if not lifting.fixes(f):
                raise ValueError("factor lifting does not fix its clopen atoms")
            entries.append({"kind": "continuous", "values": f.values})
    for k in measure.nonnull_atom_indices():
        f = lifting.apply(MeasurableFunction.indicator(uni, measure.algebra.atoms[k]))
        entries.append({"kind": "selector", "values": f.values})
    coords = [_quotient_coords(e["values"], measure) for e in entries]
    picked = extend_to_basis([], coords)
    basis = [entries[i] for i in picked]
    dim = len(measure.nonnull_atom_indices())
    assert len(basis) == dim, "factor basis extension failed (must not occur)"
    return basis


def build_product_lifting(
    gamma: VectorLifting,
    eta: VectorLifting,
    ps: ProductSpace,
    topologies: Optional[Tuple[FiniteTopology, FiniteTopology]] = None,
    cap: int = ENUM_CAP,
) -> ProductLifting:
    """Vector lifting on the top space fixing a basis of tensor
    representatives, hence compatible with the factor pair: π(f⊗g) =
    γ(f)⊗η(g) for all factor-measurable f, g, and every image has measurable
    vertical sections (horizontal too under the mirrored section condition).

    Needs the rectangle algebra inside the top space, the section condition,
    and a single right space.  With factor topologies given, both factor
    liftings must be strong for them; the resulting lifting then fixes the
    continuous functions of the product topology, whose strong condition is
    verified on the way.
    """
    if not ps.constant_right():
        raise ValueError("product liftings need a single right space")
    fub = check_fubini(ps, cap=cap)
    if not fub.holds("P0") or not fub.holds("C"):
        raise ProductPreconditionError(
            "product liftings need the rectangle algebra inside the top space "
            "and the section condition"
        )
    nu = ps.right_measures[0]
    if gamma.measure != ps.mu or eta.measure != nu:
        raise ValueError("factor liftings must live on the factor measures")
    cbar = fub.holds("Cbar")
    if topologies is not None:
        lt, rt = topologies
        left = _factor_basis(gamma, ps.mu, lt)
        right = _factor_basis(eta, nu, rt)
        pt = product_topology(lt, rt, ps, cap)
        assert check_strong_condition(ps.upsilon_measure, pt).ok, (
            "product strong condition must follow from the factor conditions"
        )
    else:
        left = _factor_basis(gamma, ps.mu, None)
        right = _factor_basis(eta, nu, None)
    ups = ps.upsilon_measure
    d = len(ups.nonnull_atom_indices())
    pair_order = sorted(
        ((i, j) for i in range(len(left)) for j in range(len(right))),
        key=lambda ij: (
            0 if left[ij[0]]["kind"] == "continuous" and right[ij[1]]["kind"] == "continuous" else 1,
            ij,
        ),
    )
    entries = []
    coords_list: List[Vec] = []
    span = Subspace([], d)
    for i, j in pair_order:
        t = tensor(left[i]["values"], right[j]["values"], ps)
        c = _quotient_coords(t.values, ups)
        assert not span.contains(c), "tensor block dependence (must not occur)"
        span = Subspace(list(span.basis) + [c], d)
        kind = (
            "continuous-tensor"
            if left[i]["kind"] == "continuous" and right[j]["kind"] == "continuous"
            else "tensor"
        )
        entries.append({"kind": kind, "pair": (i, j), "values": t.values})
        coords_list.append(c)
    if topologies is not None:
        # the continuous classes of the product meet the tensor classes
        # exactly in the continuous tensor block
        cont = Subspace(
            [
                _quotient_coords(
                    MeasurableFunction.indicator(ps.universe, a).values, ups
                )
                for a in pt.clopen_algebra().atoms
            ],
            d,
        )
        cc = Subspace(
            [c for e, c in zip(entries, coords_list) if e["kind"] == "continuous-tensor"], d
        )
        assert cont.intersect(Subspace(coords_list, d)) == cc, (
            "continuous block must exhaust the continuous tensor classes"
        )
    n_max = ps.mu.null_mask()
    m_max = nu.null_mask() if cbar else None
    for k in ups.nonnull_atom_indices():
        c = _quotient_coords(
            MeasurableFunction.indicator(ps.universe, ups.algebra.atoms[k]).values, ups
        )
        if span.contains(c):
            continue
        rep = section_repair(
            ps,
            MeasurableFunction.indicator(ps.universe, ups.algebra.atoms[k]).values,
            n_max,
            m_max,
        )
        span = Subspace(list(span.basis) + [c], d)
        entries.append({"kind": "atom", "atom": ups.algebra.atoms[k], "values": tuple(rep)})
    assert len(entries) == d, "rank-extension failure (must not occur)"
    pi = build_vector_lifting(ups, fix=[e["values"] for e in entries])
    pi.check_axioms()
    for e in entries:
        assert pi.fixes(e["values"]), "fixed representative escaped (must not occur)"
    certificate = {
        "mode": "strong" if topologies is not None else "plain",
        "dimension": d,
        "horizontal_sections": cbar,
        "left": left,
        "right": right,
        "basis": entries,
    }
    pl = ProductLifting(pi, gamma, eta, ps, certificate, strong=topologies is not None)
    # basis-level factor compatibility
    for i, j in pair_order:
        assert pl.tensor_identity(left[i]["values"], right[j]["values"])
    assert pl.sections_measurable()
    return pl


def build_section_invariant_lifting(
    gamma: VectorLifting,
    eta: VectorLifting,
    ps: ProductSpace,
    cap: int = ENUM_CAP,
) -> ProductLifting:
    """Product lifting on the skew-extended top space whose image rows are
    all fixed by the row selector.

    The top algebra is extended by the skew product of the left null ideal
    with the full right families; every extended class then has a
    representative measurable for the original top algebra.  Composing the
    row map after a plain product lifting of that representative lands every
    row in the selector's fixed points, stays in the class, and is linear,
    so it materializes as a vector lifting over the extension.
    """
    base = build_product_lifting(gamma, eta, ps, cap=cap)
    ext_ps = extend_product_by_skew_ideal(ps, null_ideal(ps.mu), cap)
    ups_ext = ext_ps.upsilon_measure
    n = ps.universe.size
    W = _top_space(ps)
    ext_null = ups_ext.null_mask()
    offpts = [p for p in range(n) if not ext_null >> p & 1]
    rows_eq = [tuple(b[p] for b in W.basis) for p in offpts]

    def representative(values):
        # unique original-algebra function in the extended class
        c = solve(rows_eq, [values[p] for p in offpts])
        assert c is not None, "extended class lost its representative (must not occur)"
        v = zero_vec(n)
        for ci, b in zip(c, W.basis):
            if ci:
                v = vec_add(v, vec_scale(ci, b))
        return v

    Meta = MarginalMap("vertical", eta, ps)
    nonnull = ups_ext.nonnull_atom_indices()
    profiles = []
    for j in nonnull:
        f = indicator(ups_ext.algebra.atoms[j], n)
        mid = base.lifting.apply(representative(f))
        assert Meta.pattern(mid) == (), "base image rows must be measurable"
        img = Meta.apply(mid).values
        atom = ups_ext.algebra.atoms[j]
        for p in offpts:
            assert img[p] == (ONE if atom >> p & 1 else ZERO), (
                "image left its own class (must not occur)"
            )
        profiles.append(img)
    rows = []
    for k in ups_ext.null_atom_indices():
        pts = list(iter_points(ups_ext.algebra.atoms[k]))
        row = []
        for img in profiles:
            vals = {img[p] for p in pts}
            assert len(vals) == 1, "image not constant on an extended atom (must not occur)"
            row.append(vals.pop())
        rows.append(tuple(row))
    phi = VectorLifting(ups_ext, rows)
    phi.check_axioms()
    # row invariance at basis level; linearity extends it to every image
    ys = ps.y_size
    for img in profiles:
        for x in range(ps.x_size):
            sec = tuple(img[x * ys : (x + 1) * ys])
            fixed = Meta.section_image(x, sec)
            assert fixed == sec, "image row escaped the selector's fixed points"
    certificate = {
        "mode": "section-invariant",
        "dimension": len(nonnull),
        "horizontal_sections": False,
        "left": base.certificate["left"],
        "right": base.certificate["right"],
        "basis": [
            {"kind": "extended-atom", "atom": ups_ext.algebra.atoms[j], "values": tuple(p)}
            for j, p in zip(nonnull, profiles)
        ],
    }
    pl = ProductLifting(phi, gamma, eta, ext_ps, certificate, strong=False)
    # factor compatibility survives the extension
    for k in ps.mu.nonnull_atom_indices():
        f = gamma.apply(MeasurableFunction.indicator(ps.x_universe, ps.mu.algebra.atoms[k]))
        for m in eta.measure.nonnull_atom_indices():
            g = eta.apply(
                MeasurableFunction.indicator(ps.y_universe, eta.measure.algebra.atoms[m])
            )
            assert pl.tensor_identity(f, g), "factor compatibility broke on the extension"
    return pl
