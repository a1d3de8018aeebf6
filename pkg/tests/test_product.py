"""Product spaces: section algebra, Fubini-type conditions, skew extensions,
and section repair."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liftlab.measure import RationalMeasure, null_ideal
from liftlab.product import (
    ProductPreconditionError,
    ProductSpace,
    assemble_from_sections,
    check_fubini,
    extend_product_by_skew_ideal,
    nil_null_ideals,
    product_algebra,
    product_measure,
    product_universe,
    rectangle,
    section_h,
    section_repair,
    section_v,
    skew_member,
    skew_null_ideal_family,
    trivial_product_space,
)
from liftlab.setalg import (
    FiniteAlgebra,
    Ideal,
    SetFamily,
    Universe,
    generated_algebra,
    iter_points,
    powerset_algebra,
    trivial_algebra,
    trivial_ideal,
)

from oracles import rand_partition, rand_weights

F = Fraction


def prob_weights(rng, count, allow_null=True):
    # rand_weights is not normalized; rescale to a probability vector
    while True:
        w = rand_weights(rng, count, force_null=allow_null and count > 1)
        total = sum(w)
        if total > 0:
            return [v / total for v in w]


def uniform(alg):
    n = alg.universe.size
    return RationalMeasure(
        alg, [F(bin(a).count("1"), n) for a in alg.atoms]
    )


# ---------------------------------------------------------------------------
# section / rectangle plumbing


def test_section_and_rectangle_basics():
    # X = {a,b}, Y = {u,v,w}; point (x,y) sits at bit x*3+y
    E = rectangle(0b10, 0b101, 3)
    assert E == 0b101000
    assert section_v(E, 0, 3) == 0
    assert section_v(E, 1, 3) == 0b101
    assert section_h(E, 0, 2, 3) == 0b10
    assert section_h(E, 2, 2, 3) == 0b10
    assert section_h(E, 1, 2, 3) == 0
    assert assemble_from_sections([0, 0b101], 3) == E


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 63), st.data())
def test_sections_reassemble(E, data):
    x_size, y_size = 2, 3
    cols = [section_v(E, x, y_size) for x in range(x_size)]
    assert assemble_from_sections(cols, y_size) == E
    # horizontal sections determine the set too
    rows = [section_h(E, y, x_size, y_size) for y in range(y_size)]
    back = 0
    for y, r in enumerate(rows):
        for x in iter_points(r):
            back |= 1 << (x * y_size + y)
    assert back == E


def test_product_algebra_and_measure():
    xu, yu = Universe("ab"), Universe("uv")
    sigma = powerset_algebra(xu)
    tau = trivial_algebra(yu)
    mu = RationalMeasure(sigma, [F(1, 4), F(3, 4)])
    nu = RationalMeasure(tau, [F(1)])
    pa = product_algebra(sigma, tau)
    assert pa.atoms == (0b0011, 0b1100)
    pm = product_measure(mu, nu)
    assert pm.of(0b0011) == F(1, 4) and pm.of(0b1100) == F(3, 4)


def test_product_space_validation():
    xu, yu = Universe("ab"), Universe("uv")
    mu = uniform(powerset_algebra(xu))
    nu = uniform(powerset_algebra(yu))
    top = product_measure(mu, nu)
    ps = ProductSpace(mu, [(nu.algebra, nu)], top)
    assert ps.x_size == 2 and ps.y_size == 2
    assert ps.constant_right()
    # a single right space broadcasts to every left point
    assert len(ps.right_algebras) == 2

    with pytest.raises(ValueError):
        ProductSpace(mu, [(nu.algebra, nu)] * 3, top)
    other = uniform(powerset_algebra(Universe("uvw")))
    with pytest.raises(ValueError):
        ProductSpace(mu, [(nu.algebra, nu), (other.algebra, other)], top)
    with pytest.raises(ValueError):
        ProductSpace(mu, [(nu.algebra, nu)], mu)  # top on the wrong universe
    heavy = RationalMeasure(powerset_algebra(xu), [F(1), F(1)])
    with pytest.raises(ValueError):
        ProductSpace(heavy, [(nu.algebra, nu)], top)

    finer = ps.with_top(
        uniform(powerset_algebra(ps.universe))
    )
    assert finer.upsilon.element_count() == 16
    assert finer.mu is mu


# ---------------------------------------------------------------------------
# the Fubini-type conditions


def test_trivial_product_passes_everything():
    rng = random.Random(7)
    xu, yu = Universe("abc"), Universe("uv")
    sigma = FiniteAlgebra(xu, [0b001, 0b110])
    tau = powerset_algebra(yu)
    mu = RationalMeasure(sigma, [F(1, 3), F(2, 3)])
    nu = RationalMeasure(tau, [F(1, 2), F(1, 2)])
    ps = trivial_product_space(mu, nu)
    rep = check_fubini(ps, "all")
    assert set(rep.results) == {"P0", "P1", "P2", "C", "Cbar"}
    assert rep.all_hold()
    assert rep.exceptional_columns == 0  # mu has no null sets


def test_p1_perturbation_is_caught_with_exact_witness():
    xu, yu = Universe("ab"), Universe("uv")
    mu = uniform(powerset_algebra(xu))
    nu = uniform(powerset_algebra(yu))
    base = trivial_product_space(mu, nu)
    # move mass between two rectangle atoms, keeping a probability measure
    skew = RationalMeasure(base.upsilon, [F(1, 2), F(0), F(1, 4), F(1, 4)])
    ps = base.with_top(skew)
    rep = check_fubini(ps, ["P0", "P1"])
    assert rep.holds("P0") and not rep.holds("P1")
    atom, lhs, rhs = rep.outcome("P1").witness
    assert lhs == ps.upsilon_measure.of(atom)
    # recompute the product value from the factor pair, not via the library
    pairs = [
        (a, b)
        for a in mu.algebra.atoms
        for b in nu.algebra.atoms
        if rectangle(a, b, ps.y_size) == atom
    ]
    assert len(pairs) == 1
    a, b = pairs[0]
    assert rhs == mu.of(a) * nu.of(b)
    assert lhs != rhs
    # the C integral sees the same discrepancy
    crep = check_fubini(ps, "C")
    assert not crep.holds("C")
    E, kind, detail = crep.outcome("C").witness
    assert kind == "integral mismatch"
    assert detail[0] == ps.upsilon_measure.of(E)


def test_p2_separates_from_p1():
    # indiscrete factors with a powerset top: the single rectangle atom
    # carries four non-null top atoms
    xu, yu = Universe("ab"), Universe("uv")
    mu = uniform(trivial_algebra(xu))
    nu = uniform(trivial_algebra(yu))
    top = uniform(powerset_algebra(product_universe(xu, yu)))
    ps = ProductSpace(mu, [(nu.algebra, nu)], top)
    rep = check_fubini(ps, ["P0", "P1", "P2"])
    assert rep.holds("P0") and rep.holds("P1")
    out = rep.outcome("P2")
    assert not out.holds
    r_atom, first, second = out.witness
    assert r_atom == 0b1111
    assert first != second
    assert ps.upsilon_measure.of(first) > 0 and ps.upsilon_measure.of(second) > 0


def test_p0_failure_witness_is_missing_rectangle_atom():
    xu, yu = Universe("ab"), Universe("uv")
    mu = uniform(powerset_algebra(xu))
    nu = uniform(powerset_algebra(yu))
    pu = product_universe(xu, yu)
    diag = FiniteAlgebra(pu, [0b1001, 0b0110])  # diagonal vs anti-diagonal
    ps = ProductSpace(mu, [(nu.algebra, nu)], uniform(diag))
    rep = check_fubini(ps, "P0")
    out = rep.outcome("P0")
    assert not out.holds
    assert out.witness in product_algebra(mu.algebra, nu.algebra).atoms
    assert out.witness not in diag


def test_c_failure_clause_section():
    # powerset top over an indiscrete right factor: singleton sections of
    # top sets escape tau at a positive column
    xu, yu = Universe("ab"), Universe("uv")
    mu = uniform(powerset_algebra(xu))
    nu = uniform(trivial_algebra(yu))
    top = uniform(powerset_algebra(product_universe(xu, yu)))
    ps = ProductSpace(mu, [(nu.algebra, nu)], top)
    rep = check_fubini(ps, "C")
    E, kind, x = rep.outcome("C").witness
    assert kind == "section"
    assert section_v(E, x, ps.y_size) not in ps.right_algebras[x]
    assert ps.mu.of(1 << x) > 0 or not (ps.mu.null_mask() >> x & 1)


def test_c_failure_clause_not_constant():
    # indiscrete left factor: the section measure varies inside the only
    # left atom
    xu, yu = Universe("ab"), Universe("uv")
    mu = uniform(trivial_algebra(xu))
    nu = uniform(powerset_algebra(yu))
    top = uniform(powerset_algebra(product_universe(xu, yu)))
    ps = ProductSpace(mu, [(nu.algebra, nu)], top)
    rep = check_fubini(ps, "C")
    E, kind, atom = rep.outcome("C").witness
    assert kind == "not constant on left atom"
    assert atom == 0b11
    vals = {nu.of(section_v(E, x, ps.y_size)) for x in iter_points(atom)}
    assert len(vals) > 1


def test_c_failure_clause_integral_mismatch():
    # all sections measurable and constant per (singleton) left atom, but
    # the diagonal weights disagree with the section integral
    xu, yu = Universe("ab"), Universe("uv")
    mu = uniform(powerset_algebra(xu))
    nu = uniform(powerset_algebra(yu))
    pu = product_universe(xu, yu)
    top = RationalMeasure(
        powerset_algebra(pu), [F(1, 2), F(0), F(0), F(1, 2)]
    )
    ps = ProductSpace(mu, [(nu.algebra, nu)], top)
    rep = check_fubini(ps, "C")
    E, kind, (lhs, total) = rep.outcome("C").witness
    assert kind == "integral mismatch"
    assert lhs == top.of(E) and lhs != total
    brute = sum(
        mu.of(1 << x) * nu.of(section_v(E, x, 2)) for x in range(2)
    )
    assert total == brute


def test_exceptional_columns_widen_c():
    # sections are junk over a null column; C tolerates it, and C_I does too
    # once the ideal prescribes that column
    xu, yu = Universe("ab"), Universe("uv")
    mu = RationalMeasure(powerset_algebra(xu), [F(0), F(1)])
    nu = uniform(trivial_algebra(yu))
    pu = product_universe(xu, yu)
    # atom {(a,u)} splits the null column; the positive column stays coarse
    top = RationalMeasure(
        FiniteAlgebra(pu, [0b0001, 0b0010, 0b1100]), [F(0), F(0), F(1)]
    )
    ps = ProductSpace(mu, [(nu.algebra, nu)], top)
    assert check_fubini(ps, "C").holds("C")
    I = Ideal(xu, [0, 0b01])
    rep = check_fubini(ps, "C_I", I=I)
    assert rep.holds("C_I")
    assert rep.exceptional_columns == 0b01
    # an ideal that misses the bad column leaves its sections exposed
    empty = trivial_ideal(xu)
    rep2 = check_fubini(ps, "C_I", I=empty)
    out = rep2.outcome("C_I")
    assert not out.holds and out.witness[1] == "section"
    with pytest.raises(ValueError):
        check_fubini(ps, "C_I", I=Ideal(xu, [0, 0b10]))  # positive member


def test_which_filtering_and_shape_errors():
    xu, yu = Universe("ab"), Universe("uv")
    mu = uniform(powerset_algebra(xu))
    nu = uniform(powerset_algebra(yu))
    coarse = uniform(trivial_algebra(yu))
    top = product_measure(mu, nu)

    varying_alg = ProductSpace(
        mu, [(nu.algebra, nu), (coarse.algebra, coarse)], top
    )
    rep = check_fubini(varying_alg, "all")
    assert set(rep.results) == {"C"}
    with pytest.raises(ValueError):
        check_fubini(varying_alg, "P0")

    skewed = RationalMeasure(nu.algebra, [F(1, 3), F(2, 3)])
    varying_measure = ProductSpace(
        mu, [(nu.algebra, nu), (nu.algebra, skewed)], top
    )
    rep = check_fubini(varying_measure, "all")
    assert set(rep.results) == {"P0", "C"}
    with pytest.raises(ValueError):
        check_fubini(varying_measure, "P1")
    with pytest.raises(ValueError):
        check_fubini(varying_measure, "Cbar")

    ps = trivial_product_space(mu, nu)
    with pytest.raises(ValueError):
        check_fubini(ps, "C_I")  # no ideal given
    with pytest.raises(ValueError):
        check_fubini(ps, "Q7")


def test_pi_system_route_agrees():
    xu, yu = Universe("abc"), Universe("uv")
    mu = RationalMeasure(FiniteAlgebra(xu, [0b011, 0b100]), [F(1, 2), F(1, 2)])
    nu = uniform(powerset_algebra(yu))
    ps = trivial_product_space(mu, nu)
    full = check_fubini(ps, "C", pi_system=False)
    atoms_only = check_fubini(ps, "C", pi_system=True)
    assert full.holds("C") and atoms_only.holds("C")
    assert atoms_only.pi_system_used and not full.pi_system_used


# ---------------------------------------------------------------------------
# nil null ideals


def test_nil_null_ideal_predicates():
    xu, yu = Universe("ab"), Universe("uv")
    mu = RationalMeasure(powerset_algebra(xu), [F(0), F(1)])
    nu = RationalMeasure(FiniteAlgebra(yu, [0b01, 0b10]), [F(0), F(1)])
    ps = trivial_product_space(mu, nu)
    t = nil_null_ideals(ps)
    # null column a is unconstrained; over b only nu-null sections pass
    assert t.right(rectangle(0b01, 0b11, 2))
    assert t.right(rectangle(0b10, 0b01, 2))
    assert not t.right(rectangle(0b10, 0b10, 2))
    # the completed form accepts subsets of the largest null section
    half = rectangle(0b10, 0b01, 2)
    assert t.right_completed(half)
    assert t.right_completed(half) and t.right(half)
    # left mirrors through rows
    assert t.left(rectangle(0b01, 0b11, 2))
    assert not t.left(rectangle(0b11, 0b01, 2) | rectangle(0b10, 0b10, 2))
    assert t.two_sided(rectangle(0b01, 0b01, 2))

    skewed = RationalMeasure(nu.algebra, [F(1, 2), F(1, 2)])
    varying = ProductSpace(
        mu,
        [(nu.algebra, nu), (skewed.algebra, skewed)],
        ps.upsilon_measure,
    )
    tv = nil_null_ideals(varying)
    assert tv.left is None and tv.two_sided is None
    # per-column families are respected: column b uses skewed, which has
    # no null sections
    assert not tv.right(rectangle(0b10, 0b01, 2))


def test_right_completed_is_weaker_than_right():
    # a section inside the null mask but not itself measurable-null passes
    # only the completed predicate
    xu, yu = Universe("ab"), Universe("uvw")
    mu = uniform(powerset_algebra(xu))
    nu = RationalMeasure(FiniteAlgebra(yu, [0b011, 0b100]), [F(0), F(1)])
    ps = trivial_product_space(mu, nu)
    t = nil_null_ideals(ps)
    E = rectangle(0b11, 0b001, 3)  # each section is half of the null atom
    assert t.right_completed(E)
    assert not t.right(E)


# ---------------------------------------------------------------------------
# skew membership and skew extensions


def test_skew_member_branches_agree():
    xu, yu = Universe("abc"), Universe("uv")
    pu = product_universe(xu, yu)
    tau = powerset_algebra(yu).element_family()
    coarse = trivial_algebra(yu).element_family()
    T = [tau, coarse, tau]
    E = rectangle(0b010, 0b01, 2)  # bad section only at column b
    ideal = Ideal(xu, [0, 0b010, 0b100, 0b110])
    assert skew_member(E, ideal, T, 2)
    # same family without its union: the slow path must scan members
    holey = SetFamily(xu, [0, 0b010, 0b100])
    assert skew_member(E, holey, T, 2)
    worse = E | rectangle(0b100, 0b01, 2)
    assert skew_member(worse, ideal, T, 2)
    assert not skew_member(worse, holey, T, 2)  # needs {b,c} in one member
    assert not skew_member(worse, trivial_ideal(xu), T, 2)


def test_skew_null_ideal_family_contents():
    xu, yu = Universe("ab"), Universe("uv")
    mu = RationalMeasure(powerset_algebra(xu), [F(0), F(1)])
    nu = uniform(powerset_algebra(yu))
    ps = trivial_product_space(mu, nu)
    I = Ideal(xu, [0, 0b01])
    fam = skew_null_ideal_family(ps, I)
    # column a free (4 section choices), column b pinned to the empty set
    assert sorted(fam.members) == [0b00, 0b01, 0b10, 0b11]


def test_skew_extension_refines_top_and_keeps_c():
    xu, yu = Universe("ab"), Universe("uv")
    mu = RationalMeasure(powerset_algebra(xu), [F(0), F(1)])
    nu = uniform(powerset_algebra(yu))
    ps = trivial_product_space(mu, nu)
    I = Ideal(xu, [0, 0b01])
    assert check_fubini(ps, "C_I", I=I).holds("C_I")
    out = extend_product_by_skew_ideal(ps, I)
    # the null column is now chopped to points, at measure zero
    for piece in (0b0001, 0b0010):
        assert piece in out.upsilon
        assert out.upsilon_measure.of(piece) == 0
    assert check_fubini(out, "C").holds("C")
    assert check_fubini(out, "C_I", I=I).holds("C_I")
    # factor layers are untouched
    assert out.mu is ps.mu and out.right_measures == ps.right_measures


def test_skew_extension_preconditions():
    xu, yu = Universe("ab"), Universe("uv")
    mu = uniform(powerset_algebra(xu))
    nu = uniform(powerset_algebra(yu))
    pu = product_universe(xu, yu)

    diag = RationalMeasure(powerset_algebra(pu), [F(1, 2), F(0), F(0), F(1, 2)])
    no_c = ProductSpace(mu, [(nu.algebra, nu)], diag)
    with pytest.raises(ProductPreconditionError) as exc:
        extend_product_by_skew_ideal(no_c, trivial_ideal(xu))
    assert "satisfy C" in str(exc.value)

    ok = trivial_product_space(mu, nu)
    with pytest.raises(ProductPreconditionError) as exc:
        extend_product_by_skew_ideal(ok, Ideal(xu, [0, 0b10]))
    assert "null left" in str(exc.value)


def test_skew_extension_rejects_sections_beyond_ideal():
    # two null columns but the ideal covers only one of them: the top set
    # with a rough section over the uncovered null column is rejected
    xu, yu = Universe("abc"), Universe("uv")
    mu = RationalMeasure(powerset_algebra(xu), [F(0), F(0), F(1)])
    nu = uniform(trivial_algebra(yu))
    pu = product_universe(xu, yu)
    rough = 1 << 2  # {(b,u)}: section {u} is not tau-measurable
    top = RationalMeasure(FiniteAlgebra(pu, [rough, ((1 << 6) - 1) ^ rough]), [F(0), F(1)])
    ps = ProductSpace(mu, [(nu.algebra, nu)], top)
    assert check_fubini(ps, "C").holds("C")
    I = Ideal(xu, [0, 0b001])
    with pytest.raises(ProductPreconditionError) as exc:
        extend_product_by_skew_ideal(ps, I)
    assert exc.value.witness == rough
    # widening the ideal to cover column b fixes it
    wide = Ideal(xu, [0, 0b001, 0b010, 0b011])
    out = extend_product_by_skew_ideal(ps, wide)
    assert check_fubini(out, "C").holds("C")


# ---------------------------------------------------------------------------
# section repair


def test_section_repair_zeroes_null_columns():
    xu, yu = Universe("ab"), Universe("uv")
    mu = RationalMeasure(powerset_algebra(xu), [F(0), F(1)])
    nu = uniform(powerset_algebra(yu))
    ps = trivial_product_space(mu, nu)
    h = [F(7), F(5), F(2), F(2)]  # junk over column a, constant over b
    fixed = section_repair(ps, h, N=0b01)
    assert fixed == (F(0), F(0), F(2), F(2))
    # untouched columns keep their values
    assert fixed[2:] == tuple(h[2:])


def test_section_repair_two_sided():
    xu, yu = Universe("ab"), Universe("uv")
    mu = RationalMeasure(powerset_algebra(xu), [F(0), F(1)])
    nu = RationalMeasure(powerset_algebra(yu), [F(0), F(1)])
    ps = trivial_product_space(mu, nu)
    h = [F(9), F(9), F(4), F(8)]
    fixed = section_repair(ps, h, N=0b01, M=0b01)
    assert fixed == (F(0), F(0), F(0), F(8))


def test_section_repair_preconditions():
    xu, yu = Universe("ab"), Universe("uv")
    mu = RationalMeasure(powerset_algebra(xu), [F(0), F(1)])
    nu = uniform(powerset_algebra(yu))
    ps = trivial_product_space(mu, nu)

    with pytest.raises(ProductPreconditionError):
        section_repair(ps, [F(0)] * 4, N=0b10)  # positive column set
    with pytest.raises(ValueError):
        section_repair(ps, [F(0)] * 3, N=0b01)

    # a kept column with an unmeasurable section survives repair and is
    # reported
    coarse_nu = uniform(trivial_algebra(yu))
    coarse = ProductSpace(
        mu,
        [(coarse_nu.algebra, coarse_nu)],
        RationalMeasure(
            FiniteAlgebra(ps.universe, [0b0011, 0b1100]), [F(0), F(1)]
        ),
    )
    with pytest.raises(ProductPreconditionError) as exc:
        section_repair(coarse, [F(0), F(0), F(1), F(2)], N=0b01)
    assert exc.value.witness == 1

    # top algebra too coarse to see the null-column rectangle
    pu = ps.universe
    blind = ProductSpace(
        mu,
        [(nu.algebra, nu)],
        RationalMeasure(FiniteAlgebra(pu, [0b0110, 0b1001]), [F(1, 2), F(1, 2)]),
    )
    with pytest.raises(ProductPreconditionError):
        section_repair(blind, [F(0)] * 4, N=0b01)

    # row repair needs one right space
    skewed = RationalMeasure(nu.algebra, [F(1, 3), F(2, 3)])
    varying = ProductSpace(
        mu, [(nu.algebra, nu), (skewed.algebra, skewed)], ps.upsilon_measure
    )
    with pytest.raises(ValueError):
        section_repair(varying, [F(0)] * 4, N=0b01, M=0b01)


def test_section_repair_rejects_positive_mass_removal():
    xu, yu = Universe("ab"), Universe("uv")
    mu = RationalMeasure(powerset_algebra(xu), [F(0), F(1)])
    nu = uniform(powerset_algebra(yu))
    # top gives the mu-null column positive mass, so repair must refuse
    bad_top = RationalMeasure(
        powerset_algebra(product_universe(xu, yu)),
        [F(1, 2), F(0), F(1, 4), F(1, 4)],
    )
    ps = ProductSpace(mu, [(nu.algebra, nu)], bad_top)
    with pytest.raises(ProductPreconditionError) as exc:
        section_repair(ps, [F(0)] * 4, N=0b01)
    assert exc.value.witness == 0b01


# ---------------------------------------------------------------------------
# seeded rectangle-generated instances: C and friends by construction


def rect_generated_space(rng, x_size, y_size):
    """Top algebra generated by measurable rectangles, top weights from the
    uniform-within-atom point masses of the factors.  Sections are then
    measurable with per-atom constant measure, so C holds by construction."""
    xu = Universe("abcd"[:x_size])
    yu = Universe("uvw"[:y_size])
    sigma = FiniteAlgebra(xu, rand_partition(rng, x_size))
    tau = FiniteAlgebra(yu, rand_partition(rng, y_size))
    mu = RationalMeasure(sigma, prob_weights(rng, len(sigma.atoms)))
    nu = RationalMeasure(tau, prob_weights(rng, len(tau.atoms)))
    pu = product_universe(xu, yu)

    gens = []
    for _ in range(rng.randint(1, 3)):
        A = 0
        for a in sigma.atoms:
            if rng.random() < 0.5:
                A |= a
        B = 0
        for b in tau.atoms:
            if rng.random() < 0.5:
                B |= b
        gens.append(rectangle(A, B, y_size))
    top_alg = generated_algebra(SetFamily(pu, gens))

    mx, ny = {}, {}
    for a, w in zip(sigma.atoms, mu.atom_weights):
        for x in iter_points(a):
            mx[x] = w / bin(a).count("1")
    for b, w in zip(tau.atoms, nu.atom_weights):
        for y in iter_points(b):
            ny[y] = w / bin(b).count("1")
    weights = [
        sum(
            (mx[p // y_size] * ny[p % y_size] for p in iter_points(atom)),
            start=F(0),
        )
        for atom in top_alg.atoms
    ]
    top = RationalMeasure(top_alg, weights)
    return ProductSpace(mu, [(tau, nu)], top)


def null_atom_ideal(mu):
    """All unions of null atoms of mu; an ideal of the left algebra."""
    nulls = [a for a, w in zip(mu.algebra.atoms, mu.atom_weights) if w == 0]
    members = {0}
    for a in nulls:
        members |= {m | a for m in members}
    return Ideal(mu.algebra.universe, sorted(members))


@pytest.mark.parametrize("seed", range(25))
def test_rectangle_generated_tops_satisfy_c(seed):
    rng = random.Random(1000 + seed)
    ps = rect_generated_space(rng, rng.randint(2, 3), rng.randint(2, 3))
    assert check_fubini(ps, "C").holds("C")
    assert check_fubini(ps, "Cbar").holds("Cbar")
    I = null_atom_ideal(ps.mu)
    assert check_fubini(ps, "C_I", I=I).holds("C_I")
    # the skew extension applies whenever all sections are measurable,
    # which the construction guarantees even over the trivial ideal
    out = extend_product_by_skew_ideal(ps, I)
    assert check_fubini(out, "C").holds("C")
    for E in skew_null_ideal_family(ps, I):
        assert E in out.upsilon
        assert out.upsilon_measure.of(E) == 0
