"""Exact linear algebra over the rationals.

Vectors are tuples of Fraction indexed by points of a universe.  Everything
here is deterministic: elimination always pivots on the lowest available
column, so reduced bases are canonical and comparable across runs.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

Vec = Tuple[Fraction, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


def vec(values: Iterable) -> Vec:
    return tuple(Fraction(v) for v in values)


def zero_vec(n: int) -> Vec:
    return (ZERO,) * n


def vec_add(a: Vec, b: Vec) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def vec_sub(a: Vec, b: Vec) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def vec_scale(c: Fraction, a: Vec) -> Vec:
    return tuple(c * x for x in a)


def vec_mul(a: Vec, b: Vec) -> Vec:
    """Pointwise product; the algebra multiplication of functions."""
    return tuple(x * y for x, y in zip(a, b))


def dot(a: Vec, b: Vec) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), ZERO)


def indicator(mask: int, n: int) -> Vec:
    return tuple(ONE if mask >> p & 1 else ZERO for p in range(n))


def rref(rows: Sequence[Vec]) -> Tuple[List[Vec], List[int]]:
    """Reduced row echelon form; returns nonzero rows and their pivot columns."""
    work = [list(r) for r in rows]
    if not work:
        return [], []
    ncols = len(work[0])
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = None
        for i in range(r, len(work)):
            if work[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        work[r], work[pivot_row] = work[pivot_row], work[r]
        inv = ONE / work[r][c]
        work[r] = [inv * x for x in work[r]]
        for i in range(len(work)):
            if i != r and work[i][c] != 0:
                f = work[i][c]
                work[i] = [x - f * y for x, y in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
        if r == len(work):
            break
    return [tuple(row) for row in work[:r]], pivots


def rank(rows: Sequence[Vec]) -> int:
    return len(rref(rows)[0])


def nullspace(rows: Sequence[Vec], ncols: Optional[int] = None) -> List[Vec]:
    """Canonical kernel basis of the row system, one vector per free column."""
    if ncols is None:
        if not rows:
            raise ValueError("empty system needs an explicit column count")
        ncols = len(rows[0])
    red, pivots = rref(rows)
    pivot_set = set(pivots)
    basis: List[Vec] = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = [ZERO] * ncols
        v[free] = ONE
        for row, pc in zip(red, pivots):
            v[pc] = -row[free]
        basis.append(tuple(v))
    return basis


def solve(rows: Sequence[Vec], rhs: Sequence[Fraction]) -> Optional[Vec]:
    """One exact solution of rows·x = rhs with free variables at zero, or None."""
    if not rows:
        return () if not any(rhs) else None
    ncols = len(rows[0])
    aug = [list(r) + [Fraction(b)] for r, b in zip(rows, rhs)]
    red, pivots = rref([tuple(r) for r in aug])
    x = [ZERO] * ncols
    for row, pc in zip(red, pivots):
        if pc == ncols:
            return None  # inconsistent: pivot landed in the rhs column
        x[pc] = row[-1]
    return tuple(x)


class Subspace:
    """Rational subspace held as a canonical reduced basis.

    Equality and containment are decided exactly; intersection uses the
    block-matrix (Zassenhaus) construction.
    """

    __slots__ = ("ambient", "basis", "pivots")

    def __init__(self, vectors: Sequence[Vec], ambient: int):
        self.ambient = ambient
        for v in vectors:
            if len(v) != ambient:
                raise ValueError("vector width mismatch")
        self.basis, self.pivots = rref(vectors)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v: Vec) -> bool:
        return self.coords(v) is not None

    def coords(self, v: Vec) -> Optional[Vec]:
        """Coefficients of v in the reduced basis, or None."""
        w = list(v)
        coeffs = []
        for row, pc in zip(self.basis, self.pivots):
            c = w[pc]
            coeffs.append(c)
            if c != 0:
                w = [x - c * y for x, y in zip(w, row)]
        if any(w):
            return None
        return tuple(coeffs)

    def is_subspace_of(self, other: "Subspace") -> bool:
        return all(other.contains(v) for v in self.basis)

    def intersect(self, other: "Subspace") -> "Subspace":
        if self.ambient != other.ambient:
            raise ValueError("ambient mismatch")
        n = self.ambient
        block: List[Vec] = []
        for u in self.basis:
            block.append(tuple(u) + tuple(u))
        for w in other.basis:
            block.append(tuple(w) + zero_vec(n))
        red, _ = rref(block)
        inter = [row[n:] for row in red if not any(row[:n])]
        return Subspace(inter, n)

    def sum_with(self, other: "Subspace") -> "Subspace":
        return Subspace(list(self.basis) + list(other.basis), self.ambient)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Subspace)
            and self.ambient == other.ambient
            and self.basis == other.basis
        )

    def __hash__(self) -> int:
        return hash((self.ambient, tuple(self.basis)))

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self.ambient})"


def extend_to_basis(current: Sequence[Vec], candidates: Sequence[Vec]) -> List[int]:
    """Indices of candidates greedily admitted to enlarge the span, scan order."""
    rows = list(current)
    base_rank = rank(rows)
    taken: List[int] = []
    for k, v in enumerate(candidates):
        trial = rows + [v]
        r = rank(trial)
        if r > base_rank:
            rows = trial
            base_rank = r
            taken.append(k)
    return taken


def independent(vectors: Sequence[Vec]) -> bool:
    return rank(vectors) == len(vectors)


def outside_all(space: Subspace, proper: Sequence[Subspace]) -> Optional[Vec]:
    """A vector of `space` avoiding every listed proper subspace.

    Over the rationals a vector space is never a finite union of proper
    subspaces, so a moment-curve sweep over basis combinations must exit all
    of them after at most dim·len(proper)+1 values of the parameter.
    """
    if space.dim == 0:
        return None
    for sub in proper:
        if space.is_subspace_of(sub):
            return None  # not actually proper on space
    limit = space.dim * len(proper) + 1
    for t in range(1, max(limit, 1) + 1):
        v = zero_vec(space.ambient)
        power = ONE
        for b in space.basis:
            v = vec_add(v, vec_scale(power, b))
            power *= t
        if all(not sub.contains(v) for sub in proper):
            return v
    raise AssertionError("moment-curve sweep exhausted; bound argument violated")
