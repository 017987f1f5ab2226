"""Quadratic forms over Q: diagonalization, classical invariants, local comparison.

The Hasse invariant convention used throughout is the strictly lower
triangular one, hasse(q, v) = sum_{i<j} hilbert_bit(a_i, a_j, v).  Every
identity consumed downstream is a difference of invariants of forms with
equal dimension and determinant, which is convention independent; the
additivity law below is tested rather than assumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .arith import (
    REAL,
    Place,
    Rational,
    SquareClass,
    hilbert_bit,
    is_local_square,
    square_class,
    support_places,
)


class Degenerate(Exception):
    """Raised when a Gram matrix or diagonal form is singular."""


@dataclass(frozen=True)
class DiagonalForm:
    """A nondegenerate diagonal quadratic form <a_1, ..., a_n> over Q."""

    coeffs: Tuple[Fraction, ...]

    def __post_init__(self):
        cs = tuple(Fraction(c) for c in self.coeffs)
        if any(c == 0 for c in cs):
            raise Degenerate("zero diagonal coefficient")
        object.__setattr__(self, "coeffs", cs)

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    def det(self) -> Fraction:
        d = Fraction(1)
        for c in self.coeffs:
            d *= c
        return d

    def det_class(self) -> SquareClass:
        # multiply per-coefficient classes; factoring the full product
        # would blow through the factorization guard
        cls = SquareClass(1)
        for c in self.coeffs:
            cls = cls * square_class(c)
        return cls

    def signature(self) -> Tuple[int, int]:
        pos = sum(1 for c in self.coeffs if c > 0)
        return pos, self.dim - pos

    def concat(self, other: "DiagonalForm") -> "DiagonalForm":
        return DiagonalForm(self.coeffs + other.coeffs)

    def scaled(self, s: Rational) -> "DiagonalForm":
        s = Fraction(s)
        return DiagonalForm(tuple(s * c for c in self.coeffs))

    def __repr__(self):
        return "<" + ", ".join(str(c) for c in self.coeffs) + ">"


def diag(*coeffs: Rational) -> DiagonalForm:
    return DiagonalForm(tuple(Fraction(c) for c in coeffs))


GramMatrix = List[List[Fraction]]


def gram(rows: Sequence[Sequence[Rational]]) -> GramMatrix:
    g = [[Fraction(x) for x in row] for row in rows]
    n = len(g)
    for row in g:
        if len(row) != n:
            raise ValueError("Gram matrix must be square")
    for i in range(n):
        for j in range(n):
            if g[i][j] != g[j][i]:
                raise ValueError("Gram matrix must be symmetric")
    return g


def block_diag(blocks: Sequence[GramMatrix]) -> GramMatrix:
    n = sum(len(b) for b in blocks)
    out = [[Fraction(0)] * n for _ in range(n)]
    o = 0
    for b in blocks:
        k = len(b)
        for i in range(k):
            for j in range(k):
                out[o + i][o + j] = b[i][j]
        o += k
    return out


def _det(g: GramMatrix) -> Fraction:
    # fraction-free-ish Gaussian elimination on a copy
    m = [row[:] for row in g]
    n = len(m)
    d = Fraction(1)
    for i in range(n):
        piv = next((r for r in range(i, n) if m[r][i] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != i:
            m[i], m[piv] = m[piv], m[i]
            d = -d
        d *= m[i][i]
        inv = 1 / m[i][i]
        for r in range(i + 1, n):
            f = m[r][i] * inv
            if f:
                for c in range(i, n):
                    m[r][c] -= f * m[i][c]
    return d


@dataclass
class Diagonalization:
    form: DiagonalForm
    basis: List[List[Fraction]]  # columns C with C^T G C diagonal


def diagonalize(g: GramMatrix) -> Diagonalization:
    """Diagonalize a symmetric Gram matrix by congruence over Q.

    Pivot rule: first nonzero diagonal entry in the remaining block; if the
    whole remaining diagonal vanishes, add e_j into e_i for the first
    off-diagonal nonzero (i, j) and retry.  The change of basis is returned
    and verified exactly; raises Degenerate on singular input.
    """
    m = [row[:] for row in g]
    n = len(m)
    cols = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]

    def col_op(dst, src, f):
        # column dst += f * column src, symmetric row op, basis update
        for r in range(n):
            m[r][dst] += f * m[r][src]
        for c in range(n):
            m[dst][c] += f * m[src][c]
        for r in range(n):
            cols[r][dst] += f * cols[r][src]

    def col_swap(i, j):
        for r in range(n):
            m[r][i], m[r][j] = m[r][j], m[r][i]
        for c in range(n):
            m[i][c], m[j][c] = m[j][c], m[i][c]
        for r in range(n):
            cols[r][i], cols[r][j] = cols[r][j], cols[r][i]

    for i in range(n):
        if m[i][i] == 0:
            piv = next((k for k in range(i + 1, n) if m[k][k] != 0), None)
            if piv is not None:
                col_swap(i, piv)
            else:
                off = None
                for k in range(i, n):
                    for l in range(k + 1, n):
                        if m[k][l] != 0:
                            off = (k, l)
                            break
                    if off:
                        break
                if off is None:
                    raise Degenerate("Gram matrix is singular")
                k, l = off
                col_op(k, l, Fraction(1))
                if k != i:
                    col_swap(i, k)
        inv = 1 / m[i][i]
        for j in range(i + 1, n):
            if m[i][j] != 0:
                col_op(j, i, -m[i][j] * inv)
    coeffs = tuple(m[i][i] for i in range(n))
    if any(c == 0 for c in coeffs):
        raise Degenerate("Gram matrix is singular")
    # exact audit of the congruence witness
    check = _congruent(g, cols)
    for i in range(n):
        for j in range(n):
            expect = coeffs[i] if i == j else Fraction(0)
            assert check[i][j] == expect, "diagonalization witness failed"
    return Diagonalization(DiagonalForm(coeffs), cols)


def _congruent(g: GramMatrix, c: List[List[Fraction]]) -> GramMatrix:
    n = len(g)
    gc = [[sum(g[i][k] * c[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    return [[sum(c[k][i] * gc[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def diagonalize_gram(g: GramMatrix) -> DiagonalForm:
    return diagonalize(g).form


# ---------------------------------------------------------------------------
# Local invariants


@dataclass
class LocalProfile:
    dim: int
    det: SquareClass
    hasse: Dict[Place, int]  # nonzero bits only
    sig: Tuple[int, int]

    def hasse_at(self, v: Place) -> int:
        return self.hasse.get(v, 0)


def hasse_bit(q: DiagonalForm, v: Place) -> int:
    cs = q.coeffs
    bit = 0
    for i in range(len(cs)):
        for j in range(i + 1, len(cs)):
            bit ^= hilbert_bit(cs[i], cs[j], v)
    return bit


def local_profile(q: DiagonalForm) -> LocalProfile:
    support = support_places(*q.coeffs)
    hasse = {}
    for v in support:
        b = hasse_bit(q, v)
        if b:
            hasse[v] = b
    return LocalProfile(q.dim, q.det_class(), hasse, q.signature())


def hasse_sum_bit(qs: Sequence[DiagonalForm], v: Place) -> int:
    """Hasse bit of the orthogonal sum, via additivity over the summands."""
    bit = 0
    dets: List[Fraction] = []
    for q in qs:
        bit ^= hasse_bit(q, v)
        for d in dets:
            bit ^= hilbert_bit(d, q.det(), v)
        dets.append(q.det())
    return bit


def _isotropic_finite(dim: int, det: SquareClass, hasse: int, v: Place) -> bool:
    # standard anisotropy criteria over Q_p in terms of (dim, det, hasse)
    if dim >= 5:
        return True
    if dim == 4:
        return (not det.is_trivial and not is_local_square(det.rep, v)) or hasse == hilbert_bit(-1, -1, v)
    if dim == 3:
        return hasse == hilbert_bit(-1, -det.rep, v)
    if dim == 2:
        return is_local_square(-det.rep, v)
    return False


def witt_index_local(q: DiagonalForm, v: Place) -> int:
    """Witt index of q over Q_v, computed from invariants (no search)."""
    if v.is_real:
        pos, neg = q.signature()
        return min(pos, neg)
    dim = q.dim
    det = q.det_class()
    hasse = hasse_bit(q, v)
    w = 0
    while dim >= 2 and _isotropic_finite(dim, det, hasse, v):
        # split a hyperbolic plane: dim -2, det *= -1, hasse shifts by (-1, det')
        dim -= 2
        det = det * SquareClass(-1)
        hasse = (hasse + hilbert_bit(-1, det.rep, v)) % 2
        w += 1
        if dim == 0:
            break
    return w


def is_isotropic_local(q: DiagonalForm, v: Place) -> bool:
    return witt_index_local(q, v) >= 1


def is_hyperbolic_form_local(q: DiagonalForm, v: Place) -> bool:
    return q.dim % 2 == 0 and witt_index_local(q, v) == q.dim // 2


def locally_isometric(q1: DiagonalForm, q2: DiagonalForm, v: Place) -> bool:
    if q1.dim != q2.dim:
        return False
    if v.is_real:
        return q1.signature() == q2.signature()
    if not is_local_square(q1.det() * q2.det(), v):
        return False
    return hasse_bit(q1, v) == hasse_bit(q2, v)


def hyperbolic_plane() -> DiagonalForm:
    return diag(1, -1)


def hyperbolic(r: int) -> DiagonalForm:
    return diag(*([1, -1] * r))
