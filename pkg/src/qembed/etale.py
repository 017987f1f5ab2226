"""Etale algebras with involution over Q (the multiquadratic class).

A validated algebra is a product of components, each one of

* ``Trivial``    -- the base field Q with the identity involution
                    (orthogonal case of odd rank only),
* ``SplitPair``  -- F x F with the swap involution, F rational or quadratic,
* ``Quad``       -- F(sqrt d) with d in Q^x not a square in F, the involution
                    fixing F and negating sqrt d.

In the unitary case every component, tensored with the center L = Q(sqrt
delta), must reproduce F_i(sqrt delta); concretely every Quad parameter d
must agree with delta up to squares of F_i, and components in which delta
becomes a square are stored as SplitPair.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from .arith import (
    REAL,
    Place,
    Rational,
    SquareClass,
    is_local_square,
    square_class,
)
from .quadform import (
    DiagonalForm,
    GramMatrix,
    block_diag,
    diagonalize_gram,
    gram,
)


class ValidationError(Exception):
    pass


class DimensionMismatch(ValidationError):
    pass


class UnitaryClassMismatch(ValidationError):
    pass


class MultipleTrivial(ValidationError):
    pass


class ZeroScale(ValidationError):
    pass


@dataclass(frozen=True)
class BaseField:
    """Q (m is None) or the quadratic field Q(sqrt m), m squarefree, m != 0, 1."""

    m: Optional[int] = None

    def __post_init__(self):
        if self.m is not None:
            if self.m in (0, 1) or square_class(self.m).rep != self.m:
                raise ValidationError(f"base field parameter must be squarefree != 0,1: {self.m}")

    @property
    def degree(self) -> int:
        return 1 if self.m is None else 2

    def is_square_in(self, d: Rational) -> bool:
        """Is the rational d a square in this field?"""
        c = square_class(d)
        if c.is_trivial:
            return True
        return self.m is not None and c.rep == self.m

    def __repr__(self):
        return "Q" if self.m is None else f"Q(sqrt{self.m})"


QQ = BaseField(None)


class Kind(enum.Enum):
    TRIVIAL = "trivial"
    SPLIT_PAIR = "split_pair"
    QUAD = "quad"


@dataclass(frozen=True)
class Component:
    F: BaseField
    kind: Kind
    d: Optional[Fraction] = None  # Quad only; 1 for the others

    def __post_init__(self):
        if self.kind is Kind.QUAD:
            if self.d is None or Fraction(self.d) == 0:
                raise ValidationError("Quad component needs a nonzero d")
            object.__setattr__(self, "d", Fraction(self.d))
        else:
            object.__setattr__(self, "d", Fraction(1))
        if self.kind is Kind.TRIVIAL and self.F != QQ:
            raise ValidationError("Trivial component lives over Q")

    @property
    def rank(self) -> int:
        """Rank of E_i as a Q-algebra."""
        if self.kind is Kind.TRIVIAL:
            return 1
        return 2 * self.F.degree

    @property
    def fixed_degree(self) -> int:
        """Q-dimension of the fixed field F_i."""
        return self.F.degree

    def d_class(self) -> SquareClass:
        return square_class(self.d)

    def __repr__(self):
        if self.kind is Kind.TRIVIAL:
            return "Trivial"
        if self.kind is Kind.SPLIT_PAIR:
            return f"SplitPair({self.F})"
        return f"Quad({self.F}, d={self.d})"


def quad(F: BaseField, d: Rational) -> Component:
    return Component(F, Kind.QUAD, Fraction(d))


def split_pair(F: BaseField = QQ) -> Component:
    return Component(F, Kind.SPLIT_PAIR)


def trivial() -> Component:
    return Component(QQ, Kind.TRIVIAL)


class Case(enum.Enum):
    ORTHOGONAL = "orthogonal"
    SYMPLECTIC = "symplectic"
    UNITARY = "unitary"


@dataclass(frozen=True)
class EtaleAlgebra:
    case: Case
    components: Tuple[Component, ...]
    delta: Optional[int] = None  # unitary center parameter, squarefree != 0,1

    @property
    def m(self) -> int:
        return len(self.components)

    @property
    def rank(self) -> int:
        """n: rank over the center L (= rank over Q in the first-kind cases)."""
        if self.case is Case.UNITARY:
            return sum(c.fixed_degree for c in self.components)
        return sum(c.rank for c in self.components)

    def __repr__(self):
        delta = f", delta={self.delta}" if self.case is Case.UNITARY else ""
        return f"EtaleAlgebra({self.case.value}{delta}, {list(self.components)})"


def validate(case: Case, components: Sequence[Component], delta: Optional[int] = None) -> EtaleAlgebra:
    """Normalize and validate an etale algebra with involution.

    Quad components whose d is a square in F are rewritten as SplitPair;
    the case-specific shape of the component list is enforced.
    """
    comps: List[Component] = []
    for c in components:
        if c.kind is Kind.QUAD and c.F.is_square_in(c.d):
            comps.append(Component(c.F, Kind.SPLIT_PAIR))
        else:
            comps.append(c)

    if case is Case.UNITARY:
        if delta is None:
            raise ValidationError("unitary case needs delta")
        dc = square_class(delta)
        if dc.is_trivial or dc.rep != delta:
            raise ValidationError("delta must be squarefree and not a square")
        for i, c in enumerate(comps):
            if c.kind is Kind.TRIVIAL:
                raise DimensionMismatch("unitary case admits no trivial component")
            if c.F.is_square_in(delta):
                # sqrt(delta) lies in F: the component is forced split
                if c.kind is Kind.QUAD:
                    comps[i] = Component(c.F, Kind.SPLIT_PAIR)
                continue
            if c.kind is Kind.SPLIT_PAIR:
                raise UnitaryClassMismatch(
                    f"component {i}: split pair requires sqrt(delta) in {c.F}")
            # d must agree with delta up to squares of F
            if not c.F.is_square_in(Fraction(c.d) * delta):
                raise UnitaryClassMismatch(
                    f"component {i}: d = {c.d} is not delta = {delta} up to squares of {c.F}")
        return EtaleAlgebra(case, tuple(comps), delta)

    n_triv = sum(1 for c in comps if c.kind is Kind.TRIVIAL)
    if n_triv > 1:
        raise MultipleTrivial("at most one trivial component")
    n = sum(c.rank for c in comps)
    if case is Case.SYMPLECTIC:
        if n_triv:
            raise DimensionMismatch("symplectic case admits no trivial component")
        if n % 2:
            raise DimensionMismatch("symplectic rank must be even")
    else:
        if (n % 2 == 1) != (n_triv == 1):
            raise DimensionMismatch("odd orthogonal rank needs exactly one trivial component")
    if n == 0:
        raise DimensionMismatch("empty algebra")
    return EtaleAlgebra(case, tuple(comps), None)


# ---------------------------------------------------------------------------
# Trace forms


@dataclass
class TraceData:
    """Trace form of (E, sigma) with its determinant bookkeeping.

    For the first-kind cases `form` is the rational diagonalization of the
    Gram of Tr(x sigma y); in the unitary case it is the diagonalized
    hermitian Gram written on rational bases (entries in Q).  `det_t` is the
    exact determinant of that Gram and `disc_e` the square class of the
    plain trace form Tr(xy) of E.
    """

    form: DiagonalForm
    blocks: List[DiagonalForm]
    det_t: Fraction
    disc_e: SquareClass
    r: Optional[int]  # n/2 in the even first-kind cases

    def det_class(self) -> SquareClass:
        return self.form.det_class()


def _component_gram(c: Component) -> GramMatrix:
    """Gram of Tr(x sigma y) on the standard rational basis (first kind)."""
    m = c.F.m
    if c.kind is Kind.TRIVIAL:
        return gram([[1]])
    if c.kind is Kind.SPLIT_PAIR:
        if m is None:
            return gram([[0, 1], [1, 0]])
        return gram([
            [0, 0, 2, 0],
            [0, 0, 0, 2 * m],
            [2, 0, 0, 0],
            [0, 2 * m, 0, 0],
        ])
    d = c.d
    if m is None:
        return gram([[2, 0], [0, -2 * d]])
    return gram([
        [4, 0, 0, 0],
        [0, 4 * m, 0, 0],
        [0, 0, -4 * d, 0],
        [0, 0, 0, -4 * d * m],
    ])


def _component_plain_gram(c: Component) -> GramMatrix:
    """Gram of the plain trace form Tr(x y) of E_i over Q."""
    m = c.F.m
    if c.kind is Kind.TRIVIAL:
        return gram([[1]])
    if c.kind is Kind.SPLIT_PAIR:
        if m is None:
            return gram([[1, 0], [0, 1]])
        # F x F: orthogonal sum of two copies of the trace form of F
        return block_diag([gram([[2, 0], [0, 2 * m]]), gram([[2, 0], [0, 2 * m]])])
    d = c.d
    if m is None:
        return gram([[2, 0], [0, 2 * d]])
    return gram([
        [4, 0, 0, 0],
        [0, 4 * m, 0, 0],
        [0, 0, 4 * d, 0],
        [0, 0, 0, 4 * d * m],
    ])


def _component_hermitian_gram(c: Component) -> GramMatrix:
    """Unitary case: Gram of the hermitian form Tr_{E/L}(x sigma y) on an F-basis.

    For E_i = F_i tensor L this equals the rational trace Gram of F_i/Q; a
    split pair contributes a hyperbolic plane.
    """
    if c.kind is Kind.SPLIT_PAIR:
        return gram([[0, 1], [1, 0]])
    m = c.F.m
    if m is None:
        return gram([[1]])
    return gram([[2, 0], [0, 2 * m]])


def trace_data(e: EtaleAlgebra) -> TraceData:
    if e.case is Case.UNITARY:
        blocks_g = [_component_hermitian_gram(c) for c in e.components]
    else:
        blocks_g = [_component_gram(c) for c in e.components]
    blocks = [diagonalize_gram(g) for g in blocks_g]
    form = DiagonalForm(tuple(x for b in blocks for x in b.coeffs))
    det_t = form.det()
    # disc(E): square class of the plain trace form of E over Q
    disc = SquareClass(1)
    for c in e.components:
        disc = disc * diagonalize_gram(_component_plain_gram(c)).det_class()
    n = e.rank
    r = n // 2 if (e.case is not Case.UNITARY and n % 2 == 0) else None
    return TraceData(form, blocks, det_t, disc, r)


def disc_e_sigma(e: EtaleAlgebra) -> SquareClass:
    """disc(E, sigma) = det of the trace form, as a square class."""
    return trace_data(e).det_class()


def disc_e(e: EtaleAlgebra) -> SquareClass:
    """disc(E) = det of the plain trace form of E, as a square class."""
    return trace_data(e).disc_e


# Scales: one entry per component; rational for degree-1 F, an (x, y) pair
# representing x + y*sqrt(m) for quadratic F.
Scale = Union[Fraction, int, Tuple[Rational, Rational]]


def _as_pair(a: Scale) -> Tuple[Fraction, Fraction]:
    if isinstance(a, tuple):
        return Fraction(a[0]), Fraction(a[1])
    return Fraction(a), Fraction(0)


def scale_norm(c: Component, a: Scale) -> Fraction:
    """N_{F_i/Q}(a_i) for a scale in the fixed field."""
    if c.F.m is None:
        v = Fraction(a if not isinstance(a, tuple) else a[0])
        if v == 0:
            raise ZeroScale("zero scale")
        return v
    x, y = _as_pair(a)
    n = x * x - c.F.m * y * y
    if n == 0:
        raise ZeroScale("zero scale (norm vanishes)")
    return n


def _scaled_component_gram(c: Component, a: Scale) -> GramMatrix:
    """Gram of T_a on the standard basis, per component (first kind)."""
    m = c.F.m
    if c.kind is Kind.TRIVIAL:
        v = Fraction(a if not isinstance(a, tuple) else a[0])
        if v == 0:
            raise ZeroScale("zero scale")
        return gram([[v]])
    if m is None:
        v = Fraction(a if not isinstance(a, tuple) else a[0])
        if v == 0:
            raise ZeroScale("zero scale")
        if c.kind is Kind.SPLIT_PAIR:
            return gram([[0, v], [v, 0]])
        return gram([[2 * v, 0], [0, -2 * v * c.d]])
    x, y = _as_pair(a)
    if x == 0 and y == 0:
        raise ZeroScale("zero scale")
    mm = [[2 * x, 2 * y * m], [2 * y * m, 2 * x * m]]
    if c.kind is Kind.SPLIT_PAIR:
        z = [[Fraction(0)] * 2 for _ in range(2)]
        return gram([z[0] + mm[0], z[1] + mm[1], mm[0] + z[0], mm[1] + z[1]])
    d = c.d
    big = [[2 * v for v in row] for row in mm]  # trace over E doubles
    zero = [Fraction(0), Fraction(0)]
    return gram([
        big[0] + zero,
        big[1] + zero,
        zero + [-d * v for v in big[0]],
        zero + [-d * v for v in big[1]],
    ])


def scaled_trace_form(e: EtaleAlgebra, scales: Sequence[Scale]) -> DiagonalForm:
    """The diagonalized form T_a for a = (a_i), a_i in F_i^x (first kind)."""
    if e.case is Case.UNITARY:
        return scaled_hermitian_form(e, scales)
    if len(scales) != e.m:
        raise ValueError("one scale per component")
    g = block_diag([_scaled_component_gram(c, a) for c, a in zip(e.components, scales)])
    return diagonalize_gram(g)


def _scaled_component_hermitian(c: Component, a: Scale) -> GramMatrix:
    """Unitary case: rational Gram of the hermitian T_a on the F_i-basis."""
    if c.kind is Kind.SPLIT_PAIR:
        # a split pair is hyperbolic for every scale; the scale's norm
        # twists the determinant only by a norm from L, which is invisible
        scale_norm(c, a)  # still reject zero scales
        return gram([[0, 1], [1, 0]])
    m = c.F.m
    if m is None:
        v = Fraction(a if not isinstance(a, tuple) else a[0])
        if v == 0:
            raise ZeroScale("zero scale")
        return gram([[v]])
    x, y = _as_pair(a)
    if x == 0 and y == 0:
        raise ZeroScale("zero scale")
    return gram([[2 * x, 2 * y * m], [2 * y * m, 2 * x * m]])


def scaled_hermitian_form(e: EtaleAlgebra, scales: Sequence[Scale]) -> DiagonalForm:
    if len(scales) != e.m:
        raise ValueError("one scale per component")
    g = block_diag([_scaled_component_hermitian(c, a) for c, a in zip(e.components, scales)])
    return diagonalize_gram(g)


# ---------------------------------------------------------------------------
# Splitting sets and archimedean shape


def in_sigma(c: Component, v: Place) -> bool:
    """Membership of v in the splitting set of the component.

    True iff every place of F_i above v splits in E_i; split pairs and the
    trivial component split everywhere.
    """
    if c.kind is not Kind.QUAD:
        return True
    d = c.d
    m = c.F.m
    if m is None:
        return is_local_square(d, v)
    if is_local_square(m, v):
        return is_local_square(d, v)
    return is_local_square(d, v) or is_local_square(Fraction(d) * m, v)


def locally_split(e: EtaleAlgebra, v: Place) -> bool:
    """(E^v, sigma) is split iff every component splits at v."""
    return all(in_sigma(c, v) for c in e.components)


def even_part(e: EtaleAlgebra) -> EtaleAlgebra:
    """The even-rank part E' of an odd orthogonal algebra (trivial component dropped)."""
    comps = tuple(c for c in e.components if c.kind is not Kind.TRIVIAL)
    return EtaleAlgebra(e.case, comps, e.delta)


class RealType(enum.Enum):
    R_FIXED = "R fixed"
    RR_SWAP = "RxR swap"
    C_CONJ = "C conjugation"
    CC_SWAP = "CxC swap"
    C_CONJ_PAIR = "two C conjugations"
    RR_SWAP_PAIR = "two RxR swaps"


@dataclass
class RealShape:
    types: List[RealType]
    split_rank: int  # Q-dimension of the split part of E tensor R

    def rho_first_kind(self) -> int:
        return self.split_rank // 2

    def rho_symplectic(self) -> int:
        return self.split_rank // 4

    def rho_unitary(self) -> int:
        return self.split_rank // 4


def component_real_type(c: Component) -> RealType:
    if c.kind is Kind.TRIVIAL:
        return RealType.R_FIXED
    m = c.F.m
    if c.kind is Kind.SPLIT_PAIR:
        if m is None:
            return RealType.RR_SWAP
        return RealType.CC_SWAP if m < 0 else RealType.RR_SWAP_PAIR
    d = c.d
    if m is None:
        return RealType.RR_SWAP if d > 0 else RealType.C_CONJ
    if m < 0:
        return RealType.CC_SWAP
    return RealType.RR_SWAP_PAIR if d > 0 else RealType.C_CONJ_PAIR


def real_shape(e: EtaleAlgebra) -> RealShape:
    types = [component_real_type(c) for c in e.components]
    split_rank = sum(c.rank for c in e.components if in_sigma(c, REAL))
    if e.case is Case.UNITARY:
        split_rank = sum(2 * c.fixed_degree for c in e.components if in_sigma(c, REAL))
    return RealShape(types, split_rank)


# ---------------------------------------------------------------------------
# Factor splitting against a central simple algebra


def field_factor_kills_index_two(c: Component, v: Place) -> bool:
    """Do all completions of every field factor of E_i have even degree over Q_v?

    This is the condition for the factors of E_i to split a quaternionic
    algebra at v (an even local degree kills a local index of 2).
    """
    m = c.F.m
    if c.kind is Kind.TRIVIAL:
        return False
    if c.kind is Kind.SPLIT_PAIR:
        if m is None:
            return False
        return not is_local_square(m, v)
    if m is None:
        return not is_local_square(c.d, v)
    # biquadratic field Q(sqrt m, sqrt d): completely split iff both local squares
    return not (is_local_square(m, v) and is_local_square(c.d, v))
