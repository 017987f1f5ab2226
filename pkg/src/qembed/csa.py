"""Central simple algebras with involution over Q, presented by invariants.

Four variants are supported:

* ``OrthSplit``    -- A = M_n(Q), tau adjoint to a diagonal quadratic form q.
* ``OrthNonSplit`` -- A = M_r(H) for the quaternion algebra H ramified at an
                      even set of places, tau orthogonal, presented by its
                      complete local invariant system (global discriminant,
                      Hasse bits of the local adjoint forms where A splits
                      and the discriminant is locally trivial, and the real
                      signature when H splits at the real place).
* ``Sympl``        -- symplectic tau on split A or on M_{n/2}(H); the only
                      local datum is the real signature at ramified real
                      places.
* ``UnitSplit``    -- A = M_n(L) for L = Q(sqrt delta), tau adjoint to a
                      diagonal hermitian form with rational entries.

Where A is split at v, the local involution determines the adjoint form
only up to scaling; a Hasse bit of that form is well defined exactly where
the local discriminant is trivial, and the model stores bits only there.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

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
from .quadform import (
    DiagonalForm,
    diag,
    hasse_bit,
    local_profile,
    witt_index_local,
)


class AlgebraError(Exception):
    pass


class ReciprocityViolation(AlgebraError):
    pass


class OddRamification(AlgebraError):
    pass


class DegreeMismatch(AlgebraError):
    pass


@dataclass(frozen=True)
class OrthSplit:
    q: DiagonalForm

    @property
    def degree(self) -> int:
        return self.q.dim

    def __repr__(self):
        return f"OrthSplit(q={self.q})"


@dataclass(frozen=True)
class OrthNonSplit:
    ram: Tuple[Place, ...]          # ramification of H, even size, nonempty
    r: int                          # deg A = 2r
    disc: int                       # disc(A, tau), squarefree representative
    hasse: Tuple[Tuple[Place, int], ...] = ()   # stored split-place Hasse bits
    signature: Optional[Tuple[int, int]] = None  # when H splits at Real

    @property
    def degree(self) -> int:
        return 2 * self.r

    def ram_set(self) -> frozenset:
        return frozenset(self.ram)

    def hasse_map(self) -> Dict[Place, int]:
        return dict(self.hasse)

    def det_class(self) -> SquareClass:
        """Determinant class of the local adjoint forms: (-1)^r disc."""
        return square_class((-1) ** self.r * self.disc)

    def __repr__(self):
        return (f"OrthNonSplit(ram={list(self.ram)}, r={self.r}, disc={self.disc}, "
                f"hasse={dict(self.hasse)}, signature={self.signature})")


@dataclass(frozen=True)
class Sympl:
    n: int                           # degree, even
    ram: Tuple[Place, ...] = ()      # empty means split
    signature: Optional[Tuple[int, int]] = None  # required iff Real in ram

    @property
    def degree(self) -> int:
        return self.n

    def ram_set(self) -> frozenset:
        return frozenset(self.ram)

    def __repr__(self):
        return f"Sympl(n={self.n}, ram={list(self.ram)}, signature={self.signature})"


@dataclass(frozen=True)
class UnitSplit:
    delta: int
    h: Tuple[Fraction, ...]

    @property
    def degree(self) -> int:
        return len(self.h)

    def det(self) -> Fraction:
        d = Fraction(1)
        for c in self.h:
            d *= c
        return d

    def det_class(self) -> SquareClass:
        cls = SquareClass(1)
        for c in self.h:
            cls = cls * square_class(c)
        return cls

    def signature(self) -> Tuple[int, int]:
        pos = sum(1 for c in self.h if c > 0)
        return pos, len(self.h) - pos

    def __repr__(self):
        return f"UnitSplit(delta={self.delta}, h={list(self.h)})"


InvolutionAlgebra = Union[OrthSplit, OrthNonSplit, Sympl, UnitSplit]


def reference_form(r: int, disc: int) -> DiagonalForm:
    """The quasi-hyperbolic baseline of dimension 2r and discriminant disc.

    (r-1) hyperbolic planes plus <1, -disc>; its determinant class is
    (-1)^r disc and it is hyperbolic wherever disc is a local square.
    Unstored Hasse bits of a nonsplit orthogonal involution's split-place
    adjoint forms default to this form's bits.
    """
    return diag(*([1, -1] * (r - 1) + [1, -disc]))


def _signature_hasse_bit(sig: Tuple[int, int]) -> int:
    neg = sig[1]
    return (neg * (neg - 1) // 2) % 2


def validate_algebra(a: InvolutionAlgebra) -> InvolutionAlgebra:
    """Check internal consistency of a presented involution algebra."""
    if isinstance(a, OrthSplit):
        return a

    if isinstance(a, OrthNonSplit):
        ram = a.ram_set()
        if len(ram) != len(a.ram):
            raise AlgebraError("duplicate ramification places")
        if len(ram) == 0 or len(ram) % 2:
            raise OddRamification(f"quaternion ramification must be even and nonempty: {sorted(ram)}")
        if a.r < 1:
            raise DegreeMismatch("rank r must be >= 1")
        if square_class(a.disc).rep != a.disc:
            raise AlgebraError(f"disc must be a squarefree representative: {a.disc}")
        if a.r == 1:
            # deg 2: the discriminant field must embed in H
            for v in sorted(ram):
                if is_local_square(a.disc, v):
                    raise AlgebraError(
                        f"r = 1 requires disc = {a.disc} to be a local nonsquare at ramified {v}")
        if REAL in ram:
            if a.signature is not None:
                raise AlgebraError("no split real signature when H ramifies at the real place")
        else:
            if a.signature is None:
                raise AlgebraError("signature required when H splits at the real place")
            p, n = a.signature
            if p < 0 or n < 0 or p + n != 2 * a.r:
                raise DegreeMismatch(f"signature {a.signature} does not fit degree {2 * a.r}")
            det_sign = 1 if (-1) ** a.r * a.disc > 0 else -1
            if (-1) ** n != det_sign:
                raise AlgebraError("signature sign does not match the discriminant")
        det = a.det_class()
        total = 0
        for v, bit in a.hasse:
            if bit not in (0, 1):
                raise AlgebraError("Hasse bits are 0 or 1")
            if not v.is_finite:
                raise AlgebraError("store finite-place bits only; the real bit is derived")
            if v in ram:
                raise AlgebraError(f"no adjoint form at ramified place {v}")
            if not is_local_square(a.disc, v):
                raise AlgebraError(
                    f"Hasse bit at {v} is not scaling-invariant (disc nontrivial there)")
            ref_bit = hasse_bit(reference_form(a.r, a.disc), v)
            total = (total + bit + ref_bit) % 2
        if REAL not in ram and a.disc > 0:
            ref_bit = hasse_bit(reference_form(a.r, a.disc), REAL)
            total = (total + _signature_hasse_bit(a.signature) + ref_bit) % 2
        if total:
            raise ReciprocityViolation("total Hasse-bit parity over all places is odd")
        if len(set(v for v, _ in a.hasse)) != len(a.hasse):
            raise AlgebraError("duplicate Hasse-bit places")
        return a

    if isinstance(a, Sympl):
        if a.n <= 0 or a.n % 2:
            raise DegreeMismatch("symplectic degree must be positive and even")
        ram = a.ram_set()
        if len(ram) != len(a.ram):
            raise AlgebraError("duplicate ramification places")
        if len(ram) % 2:
            raise OddRamification("quaternion ramification must be even")
        if REAL in ram:
            if a.signature is None:
                raise AlgebraError("signature required at a ramified real place")
            p, n = a.signature
            if p < 0 or n < 0 or p + n != a.n // 2:
                raise DegreeMismatch(f"signature {a.signature} must total n/2 = {a.n // 2}")
        elif a.signature is not None:
            raise AlgebraError("signature only at a ramified real place")
        return a

    if isinstance(a, UnitSplit):
        dc = square_class(a.delta)
        if dc.is_trivial or dc.rep != a.delta:
            raise AlgebraError("delta must be squarefree and not a square")
        if not a.h:
            raise DegreeMismatch("empty hermitian form")
        for c in a.h:
            if Fraction(c) == 0:
                raise AlgebraError("hermitian entries must be nonzero")
        return a

    raise AlgebraError(f"unknown algebra variant: {a!r}")


def orth_split(*coeffs: Rational) -> OrthSplit:
    return OrthSplit(diag(*coeffs))


def orth_nonsplit(ram: Sequence[Union[int, Place]], r: int, disc: int,
                  hasse: Optional[Dict[Union[int, Place], int]] = None,
                  signature: Optional[Tuple[int, int]] = None) -> OrthNonSplit:
    places = tuple(_as_place(v) for v in ram)
    hs = tuple(sorted(((_as_place(v), b) for v, b in (hasse or {}).items())))
    return OrthNonSplit(places, r, disc, hs, signature)


def _as_place(v: Union[int, str, Place]) -> Place:
    if isinstance(v, Place):
        return v
    if isinstance(v, str):
        if v.lower() in ("real", "oo", "inf"):
            return REAL
        return Place(int(v))
    return Place(v)


# ---------------------------------------------------------------------------
# Local queries


def is_split_at(a: InvolutionAlgebra, v: Place) -> bool:
    """Is the underlying algebra A a matrix algebra over Q_v (resp. L_v)?"""
    if isinstance(a, (OrthSplit, UnitSplit)):
        return True
    return v not in a.ram_set()


def local_index_two(a: InvolutionAlgebra, v: Place) -> bool:
    return not is_split_at(a, v)


def disc_class(a: InvolutionAlgebra) -> SquareClass:
    """Global discriminant class of an orthogonal involution.

    For split A of even degree n = 2r this is (-1)^r det(q); the nonsplit
    presentation stores it directly.
    """
    if isinstance(a, OrthSplit):
        n = a.q.dim
        if n % 2:
            raise AlgebraError("discriminant convention applies to even degree")
        return square_class((-1) ** (n // 2)) * a.q.det_class()
    if isinstance(a, OrthNonSplit):
        return SquareClass(a.disc)
    raise AlgebraError("discriminant of a non-orthogonal involution")


def split_hasse_bit(a: OrthNonSplit, v: Place) -> int:
    """Hasse bit of the local adjoint form at a split place of A.

    Only meaningful where the discriminant is locally trivial; stored bits
    take precedence, the real bit is derived from the signature, everything
    else defaults to the reference form's bit.
    """
    if v in a.ram_set():
        raise AlgebraError(f"A is not split at {v}")
    if v.is_real:
        return _signature_hasse_bit(a.signature)
    stored = a.hasse_map()
    if v in stored:
        return stored[v]
    return hasse_bit(reference_form(a.r, a.disc), v)


@dataclass
class LocalClass:
    place: Place
    split: bool
    data: Dict[str, object]


def local_class(a: InvolutionAlgebra, v: Place) -> LocalClass:
    """The invariant bundle of (A, tau) at a place."""
    if isinstance(a, OrthSplit):
        q = a.q
        data = {
            "dim": q.dim,
            "det": q.det_class().rep,
            "hasse": hasse_bit(q, v),
            "witt": witt_index_local(q, v),
            "hyperbolic": is_hyperbolic_local(a, v),
        }
        if v.is_real:
            data["signature"] = q.signature()
        return LocalClass(v, True, data)
    if isinstance(a, OrthNonSplit):
        split = is_split_at(a, v)
        data = {"disc": a.disc, "disc_trivial_here": is_local_square(a.disc, v)}
        if split:
            if v.is_real:
                data["signature"] = a.signature
            if is_local_square(a.disc, v):
                data["hasse"] = split_hasse_bit(a, v)
            data["hyperbolic"] = is_hyperbolic_local(a, v)
        return LocalClass(v, split, data)
    if isinstance(a, Sympl):
        split = is_split_at(a, v)
        data = {}
        if v.is_real and not split:
            data["signature"] = a.signature
        return LocalClass(v, split, data)
    if isinstance(a, UnitSplit):
        data = {
            "det": a.det_class().rep,
            "det_norm_bit": hilbert_bit(a.det(), a.delta, v),
            "center_split": is_local_square(a.delta, v),
            "hyperbolic": is_hyperbolic_local(a, v),
        }
        if v.is_real and a.delta < 0:
            data["signature"] = a.signature()
        return LocalClass(v, True, data)
    raise AlgebraError(f"unknown algebra variant: {a!r}")


def is_hyperbolic_local(a: InvolutionAlgebra, v: Place) -> bool:
    """Is the involution hyperbolic over the completion at v?"""
    if isinstance(a, OrthSplit):
        q = a.q
        return q.dim % 2 == 0 and witt_index_local(q, v) == q.dim // 2
    if isinstance(a, OrthNonSplit):
        if is_split_at(a, v):
            if not is_local_square(a.disc, v):
                return False
            if v.is_real:
                p, n = a.signature
                return p == n
            ref_hyp = _hyperbolic_bit(a.r, v)
            return split_hasse_bit(a, v) == ref_hyp
        # nonsplit local algebra: even rank over H and trivial local disc
        return a.r % 2 == 0 and is_local_square(a.disc, v)
    if isinstance(a, Sympl):
        if is_split_at(a, v):
            return True
        if v.is_real:
            p, n = a.signature
            return p == n
        # hermitian forms over a local quaternion algebra: hyperbolic iff
        # even rank; the rank is n/2
        return (a.n // 2) % 2 == 0
    if isinstance(a, UnitSplit):
        n = a.degree
        if n % 2:
            return False
        if v.is_real and a.delta < 0:
            p, q = a.signature()
            return p == q
        target = Fraction((-1) ** (n // 2))
        return hilbert_bit(a.det() * target, a.delta, v) == 0
    raise AlgebraError(f"unknown algebra variant: {a!r}")


def _hyperbolic_bit(r: int, v: Place) -> int:
    """Hasse bit of the 2r-dimensional hyperbolic form at v."""
    return (r * (r - 1) // 2 % 2) * hilbert_bit(-1, -1, v) % 2


def algebra_support(a: InvolutionAlgebra) -> List[Place]:
    """Places carrying potentially nontrivial invariants of (A, tau)."""
    if isinstance(a, OrthSplit):
        return support_places(*a.q.coeffs)
    if isinstance(a, OrthNonSplit):
        vs = set(support_places(a.disc))
        vs.update(a.ram_set())
        vs.update(v for v, _ in a.hasse)
        return sorted(vs)
    if isinstance(a, Sympl):
        return sorted(set(a.ram_set()) | {REAL, Place(2)})
    if isinstance(a, UnitSplit):
        return support_places(a.delta, *a.h)
    raise AlgebraError(f"unknown algebra variant: {a!r}")
