"""Place-by-place embeddability of (E, sigma) into (A, tau).

Each verdict records which classification rule fired, so reports can be
checked independently.  The scan covers the finite "bad" set of places
carrying any nontrivial invariant; outside it every rule below evaluates
to true once the global necessary conditions hold, which is what the
generic certificate records.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .arith import REAL, Place, hilbert_bit, is_local_square, square_class, support_places
from .csa import (
    InvolutionAlgebra,
    OrthNonSplit,
    OrthSplit,
    Sympl,
    UnitSplit,
    algebra_support,
    disc_class,
    is_hyperbolic_local,
    is_split_at,
    validate_algebra,
)
from .etale import (
    Case,
    EtaleAlgebra,
    even_part,
    field_factor_kills_index_two,
    in_sigma,
    locally_split,
    real_shape,
    trace_data,
)
from .quadform import hasse_bit, witt_index_local


class CaseMismatch(Exception):
    pass


@dataclass
class LocalVerdict:
    place: Place
    embeddable: bool
    rule: str
    data: Dict[str, object] = field(default_factory=dict)

    def __repr__(self):
        ok = "yes" if self.embeddable else "NO"
        return f"[{self.place}] {ok} ({self.rule})"


def check_case(e: EtaleAlgebra, a: InvolutionAlgebra) -> None:
    if e.case is Case.ORTHOGONAL and not isinstance(a, (OrthSplit, OrthNonSplit)):
        raise CaseMismatch("orthogonal algebra expected")
    if e.case is Case.SYMPLECTIC and not isinstance(a, Sympl):
        raise CaseMismatch("symplectic algebra expected")
    if e.case is Case.UNITARY:
        if not isinstance(a, UnitSplit):
            raise CaseMismatch("split unitary algebra expected")
        if square_class(a.delta).rep != square_class(e.delta).rep:
            raise CaseMismatch(f"center mismatch: {e.delta} vs {a.delta}")
    if e.rank != a.degree:
        raise CaseMismatch(f"rank {e.rank} vs degree {a.degree}")


def factor_obstruction(e: EtaleAlgebra, a: InvolutionAlgebra, v: Place) -> Optional[int]:
    """Index of a component whose field factors fail to split A at v, if any."""
    if is_split_at(a, v):
        return None
    for i, c in enumerate(e.components):
        if not field_factor_kills_index_two(c, v):
            return i
    return None


def local_embeddable(e: EtaleAlgebra, a: InvolutionAlgebra, v: Place) -> LocalVerdict:
    """Decision table for a single place, by case and splitting type."""
    check_case(e, a)
    bad = factor_obstruction(e, a, v)
    if bad is not None:
        return LocalVerdict(v, False, "factor-splitting", {"component": bad})

    if e.case is Case.SYMPLECTIC:
        return _symplectic_local(e, a, v)
    if e.case is Case.UNITARY:
        return _unitary_local(e, a, v)
    if e.rank % 2 == 0:
        return _orthogonal_even_local(e, a, v)
    return _orthogonal_odd_local(e, a, v)


def _orthogonal_even_local(e: EtaleAlgebra, a: InvolutionAlgebra, v: Place) -> LocalVerdict:
    if v.is_real:
        if not is_split_at(a, v):
            return LocalVerdict(v, True, "orth-even/real/nonsplit-A")
        rho = real_shape(e).rho_first_kind()
        sig = a.q.signature() if isinstance(a, OrthSplit) else a.signature
        ok = _shape_even(sig, rho)
        return LocalVerdict(v, ok, "orth-even/real/signature", {"sig": sig, "rho": rho})
    if locally_split(e, v):
        ok = is_hyperbolic_local(a, v)
        return LocalVerdict(v, ok, "orth-even/split-E/hyperbolicity")
    de = trace_data(e).disc_e.rep
    da = disc_class(a).rep
    ok = is_local_square(Fraction(de) * da, v)
    return LocalVerdict(v, ok, "orth-even/nonsplit-E/disc", {"disc_E": de, "disc_A": da})


def _shape_even(sig: Tuple[int, int], rho: int) -> bool:
    p, n = sig
    return p >= rho and n >= rho and (p - rho) % 2 == 0 and (n - rho) % 2 == 0


def _orthogonal_odd_local(e: EtaleAlgebra, a: InvolutionAlgebra, v: Place) -> LocalVerdict:
    if not isinstance(a, OrthSplit):
        raise CaseMismatch("odd orthogonal degree forces a split algebra")
    n = e.rank
    if n == 1:
        return LocalVerdict(v, True, "orth-odd/rank-1")
    if v.is_real:
        rho = real_shape(e).rho_first_kind()
        p, m = a.q.signature()
        ok = p >= rho and m >= rho
        return LocalVerdict(v, ok, "orth-odd/real/signature", {"sig": (p, m), "rho": rho})
    eprime = even_part(e)
    if locally_split(eprime, v):
        ok = witt_index_local(a.q, v) >= (n - 1) // 2
        return LocalVerdict(v, ok, "orth-odd/split-E'/witt",
                            {"witt": witt_index_local(a.q, v), "needed": (n - 1) // 2})
    return LocalVerdict(v, True, "orth-odd/nonsplit-E'")


def _symplectic_local(e: EtaleAlgebra, a: Sympl, v: Place) -> LocalVerdict:
    if v.is_finite or is_split_at(a, v):
        return LocalVerdict(v, True, "symplectic/local-or-split")
    rho = real_shape(e).rho_symplectic()
    p, n = a.signature
    ok = p >= rho and n >= rho
    return LocalVerdict(v, ok, "symplectic/real/signature", {"sig": (p, n), "rho": rho})


def _unitary_local(e: EtaleAlgebra, a: UnitSplit, v: Place) -> LocalVerdict:
    delta = e.delta
    if v.is_real:
        if delta > 0:
            return LocalVerdict(v, True, "unitary/real/split-center")
        rho = real_shape(e).rho_unitary()
        sig = a.signature()
        ok = sig[0] >= rho and sig[1] >= rho
        return LocalVerdict(v, ok, "unitary/real/signature", {"sig": sig, "rho": rho})
    if is_local_square(delta, v):
        return LocalVerdict(v, True, "unitary/split-center")
    if locally_split(e, v):
        ok = is_hyperbolic_local(a, v)
        return LocalVerdict(v, ok, "unitary/split-E/hyperbolicity")
    # some component admits both corestriction values at v, so the norm
    # condition det(A,tau) disc(E,sigma)^{-1} in N(F^v) N(L^v) is attainable
    dt = trace_data(e).det_t
    bit = hilbert_bit(a.det() / dt, delta, v)
    free = any(not in_sigma(c, v) for c in e.components)
    ok = bit == 0 or free
    return LocalVerdict(v, ok, "unitary/nonsplit-E/norm", {"bit": bit, "free": free})


# ---------------------------------------------------------------------------
# The scan over the bad set


def bad_set(e: EtaleAlgebra, a: InvolutionAlgebra) -> List[Place]:
    """Places where any invariant of either side can be nontrivial."""
    vals = []
    for c in e.components:
        if c.F.m is not None:
            vals.append(Fraction(c.F.m))
        vals.append(Fraction(c.d))
    if e.case is Case.UNITARY:
        vals.append(Fraction(e.delta))
    places = set(support_places(*vals))
    places.update(algebra_support(a))
    return sorted(places)


@dataclass
class LocalScan:
    verdicts: Dict[Place, LocalVerdict]
    bad_places: List[Place]

    @property
    def all_true(self) -> bool:
        return all(v.embeddable for v in self.verdicts.values())

    def failures(self) -> List[Place]:
        return [p for p, v in sorted(self.verdicts.items()) if not v.embeddable]


def local_scan(e: EtaleAlgebra, a: InvolutionAlgebra) -> LocalScan:
    validate_algebra(a)
    places = bad_set(e, a)
    verdicts = {v: local_embeddable(e, a, v) for v in places}
    return LocalScan(verdicts, places)
