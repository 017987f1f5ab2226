"""Named instance families.

``sec93`` builds, from four distinct primes, a biquadratic algebra with
involution inside a tensor product of two quaternion algebras: everywhere
locally embeddable, but sitting in the orientation-indeterminate branch
(the nonsplit algebra has trivial discriminant at every ramified place).

``three_subfield_sha`` builds the rank-12 family whose three components
share one biquadratic field through its three quadratic subfields; its
partition group has order 4, and the companion target form twists the
trace form at two character-chosen primes so the obstruction map is
nonzero on a named partition.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from .arith import Place, is_local_square, kronecker, legendre, primes_iter, square_class
from .csa import OrthNonSplit, OrthSplit, orth_nonsplit
from .etale import BaseField, Case, EtaleAlgebra, quad, validate
from .quadform import DiagonalForm, diag
from .shagroup import compute_sha


class SearchExhausted(Exception):
    pass


def _squarefree_iter(start: int = 2, bound: int = 10 ** 6):
    n = start
    while n <= bound:
        if square_class(n).rep == n:
            yield n
        n += 1
    raise SearchExhausted(f"no candidate below {bound}")


def sec93_parameters(places: Tuple[int, int, int, int], bound: int = 10 ** 6) -> Tuple[int, int]:
    """Smallest primes a, b with a a nonsquare and b a square at all four places."""
    vs = [Place(p) for p in places]
    if len(set(places)) != 4:
        raise ValueError("four distinct primes required")
    a = next(p for p in primes_iter(2)
             if p < bound and all(not is_local_square(p, v) for v in vs))
    b = next(p for p in primes_iter(2)
             if p < bound and all(is_local_square(p, v) for v in vs))
    return a, b


@dataclass
class Sec93Instance:
    a: int
    b: int
    places: Tuple[int, int, int, int]
    etale: EtaleAlgebra
    algebra: OrthNonSplit


def sec93(places: Tuple[int, int, int, int] = (3, 5, 7, 11)) -> Sec93Instance:
    a, b = sec93_parameters(tuple(places))
    m = square_class(a * b).rep
    e = validate(Case.ORTHOGONAL, [quad(BaseField(m), a)])
    # (H1, canonical) tensor (H2, canonical): ramification is the symmetric
    # difference {v1,v2} xor {v3,v4} = all four; the local adjoint forms are
    # hyperbolic-type everywhere H splits, so no stored bits are needed
    alg = orth_nonsplit(list(places), r=2, disc=1, hasse={}, signature=(2, 2))
    return Sec93Instance(a, b, tuple(places), e, alg)


# ---------------------------------------------------------------------------
# The three-subfield family


def three_subfield_parameters(bound: int = 10 ** 4) -> Tuple[int, int]:
    """Smallest pair a < b, both 1 mod 8 and squarefree, each a square
    modulo every prime of the other; these make all three nontrivial
    partitions of the family pass the covering condition."""
    candidates = [n for n in range(17, bound, 8) if square_class(n).rep == n]
    for i, a in enumerate(candidates):
        for b in candidates[i + 1:]:
            pa = [p for p in _prime_factors(a)]
            pb = [p for p in _prime_factors(b)]
            if any(b % p == 0 for p in pa):
                continue
            if all(legendre(b, p) == 1 for p in pa) and all(legendre(a, q) == 1 for q in pb):
                return a, b
    raise SearchExhausted(f"no admissible pair below {bound}")


def _prime_factors(n: int) -> List[int]:
    from .arith import factor
    return sorted(set(factor(n)))


def three_subfield_etale(a: int, b: int) -> EtaleAlgebra:
    ab = square_class(a * b).rep
    return validate(Case.ORTHOGONAL, [
        quad(BaseField(a), b),
        quad(BaseField(b), a),
        quad(BaseField(ab), a),
    ])


def _pattern_prime(a: int, b: int, chi_a: int, chi_b: int,
                   conds: Optional[List[Tuple[int, int]]] = None,
                   avoid: Tuple[int, ...] = ()) -> int:
    """A prime with prescribed Kronecker values at a and b, plus extra
    (modulus, legendre-value) conditions."""
    for p in primes_iter(3):
        if a % p == 0 or b % p == 0 or p in avoid:
            continue
        if kronecker(a, p) != chi_a or kronecker(b, p) != chi_b:
            continue
        if conds and any(legendre(p, q) != want for q, want in conds):
            continue
        return p
    raise SearchExhausted("pattern prime scan failed")


@dataclass
class ThreeSubfieldInstance:
    a: int
    b: int
    etale: EtaleAlgebra
    algebra: OrthSplit
    twist_places: Tuple[int, int]


def three_subfield_bm(a: Optional[int] = None, b: Optional[int] = None) -> ThreeSubfieldInstance:
    """The shipped obstructed instance: the trace form twisted at two
    character-chosen primes, flipping the target bit once inside each of
    two different components."""
    if a is None or b is None:
        a, b = three_subfield_parameters()
    e = three_subfield_etale(a, b)
    sha = compute_sha(e)
    if sha.order != 4:
        raise SearchExhausted(f"pair ({a}, {b}) has group order {sha.order}, need 4")

    # u sees a as a square and b as a nonsquare: only the first component
    # has a free bit there; u' is the mirror image for the second component
    u = _pattern_prime(a, b, +1, -1)
    u_alt = _pattern_prime(a, b, -1, +1, avoid=(u,))
    # the auxiliary prime x carries the compensating bit of both symbol
    # families; its extra conditions cancel every flip at the primes of a, b
    conds = [(q, legendre(u, q)) for q in _prime_factors(b)]
    conds += [(p, legendre(u_alt, p)) for p in _prime_factors(a)]
    x = _pattern_prime(a, b, -1, -1, conds=conds, avoid=(u, u_alt))

    s1 = Fraction(u * x)
    s2 = Fraction(u_alt * x)
    ab = a * b
    coeffs = [
        4 * s1, Fraction(4 * a), -4 * b * s1, Fraction(-4 * ab),
        4 * s2, Fraction(4 * b), -4 * a * s2, Fraction(-4 * ab),
        Fraction(4), Fraction(4 * ab), Fraction(-4 * a), Fraction(-4 * a * ab),
    ]
    q = DiagonalForm(tuple(coeffs))
    return ThreeSubfieldInstance(a, b, e, OrthSplit(q), (u, u_alt))


def hyperbolic_plane_instance():
    """The smallest globally embeddable instance."""
    from .etale import split_pair
    e = validate(Case.ORTHOGONAL, [split_pair()])
    return e, OrthSplit(diag(1, -1))
