"""Exact integer/rational primitives and local symbols over the completions of Q.

Everything here is exact: integers, ``fractions.Fraction``, and bits in
{0, 1}.  A "bit" is the additive form of a quadratic Hilbert symbol
(0 = +1 = split, 1 = -1 = nonsplit); sums of bits are taken mod 2.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

Rational = Union[int, Fraction]

DEFAULT_FACTOR_GUARD = 1 << 96


class GuardExceeded(Exception):
    """Raised when a factorization target exceeds the configured size guard."""


# ---------------------------------------------------------------------------
# Places of Q


@dataclass(frozen=True, order=True)
class Place:
    """A place of Q: a finite prime p >= 2, or the unique real place.

    The real place is encoded as p = 0 so that places sort with Real first.
    """

    p: int

    def __post_init__(self):
        if self.p != 0 and not is_prime(self.p):
            raise ValueError(f"not a prime: {self.p}")

    @staticmethod
    def real() -> "Place":
        return REAL

    @staticmethod
    def finite(p: int) -> "Place":
        return Place(p)

    @property
    def is_real(self) -> bool:
        return self.p == 0

    @property
    def is_finite(self) -> bool:
        return self.p != 0

    def __repr__(self):
        return "real" if self.p == 0 else str(self.p)


REAL = Place(0)


# ---------------------------------------------------------------------------
# Primality and factorization

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid far beyond 64 bits with these bases."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _SMALL_PRIMES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int, rng: random.Random) -> int:
    # n odd composite, not a prime power guard: classic Brent variant
    while True:
        y = rng.randrange(1, n)
        c = rng.randrange(1, n)
        m, g, r, q = 128, 1, 1, 1
        x = y
        ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = gcd(abs(x - ys), n)
        if g != n:
            return g


def gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


@lru_cache(maxsize=None)
def _factor_positive(n: int, guard: int) -> tuple:
    if n > guard:
        raise GuardExceeded(f"|n| = {n} exceeds factorization guard {guard}")
    if n == 1:
        return ()
    factors = []
    for p in _SMALL_PRIMES:
        while n % p == 0:
            factors.append(p)
            n //= p
    # trial division up to 2^20 covers everything desk scale quickly
    d = 41
    while d * d <= n and d < (1 << 20):
        while n % d == 0:
            factors.append(d)
            n //= d
        d += 2
    stack = [n] if n > 1 else []
    rng = random.Random(0xC0FFEE)  # deterministic for reproducible reports
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            factors.append(m)
            continue
        g = _pollard_rho(m, rng)
        stack.append(g)
        stack.append(m // g)
    return tuple(sorted(factors))


def factor(n: int, guard: int = DEFAULT_FACTOR_GUARD) -> list:
    """Prime factors of n with multiplicity (sign dropped). n must be nonzero."""
    if n == 0:
        raise ValueError("cannot factor 0")
    return list(_factor_positive(abs(n), guard))


# ---------------------------------------------------------------------------
# Square classes


@dataclass(frozen=True)
class SquareClass:
    """A class in Q^x / (Q^x)^2, represented by its unique squarefree integer."""

    rep: int

    def __post_init__(self):
        if self.rep == 0:
            raise ValueError("square class of 0 is undefined")

    def __mul__(self, other: "SquareClass") -> "SquareClass":
        return square_class(self.rep * other.rep)

    @property
    def is_trivial(self) -> bool:
        return self.rep == 1

    def __repr__(self):
        return f"sq({self.rep})"


def square_class(q: Rational, guard: int = DEFAULT_FACTOR_GUARD) -> SquareClass:
    """Squarefree representative of a nonzero rational modulo squares."""
    q = Fraction(q)
    if q == 0:
        raise ValueError("square class of 0 is undefined")
    n = q.numerator * q.denominator  # same class as q
    sign = -1 if n < 0 else 1
    rep = sign
    seen = {}
    for p in factor(n, guard):
        seen[p] = seen.get(p, 0) + 1
    for p, e in seen.items():
        if e % 2:
            rep *= p
    return SquareClass(rep)


def valuation(q: Rational, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    q = Fraction(q)
    if q == 0:
        raise ValueError("valuation of 0")
    v = 0
    n = q.numerator
    while n % p == 0:
        n //= p
        v += 1
    d = q.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


def unit_part_mod(q: Rational, p: int, modulus: int) -> int:
    """The p-adic unit part of q reduced mod `modulus` (a power of p)."""
    q = Fraction(q)
    v = valuation(q, p)
    n, d = q.numerator, q.denominator
    if v > 0:
        n //= p ** v
    elif v < 0:
        d //= p ** (-v)
    return n * pow(d, -1, modulus) % modulus


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p) for odd prime p, a coprime to p; returns +-1."""
    r = pow(a % p, (p - 1) // 2, p)
    return 1 if r == 1 else -1


def kronecker(a: int, p: int) -> int:
    """Kronecker symbol (a/p) at an odd prime p not dividing a."""
    return legendre(a % p, p)


def is_local_square(a: Rational, v: Place) -> bool:
    """Is a nonzero rational a square in the completion Q_v?

    Real: positivity.  Odd p: even valuation and unit part a residue mod p.
    p = 2: even valuation and unit part congruent to 1 mod 8.
    """
    a = Fraction(a)
    if a == 0:
        raise ValueError("zero has no square class")
    if v.is_real:
        return a > 0
    p = v.p
    if valuation(a, p) % 2:
        return False
    if p == 2:
        return unit_part_mod(a, 2, 8) == 1
    return legendre(unit_part_mod(a, p, p), p) == 1


def hilbert_bit(a: Rational, b: Rational, v: Place) -> int:
    """Additive quadratic Hilbert symbol of (a, b) over Q_v.

    0 iff z^2 = a x^2 + b y^2 has a nonzero solution over Q_v.  Computed by
    the tame valuation/residue formula at odd p, the classical unit-class
    formula at p = 2, and sign inspection at the real place.
    """
    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol needs nonzero entries")
    if v.is_real:
        return 1 if (a < 0 and b < 0) else 0
    p = v.p
    alpha, beta = valuation(a, p), valuation(b, p)
    if p == 2:
        u = unit_part_mod(a, 2, 8)
        w = unit_part_mod(b, 2, 8)
        eps_u = (u - 1) // 2 % 2
        eps_w = (w - 1) // 2 % 2
        om_u = (u * u - 1) // 8 % 2
        om_w = (w * w - 1) // 8 % 2
        return (eps_u * eps_w + alpha * om_w + beta * om_u) % 2
    u = unit_part_mod(a, p, p)
    w = unit_part_mod(b, p, p)
    eps_p = (p - 1) // 2 % 2
    bit = alpha * beta * eps_p
    if beta % 2 and legendre(u, p) == -1:
        bit += 1
    if alpha % 2 and legendre(w, p) == -1:
        bit += 1
    return bit % 2


def bad_primes(*values: Rational) -> list:
    """Primes dividing 2 or the squarefree part of any of the given rationals."""
    ps = {2}
    for q in values:
        q = Fraction(q)
        if q == 0:
            continue
        ps.update(factor(abs(square_class(q).rep)))
    ps.discard(1)
    return sorted(ps)


def support_places(*values: Rational) -> list:
    """The real place plus `bad_primes` of the given values, sorted."""
    return [REAL] + [Place(p) for p in bad_primes(*values)]


def primes_iter(start: int = 2) -> Iterable[int]:
    """Unbounded prime generator by trial division (desk scale)."""
    n = max(2, start)
    while True:
        if is_prime(n):
            yield n
        n += 1
