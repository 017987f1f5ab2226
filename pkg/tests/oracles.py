"""Independent brute-force oracles for the local arithmetic.

These never call the closed formulas under test: squareness is decided by
scanning z mod p^k, Hilbert symbols by a refinement search for primitive
solutions of z^2 = a x^2 + b y^2 over (Z/p^k)^2 cells, and isotropy by the
same refinement on coordinate vectors with an explicit Hensel acceptance
bound.
"""

from fractions import Fraction


def vp(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _as_int_pair(a) -> int:
    """Clear denominators by squares: the equation z^2 = a x^2 + b y^2 only
    sees square classes, witnessed by scaling the variables."""
    a = Fraction(a)
    return a.numerator * a.denominator


def square_oracle_zp(c: int, p: int) -> bool:
    """Is the nonzero integer c a square in Z_p?  Decided by scanning z up
    to the Hensel-stable modulus p^(v+3)."""
    assert c != 0
    e = vp(c, p)
    if e % 2:
        return False
    k = e + 3
    mod = p ** k
    cc = c % mod
    return any((z * z) % mod == cc for z in range(mod))


def square_oracle(c, v) -> bool:
    """Squareness of a nonzero rational in Q_v, by scan (finite v) or sign."""
    c = Fraction(c)
    if getattr(v, "is_real", False) or v == "real":
        return c > 0
    p = v.p if hasattr(v, "p") else int(v)
    return square_oracle_zp(c.numerator * c.denominator, p)


def hilbert_solvable(a, b, v) -> bool:
    """Does z^2 = a x^2 + b y^2 have a nonzero solution over Q_v?"""
    a, b = Fraction(a), Fraction(b)
    if getattr(v, "is_real", False) or v == "real":
        return a > 0 or b > 0
    p = v.p if hasattr(v, "p") else int(v)
    ai, bi = _as_int_pair(a), _as_int_pair(b)
    # z = 0 branch: a x^2 + b y^2 = 0 nontrivially iff -ab is a square
    if square_oracle_zp(-ai * bi, p):
        return True
    kmax = 2 * vp(4 * ai * bi, p) + 7
    thresh = 3 if p == 2 else 1  # digits past v(c) pinning the unit class

    def search(x0: int, y0: int, j: int) -> bool:
        c = ai * x0 * x0 + bi * y0 * y0
        if c == 0:
            return x0 != 0 or y0 != 0
        e = vp(c, p)
        if e + thresh <= j:
            # unit class of c is stable on the whole cell
            if e % 2:
                return False
            u = c // p ** e
            mod = 8 if p == 2 else p
            if p == 2:
                return u % 8 == 1
            return pow(u % p, (p - 1) // 2, p) == 1
        if j >= kmax:
            return False
        q = p ** j
        return any(
            search(x0 + s * q, y0 + t * q, j + 1)
            for s in range(p) for t in range(p)
        )

    for x0 in range(p):
        for y0 in range(p):
            if x0 == 0 and y0 == 0:
                continue  # z would be divisible by p too: not primitive
            if search(x0, y0, 1):
                return True
    return False


def hilbert_oracle_bit(a, b, v) -> int:
    return 0 if hilbert_solvable(a, b, v) else 1


def isotropic_oracle(coeffs, v) -> bool:
    """Does the diagonal form vanish on a nonzero vector over Q_v?

    Finite places: refinement over primitive coordinate cells; a cell is
    accepted when v_p(q(x)) >= 2t + 1 for the minimal gradient valuation t
    realized by a unit coordinate, which Hensel-lifts to an exact zero.
    """
    cs = [Fraction(c) for c in coeffs]
    if getattr(v, "is_real", False) or v == "real":
        return any(c > 0 for c in cs) and any(c < 0 for c in cs)
    p = v.p if hasattr(v, "p") else int(v)
    ints = [_as_int_pair(c) for c in cs]
    n = len(ints)
    kmax = 2 * (max(vp(2 * c, p) for c in ints) + 1) + 3

    def search(x, j) -> bool:
        c = sum(ci * xi * xi for ci, xi in zip(ints, x))
        if c == 0:
            return True
        e = vp(c, p)
        t = min(vp(2 * ci * xi, p) for ci, xi in zip(ints, x) if xi != 0)
        if e >= 2 * t + 1:
            return True
        if e + 1 <= j:
            return False  # value class stable and nonzero, no root here
        if j >= kmax:
            return False
        q = p ** j
        from itertools import product
        return any(
            search([xi + si * q for xi, si in zip(x, steps)], j + 1)
            for steps in product(range(p), repeat=n)
        )

    from itertools import product
    for x in product(range(p), repeat=n):
        if all(xi == 0 for xi in x):
            continue
        if search(list(x), 1):
            return True
    return False
