"""The obstruction group of component partitions with covering splitting sets.

A partition (I0, I1) of the component index set belongs to the group when
the splitting sets of the two sides, together with the split locus of the
center, cover every place of Q.  Membership is decided exactly: finitely
many special places (the real place and the primes dividing the ramified
data) are checked directly, and every other place is represented by its
Frobenius sign pattern over a GF(2) basis of the relevant square classes,
with all patterns enumerated.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .arith import (
    REAL,
    Place,
    bad_primes,
    factor,
    is_local_square,
    kronecker,
    primes_iter,
    square_class,
)
from .etale import Case, Component, EtaleAlgebra, Kind, in_sigma

PATTERN_CAP = 20
COMPONENT_CAP = 20
WITNESS_SCAN_CAP = 10 ** 6


class PatternBudget(Exception):
    pass


class ScanExhausted(Exception):
    pass


class NotBalanced(Exception):
    pass


class ShaObstruction(Exception):
    def __init__(self, mask: int, message: str = ""):
        self.mask = mask
        super().__init__(message or f"obstruction pairing is 1 on partition mask {mask:b}")


# ---------------------------------------------------------------------------
# Frobenius basis


def _exponent_vector(rep: int, primes: Sequence[int]) -> Tuple[int, ...]:
    # coordinates: sign, then exponents mod 2 at the listed primes
    sign = 1 if rep < 0 else 0
    fs = factor(rep)
    return (sign,) + tuple(fs.count(p) % 2 for p in primes)


@dataclass
class FrobBasis:
    gens: List[int]                  # squarefree representatives, GF(2)-independent
    expansions: Dict[int, Tuple[int, ...]]  # class rep -> bits over gens
    prime_support: List[int]

    @property
    def t(self) -> int:
        return len(self.gens)

    def chi(self, rep: int, pattern: Sequence[int]) -> int:
        """Character value (+-1) of the class at a pattern in {+-1}^t."""
        bits = self.expansions[rep]
        val = 1
        for b, e in zip(pattern, bits):
            if e:
                val *= b
        return val

    def pattern_of_prime(self, p: int) -> Tuple[int, ...]:
        return tuple(kronecker(g, p) for g in self.gens)

    def patterns(self) -> Iterable[Tuple[int, ...]]:
        if self.t > PATTERN_CAP:
            raise PatternBudget(f"{self.t} basis classes exceed the pattern cap {PATTERN_CAP}")
        return product((1, -1), repeat=self.t)


def relevant_classes(e: EtaleAlgebra) -> List[int]:
    reps = []
    if e.case is Case.UNITARY:
        reps.append(square_class(e.delta).rep)
    for c in e.components:
        if c.F.m is not None:
            reps.append(c.F.m)
        if c.kind is Kind.QUAD:
            reps.append(square_class(c.d).rep)
    out = []
    for r in reps:
        if r != 1 and r not in out:
            out.append(r)
    return out


def frob_basis(e: EtaleAlgebra) -> FrobBasis:
    """GF(2)-independent basis of the square classes entering the covering data."""
    classes = relevant_classes(e)
    primes = sorted({p for r in classes for p in factor(r)})
    gens: List[int] = []
    echelon: List[Tuple[List[int], int]] = []  # (reduced vector, gen bitmask)
    combos: Dict[int, int] = {1: 0}

    for rep in classes:
        v = list(_exponent_vector(rep, primes))
        combo = 0
        for gvec, gcombo in echelon:
            pivot = next(k for k, x in enumerate(gvec) if x)
            if v[pivot]:
                v = [a ^ b for a, b in zip(v, gvec)]
                combo ^= gcombo
        if any(v):
            gens.append(rep)
            combo ^= 1 << (len(gens) - 1)
            echelon.append((v, combo))
        combos[rep] = combo
    t = len(gens)
    expansions = {r: tuple((c >> k) & 1 for k in range(t)) for r, c in combos.items()}
    return FrobBasis(gens, expansions, primes)


# ---------------------------------------------------------------------------
# Membership characters


def sigma_char(basis: FrobBasis, c: Component, pattern: Sequence[int]) -> bool:
    """Splitting-set membership of any unramified place with the given pattern."""
    if c.kind is not Kind.QUAD:
        return True
    d_rep = square_class(c.d).rep
    if c.F.m is None:
        return basis.chi(d_rep, pattern) == 1
    return not (basis.chi(c.F.m, pattern) == 1 and basis.chi(d_rep, pattern) == -1)


def center_split_char(e: EtaleAlgebra, basis: FrobBasis, pattern: Sequence[int]) -> bool:
    if e.case is not Case.UNITARY:
        return False
    return basis.chi(square_class(e.delta).rep, pattern) == 1


def center_split_at(e: EtaleAlgebra, v: Place) -> bool:
    if e.case is not Case.UNITARY:
        return False
    return is_local_square(e.delta, v)


def special_places(e: EtaleAlgebra) -> List[Place]:
    vals = [c.F.m for c in e.components if c.F.m is not None]
    vals += [c.d for c in e.components if c.kind is Kind.QUAD]
    if e.case is Case.UNITARY:
        vals.append(Fraction(e.delta))
    return [REAL] + [Place(p) for p in bad_primes(*vals)] if vals else [REAL, Place(2)]


# ---------------------------------------------------------------------------
# Covering checks and the group


@dataclass
class CoveringFailure:
    """Witness that a partition's splitting sets miss some place."""

    pattern: Optional[Tuple[int, ...]]  # failing Frobenius pattern, if any
    place: Optional[Place]              # failing special place, if any

    def witness_place(self, basis: FrobBasis) -> Place:
        if self.place is not None:
            return self.place
        return Place(witness_prime(basis, self.pattern))


def covering_failure(e: EtaleAlgebra, basis: FrobBasis, mask: int) -> Optional[CoveringFailure]:
    """First witness against the covering condition for the partition mask.

    The mask has bit i set when component i lies in I1 (bit 0 always clear).
    Returns None when the partition's splitting sets cover every place.
    """
    comps = e.components
    i0 = [i for i in range(len(comps)) if not (mask >> i) & 1]
    i1 = [i for i in range(len(comps)) if (mask >> i) & 1]
    for pattern in basis.patterns():
        if center_split_char(e, basis, pattern):
            continue
        if all(sigma_char(basis, comps[i], pattern) for i in i0):
            continue
        if all(sigma_char(basis, comps[j], pattern) for j in i1):
            continue
        return CoveringFailure(pattern, None)
    for v in special_places(e):
        if center_split_at(e, v):
            continue
        if all(in_sigma(comps[i], v) for i in i0):
            continue
        if all(in_sigma(comps[j], v) for j in i1):
            continue
        return CoveringFailure(None, v)
    return None


def covering_check(e: EtaleAlgebra, mask: int, basis: Optional[FrobBasis] = None) -> bool:
    basis = basis or frob_basis(e)
    return covering_failure(e, basis, mask) is None


def partition_sum(mask1: int, mask2: int, m: int) -> int:
    """Class of the componentwise sum, canonicalized to keep component 0 in I0."""
    s = mask1 ^ mask2
    if s & 1:
        s ^= (1 << m) - 1
    return s


@dataclass
class ShaGroup:
    m: int
    masks: List[int]                   # canonical member masks, 0 included
    basis_masks: List[int]
    nonsplit_indices: List[int]
    reduced_masks: List[int]           # image in the group of the nonsplit part
    rejected: List[Tuple[int, CoveringFailure]]
    frob: FrobBasis

    @property
    def order(self) -> int:
        return len(self.masks)

    @property
    def reduced_order(self) -> int:
        return len(self.reduced_masks)

    def nontrivial(self) -> List[int]:
        return [x for x in self.masks if x]

    def partition(self, mask: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        i0 = tuple(i for i in range(self.m) if not (mask >> i) & 1)
        i1 = tuple(i for i in range(self.m) if (mask >> i) & 1)
        return i0, i1


def compute_sha(e: EtaleAlgebra) -> ShaGroup:
    """Enumerate the group of covering partitions, with rejection witnesses."""
    m = e.m
    if m > COMPONENT_CAP:
        raise PatternBudget(f"{m} components exceed the component cap {COMPONENT_CAP}")
    basis = frob_basis(e)
    masks = [0]
    rejected = []
    for s in range(1, 1 << (m - 1)):
        mask = s << 1  # component 0 stays in I0
        fail = covering_failure(e, basis, mask)
        if fail is None:
            masks.append(mask)
        else:
            rejected.append((mask, fail))
    # the trivial class (I, empty) is the mask 0 above; group closure check
    mask_set = set(masks)
    for x in masks:
        for y in masks:
            assert partition_sum(x, y, m) in mask_set, "partition group not closed"
    basis_masks = _gf2_mask_basis(masks)
    nonsplit = [i for i, c in enumerate(e.components) if c.kind is Kind.QUAD]
    reduced = sorted({_project_mask(x, nonsplit) for x in masks})
    return ShaGroup(m, sorted(masks), basis_masks, nonsplit, reduced, rejected, basis)


def _project_mask(mask: int, nonsplit: Sequence[int]) -> int:
    bits = [(mask >> i) & 1 for i in nonsplit]
    if bits and bits[0]:
        bits = [b ^ 1 for b in bits]
    out = 0
    for k, b in enumerate(bits):
        out |= b << k
    return out


def _gf2_mask_basis(masks: Sequence[int]) -> List[int]:
    by_high: Dict[int, int] = {}
    for x in masks:
        v = x
        while v:
            h = v.bit_length() - 1
            if h in by_high:
                v ^= by_high[h]
            else:
                by_high[h] = v
                break
    return sorted(by_high.values())


# ---------------------------------------------------------------------------
# Connectivity and witnesses


def witness_prime(basis: FrobBasis, pattern: Sequence[int], scan_cap: int = WITNESS_SCAN_CAP) -> int:
    """An odd unramified prime whose Kronecker pattern over the basis equals
    the given one.  Existence is guaranteed; exhaustion signals a basis bug."""
    pattern = tuple(pattern)
    count = 0
    for p in primes_iter(3):
        if any(g % p == 0 for g in basis.gens):
            continue
        count += 1
        if count > scan_cap:
            raise ScanExhausted(f"no prime with pattern {pattern} among {scan_cap} candidates")
        if basis.pattern_of_prime(p) == pattern:
            return p
    raise ScanExhausted("unreachable")


@dataclass
class Edge:
    i: int
    j: int
    witness: Place


def connectivity(e: EtaleAlgebra) -> List[Edge]:
    """Edges (i, j) whose splitting sets (with the center's) miss some place."""
    basis = frob_basis(e)
    comps = e.components
    edges = []
    for i in range(e.m):
        for j in range(i + 1, e.m):
            w = _pair_witness(e, basis, comps[i], comps[j])
            if w is not None:
                edges.append(Edge(i, j, w))
    return edges


def _pair_witness(e: EtaleAlgebra, basis: FrobBasis, ci: Component, cj: Component) -> Optional[Place]:
    for pattern in basis.patterns():
        if center_split_char(e, basis, pattern):
            continue
        if sigma_char(basis, ci, pattern) or sigma_char(basis, cj, pattern):
            continue
        return Place(witness_prime(basis, pattern))
    for v in special_places(e):
        if v.is_real:
            continue  # real failures reappear as sign patterns; flips need finite places
        if center_split_at(e, v):
            continue
        if in_sigma(ci, v) or in_sigma(cj, v):
            continue
        return v
    return None


# ---------------------------------------------------------------------------
# Invariant profiles and the repair algorithm


@dataclass
class InvariantProfile:
    """Bits c[i][v] standing for the local corestriction invariants of a
    family (a_i^v); zero outside the recorded support."""

    places: List[Place]
    bits: List[Dict[Place, int]]  # one sparse row per component

    def bit(self, i: int, v: Place) -> int:
        return self.bits[i].get(v, 0)

    def row_sum(self, i: int) -> int:
        return sum(self.bits[i].values()) % 2

    def column_sum(self, v: Place) -> int:
        return sum(row.get(v, 0) for row in self.bits) % 2

    def total(self) -> int:
        return sum(self.row_sum(i) for i in range(len(self.bits))) % 2

    def copy(self) -> "InvariantProfile":
        return InvariantProfile(list(self.places), [dict(r) for r in self.bits])


def flip_allowed(e: EtaleAlgebra, i: int, v: Place) -> bool:
    """A bit at (i, v) can take either value iff v lies outside the center's
    split locus and outside the component's splitting set."""
    return not center_split_at(e, v) and not in_sigma(e.components[i], v)


def validate_profile(e: EtaleAlgebra, profile: InvariantProfile) -> None:
    if len(profile.bits) != e.m:
        raise ValueError("one bit row per component")
    for i, row in enumerate(profile.bits):
        for v, b in row.items():
            if b not in (0, 1):
                raise ValueError("bits are 0 or 1")
            if b and not flip_allowed(e, i, v):
                raise ValueError(f"bit forced to 0 at component {i}, place {v}")


def repair_profile(e: EtaleAlgebra, profile: InvariantProfile,
                   sha: Optional[ShaGroup] = None) -> InvariantProfile:
    """Rebalance an admissible profile so that every row sums to zero.

    Hypotheses: the total bit sum vanishes and the pairing with every
    member of the partition group vanishes.  The output keeps every column
    sum and touches no real place; flips happen in legal pairs along
    connecting paths, each with a finite witness place.
    """
    validate_profile(e, profile)
    sha = sha or compute_sha(e)
    basis = sha.frob
    if profile.total():
        raise NotBalanced("total bit parity is 1")
    for mask in sha.masks:
        pairing = sum(profile.row_sum(i) for i in range(e.m) if not (mask >> i) & 1) % 2
        if mask and pairing:
            raise ShaObstruction(mask)

    out = profile.copy()
    comps = e.components

    def flip(i: int, v: Place):
        assert v.is_finite, "never flip at the real place"
        assert flip_allowed(e, i, v)
        out.bits[i][v] = out.bits[i].get(v, 0) ^ 1
        if v not in out.places:
            out.places.append(v)

    row = [out.row_sum(i) for i in range(e.m)]
    while any(row):
        i0 = row.index(1)
        grown = {i0}
        parent: Dict[int, Tuple[int, Place]] = {}
        target = None
        while target is None:
            j, via, u = _grow_step(e, basis, comps, grown)
            parent[j] = (via, u)
            grown.add(j)
            if row[j] == 1:
                target = j
        # flip pairs along the path target -> ... -> i0
        k = target
        while k in parent:
            via, u = parent[k]
            flip(k, u)
            flip(via, u)
            k = via
        row = [out.row_sum(i) for i in range(e.m)]
    return out


def _grow_step(e: EtaleAlgebra, basis: FrobBasis, comps: Sequence[Component],
               grown: set) -> Tuple[int, int, Place]:
    """Find j outside the grown set, i inside, and a finite place outside the
    center's split locus and both splitting sets.

    Such a triple exists whenever the partition (grown, rest) is not in the
    group, which the repair loop's parity bookkeeping guarantees.
    """
    rest = [j for j in range(len(comps)) if j not in grown]
    for pattern in basis.patterns():
        if center_split_char(e, basis, pattern):
            continue
        ins = [i for i in grown if not sigma_char(basis, comps[i], pattern)]
        if not ins:
            continue
        outs = [j for j in rest if not sigma_char(basis, comps[j], pattern)]
        if not outs:
            continue
        u = Place(witness_prime(basis, pattern))
        return outs[0], ins[0], u
    for v in special_places(e):
        if v.is_real or center_split_at(e, v):
            continue
        ins = [i for i in grown if not in_sigma(comps[i], v)]
        if not ins:
            continue
        outs = [j for j in rest if not in_sigma(comps[j], v)]
        if not outs:
            continue
        return outs[0], ins[0], v
    raise AssertionError("covering failure promised but not found; basis bug")
