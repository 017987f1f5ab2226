"""Global decision pipeline.

The local data a = (a_i^v) of the theory are represented purely by their
corestriction invariant bits x[i][v] = inv_v(N_{F_i/Q}(a_i^v), d_i); every
formula consumed downstream factors through these bits.  A datum is a bit
matrix over the bad place set satisfying, at each place, the case-specific
target-bit constraint, with each entry ranging over the achievable set of
its component.  The obstruction map f sums rows over one side of a
partition; it vanishes identically iff no obstruction exists.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .arith import REAL, Place, hilbert_bit, is_local_square, square_class
from .csa import (
    InvolutionAlgebra,
    OrthNonSplit,
    OrthSplit,
    Sympl,
    UnitSplit,
    disc_class,
    is_split_at,
    split_hasse_bit,
    validate_algebra,
)
from .etale import (
    Case,
    Component,
    EtaleAlgebra,
    Kind,
    even_part,
    in_sigma,
    trace_data,
)
from .local_embed import CaseMismatch, LocalScan, bad_set, check_case, local_scan
from .quadform import hasse_bit
from .shagroup import ShaGroup, compute_sha, flip_allowed


class OrientationRequired(Exception):
    """A nonsplit place with locally trivial discriminant: target bits are
    not computable from invariants (out-of-scope orientation branch)."""

    def __init__(self, places):
        self.places = list(places)
        super().__init__(f"orientation data required at {self.places}")


class ParityViolation(Exception):
    """Target bits do not sum to zero; signals an inconsistent instance or
    an internal invariant bug, never a legitimate decision outcome."""


class Infeasible(Exception):
    """No achievable bit assignment meets a target; must not occur after a
    positive local scan."""


# ---------------------------------------------------------------------------
# Achievable sets and target bits


def achievable_set(e: EtaleAlgebra, i: int, v: Place) -> Tuple[int, ...]:
    """{0} on the component's splitting set (and the split center locus),
    both values elsewhere."""
    return (0, 1) if flip_allowed(e, i, v) else (0,)


def target_bit_finite(e: EtaleAlgebra, a: InvolutionAlgebra, v: Place) -> int:
    """The required value of sum_i x[i][v] at a finite place."""
    assert v.is_finite
    if e.case is Case.UNITARY:
        dt = trace_data(e).det_t
        return hilbert_bit(a.det() / dt, e.delta, v)
    if e.case is Case.SYMPLECTIC:
        raise CaseMismatch("symplectic instances carry no embedding datum")
    n = e.rank
    if n % 2 == 0:
        td = trace_data(e)
        if isinstance(a, OrthSplit):
            return (hasse_bit(a.q, v) + hasse_bit(td.form, v)) % 2
        if not is_local_square(a.disc, v):
            # the discriminant extension is a field at v; a trivial datum
            # entry is a valid choice there
            return 0
        if not is_split_at(a, v):
            raise OrientationRequired([v])
        return (split_hasse_bit(a, v) + hasse_bit(td.form, v)) % 2
    # odd orthogonal: decide on E directly, with the determinant-matching
    # one-dimensional slot
    td = trace_data(even_part(e))
    a2 = (a.q.det_class() * td.det_class()).rep
    return (hasse_bit(a.q, v) + hasse_bit(td.form, v) + hilbert_bit(td.det_t, a2, v)) % 2


# ---------------------------------------------------------------------------
# Real sign patterns


@dataclass(frozen=True)
class RealOption:
    sig: Tuple[int, int]
    bit: int


def _real_options_first_kind(c: Component, pinned_sign: Optional[int]) -> List[RealOption]:
    m = c.F.m
    if c.kind is Kind.TRIVIAL:
        opts = [RealOption((1, 0), 0), RealOption((0, 1), 0)]
        if pinned_sign is not None:
            opts = [opts[0]] if pinned_sign > 0 else [opts[1]]
        return opts
    if c.kind is Kind.SPLIT_PAIR:
        return [RealOption((1, 1), 0)] if m is None else [RealOption((2, 2), 0)]
    d = c.d
    if m is None:
        if d > 0:
            return [RealOption((1, 1), 0)]
        return [RealOption((2, 0), 0), RealOption((0, 2), 1)]
    if m < 0:
        return [RealOption((2, 2), 0)]
    if d > 0:
        return [RealOption((2, 2), 0)]
    return [RealOption((4, 0), 0), RealOption((2, 2), 1), RealOption((0, 4), 0)]


def _real_options_unitary(c: Component) -> List[RealOption]:
    m = c.F.m
    if c.kind is Kind.SPLIT_PAIR:
        return [RealOption((1, 1), 0)]
    if m is None:
        return [RealOption((1, 0), 0), RealOption((0, 1), 1)]
    if m < 0:
        return [RealOption((1, 1), 0)]
    return [RealOption((2, 0), 0), RealOption((1, 1), 1), RealOption((0, 2), 0)]


@dataclass
class RealPattern:
    bits: Tuple[int, ...]
    sig: Tuple[int, int]

    @property
    def t(self) -> int:
        return sum(self.bits) % 2


def real_patterns(e: EtaleAlgebra, a: InvolutionAlgebra) -> List[RealPattern]:
    """All component sign assignments realizing an admissible real signature."""
    if e.case is Case.UNITARY:
        if e.delta > 0:
            return [RealPattern(tuple(0 for _ in e.components), (0, 0))]
        options = [_real_options_unitary(c) for c in e.components]
        targets = {a.signature()}
    else:
        pinned = None
        targets: Set[Tuple[int, int]] = set()
        if e.rank % 2:
            td = trace_data(even_part(e))
            a2 = (a.q.det_class() * td.det_class()).rep
            pinned = 1 if a2 > 0 else -1
        if isinstance(a, OrthSplit):
            targets = {a.q.signature()}
        elif isinstance(a, OrthNonSplit):
            if REAL in a.ram_set():
                targets = set()  # unconstrained: every pattern embeds
            else:
                p, n = a.signature
                targets = {(p, n), (n, p)}
        options = [_real_options_first_kind(c, pinned) for c in e.components]

    out = []
    for combo in itertools.product(*options):
        pos = sum(o.sig[0] for o in combo)
        neg = sum(o.sig[1] for o in combo)
        if targets and (pos, neg) not in targets:
            continue
        out.append(RealPattern(tuple(o.bit for o in combo), (pos, neg)))
    return out


# ---------------------------------------------------------------------------
# Embedding data


@dataclass
class LocalDatum:
    places: List[Place]
    bits: List[Dict[Place, int]]     # sparse rows, one per component
    targets: Dict[Place, int]
    real_pattern: Optional[RealPattern]
    all_real_patterns: List[RealPattern]

    def bit(self, i: int, v: Place) -> int:
        return self.bits[i].get(v, 0)

    def row_sum(self, i: int) -> int:
        return sum(self.bits[i].values()) % 2

    def column_sum(self, v: Place) -> int:
        return sum(row.get(v, 0) for row in self.bits) % 2

    def total(self) -> int:
        return sum(self.row_sum(i) for i in range(len(self.bits))) % 2


def build_datum(e: EtaleAlgebra, a: InvolutionAlgebra,
                tie_break: Optional[Sequence[int]] = None,
                real_index: int = 0) -> LocalDatum:
    """A bit matrix datum over the bad set meeting every place's target.

    `tie_break` permutes the preference order among components with a free
    bit; `real_index` selects among the admissible real sign patterns.
    The resulting obstruction map is independent of both choices, which the
    test suite exercises.
    """
    if e.case is Case.SYMPLECTIC:
        raise CaseMismatch("symplectic instances carry no embedding datum")
    order = list(tie_break) if tie_break is not None else list(range(e.m))
    places = bad_set(e, a)
    rows: List[Dict[Place, int]] = [dict() for _ in range(e.m)]
    targets: Dict[Place, int] = {}

    oriented_missing = []
    for v in places:
        if v.is_real:
            continue
        try:
            t = target_bit_finite(e, a, v)
        except OrientationRequired as exc:
            oriented_missing.extend(exc.places)
            continue
        targets[v] = t
        if t:
            free = [i for i in order if 1 in achievable_set(e, i, v)]
            if not free:
                raise Infeasible(f"target bit 1 with no free component at {v}")
            rows[free[0]][v] = 1
    if oriented_missing:
        raise OrientationRequired(oriented_missing)

    patterns = real_patterns(e, a)
    chosen = None
    if e.case is Case.UNITARY or isinstance(a, OrthSplit) or REAL not in a.ram_set() and a.disc > 0:
        # the real target bit is pinned by invariants
        need = sum(targets.values()) % 2
        matching = [p for p in patterns if p.t == need]
        if not matching:
            raise ParityViolation("no admissible real pattern matches the finite parity")
        if len({p.t for p in patterns}) > 1 and (e.case is Case.UNITARY or isinstance(a, OrthSplit)):
            raise ParityViolation("real pattern parity is not pinned; invariant bug")
        chosen = matching[real_index % len(matching)]
    else:
        # gauge freedom at the real place: pick the parity that balances
        need = sum(targets.values()) % 2
        matching = [p for p in patterns if p.t == need]
        if not matching:
            raise ParityViolation("no real pattern restores the global parity")
        chosen = matching[real_index % len(matching)]
    for i, b in enumerate(chosen.bits):
        if b:
            rows[i][REAL] = 1
    targets[REAL] = chosen.t

    datum = LocalDatum(places, rows, targets, chosen, patterns)
    if datum.total() != 0:
        raise ParityViolation("datum bits do not sum to zero")
    return datum


def f_map(sha: ShaGroup, datum: LocalDatum) -> Dict[int, int]:
    """The obstruction map on the partition group: for each member, the
    bit sum of the rows on the I0 side."""
    rowsums = [datum.row_sum(i) for i in range(len(datum.bits))]
    out = {}
    for mask in sha.masks:
        out[mask] = sum(rowsums[i] for i in range(sha.m) if not (mask >> i) & 1) % 2
    return out


# ---------------------------------------------------------------------------
# Necessary conditions and the verdict


@dataclass
class NecessaryReport:
    checks: List[Tuple[str, bool, str]]

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def failed_names(self) -> List[str]:
        return [name for name, ok, _ in self.checks if not ok]


def check_necessary(e: EtaleAlgebra, a: InvolutionAlgebra) -> NecessaryReport:
    checks: List[Tuple[str, bool, str]] = []
    # every component's field factors must split A
    bad = []
    if isinstance(a, (OrthNonSplit, Sympl)):
        from .etale import field_factor_kills_index_two
        for v in sorted(a.ram_set()):
            for i, c in enumerate(e.components):
                if not field_factor_kills_index_two(c, v):
                    bad.append((i, v))
    checks.append(("factor-splitting", not bad,
                   "all factors split A" if not bad else f"obstructed at {bad}"))
    if e.case is Case.ORTHOGONAL and e.rank % 2 == 0:
        de = trace_data(e).disc_e
        da = disc_class(a)
        ok = (de * da).is_trivial
        checks.append(("disc-equality", ok, f"disc(E) = {de.rep}, disc(A,tau) = {da.rep}"))
    if e.case is Case.UNITARY:
        dt = trace_data(e).det_t
        bad_places = []
        for v in bad_set(e, a):
            if is_local_square(e.delta, v):
                continue
            if hilbert_bit(a.det() / dt, e.delta, v) == 0:
                continue
            if any(not in_sigma(c, v) for c in e.components):
                continue
            bad_places.append(v)
        checks.append(("norm-condition", not bad_places,
                       "attainable everywhere" if not bad_places else f"fails at {bad_places}"))
    return NecessaryReport(checks)


class Outcome(enum.Enum):
    GLOBALLY_EMBEDDABLE = "GloballyEmbeddable"
    LOCALLY_OBSTRUCTED = "LocallyObstructed"
    BRAUER_MANIN_OBSTRUCTED = "BrauerManinObstructed"
    ORIENTATION_INDETERMINATE = "OrientationIndeterminate"
    NECESSARY_CONDITION_FAILED = "NecessaryConditionFailed"


EXIT_CODES = {
    Outcome.GLOBALLY_EMBEDDABLE: 0,
    Outcome.LOCALLY_OBSTRUCTED: 2,
    Outcome.NECESSARY_CONDITION_FAILED: 2,
    Outcome.BRAUER_MANIN_OBSTRUCTED: 3,
    Outcome.ORIENTATION_INDETERMINATE: 4,
}


@dataclass
class Verdict:
    outcome: Outcome
    necessary: Optional[NecessaryReport] = None
    scan: Optional[LocalScan] = None
    sha: Optional[ShaGroup] = None
    datum: Optional[LocalDatum] = None
    f_values: Optional[Dict[int, int]] = None
    witness_mask: Optional[int] = None
    places: List[Place] = field(default_factory=list)
    detail: str = ""

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.outcome]


def orientation_gaps(a: InvolutionAlgebra) -> List[Place]:
    """Nonsplit places of A whose local discriminant is trivial.

    Oriented local data cannot be pinned by invariants there; the verdict
    is indeterminate when any exist (for either parity of r, since the
    target bits at such places are undefined)."""
    if not isinstance(a, OrthNonSplit):
        return []
    return [v for v in sorted(a.ram_set()) if is_local_square(a.disc, v)]


def decide(e: EtaleAlgebra, a: InvolutionAlgebra) -> Verdict:
    """Run the full pipeline: necessary checks, local scan, branch guards,
    datum, partition group, obstruction map."""
    a = validate_algebra(a)
    check_case(e, a)

    necessary = check_necessary(e, a)
    if not necessary.passed:
        return Verdict(Outcome.NECESSARY_CONDITION_FAILED, necessary=necessary,
                       detail=", ".join(necessary.failed_names()))

    scan = local_scan(e, a)
    if not scan.all_true:
        return Verdict(Outcome.LOCALLY_OBSTRUCTED, necessary=necessary, scan=scan,
                       places=scan.failures(), detail="local obstruction")

    if e.case is Case.SYMPLECTIC:
        # the Hasse principle is unconditional here; locals settle it
        return Verdict(Outcome.GLOBALLY_EMBEDDABLE, necessary=necessary, scan=scan,
                       detail="symplectic signature condition")

    gaps = orientation_gaps(a)
    if gaps:
        return Verdict(Outcome.ORIENTATION_INDETERMINATE, necessary=necessary, scan=scan,
                       places=gaps,
                       detail="nonsplit places with locally trivial discriminant")

    try:
        datum = build_datum(e, a)
    except OrientationRequired as exc:
        return Verdict(Outcome.ORIENTATION_INDETERMINATE, necessary=necessary, scan=scan,
                       places=exc.places, detail=str(exc))

    sha = compute_sha(e)
    f = f_map(sha, datum)
    nonzero = [mask for mask, bit in f.items() if bit]
    if nonzero:
        witness = min(nonzero)
        return Verdict(Outcome.BRAUER_MANIN_OBSTRUCTED, necessary=necessary, scan=scan,
                       sha=sha, datum=datum, f_values=f, witness_mask=witness,
                       detail=f"f = 1 on partition mask {witness:#b}")
    return Verdict(Outcome.GLOBALLY_EMBEDDABLE, necessary=necessary, scan=scan,
                   sha=sha, datum=datum, f_values=f, detail="f = 0")
