"""Embeddings of etale algebras with involution into central simple algebras
with involution over Q: local criteria, the partition obstruction group, and
the explicit obstruction map, with certificates."""

from .arith import (
    REAL,
    Place,
    SquareClass,
    factor,
    hilbert_bit,
    is_local_square,
    square_class,
)
from .csa import (
    OrthNonSplit,
    OrthSplit,
    Sympl,
    UnitSplit,
    is_hyperbolic_local,
    local_class,
    orth_nonsplit,
    orth_split,
    validate_algebra,
)
from .etale import (
    BaseField,
    Case,
    Component,
    EtaleAlgebra,
    Kind,
    in_sigma,
    quad,
    real_shape,
    scaled_trace_form,
    split_pair,
    trace_data,
    trivial,
    validate,
)
from .local_embed import LocalVerdict, local_embeddable, local_scan
from .pipeline import (
    LocalDatum,
    Outcome,
    Verdict,
    achievable_set,
    build_datum,
    check_necessary,
    decide,
    f_map,
)
from .quadform import (
    DiagonalForm,
    diag,
    diagonalize,
    hasse_bit,
    local_profile,
    locally_isometric,
    witt_index_local,
)
from .shagroup import (
    InvariantProfile,
    ShaGroup,
    compute_sha,
    connectivity,
    covering_check,
    frob_basis,
    repair_profile,
    witness_prime,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
