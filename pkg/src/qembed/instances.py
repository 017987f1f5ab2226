"""Versioned instance files and reports.

Instances are JSON with exact integers and "p/q" strings for rationals;
no floating point anywhere.  The machine report rendering round-trips
through ``json.loads``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

from .arith import REAL, Place
from .csa import (
    InvolutionAlgebra,
    OrthNonSplit,
    OrthSplit,
    Sympl,
    UnitSplit,
    validate_algebra,
)
from .etale import BaseField, Case, Component, EtaleAlgebra, Kind, validate
from .pipeline import Outcome, Verdict
from .quadform import DiagonalForm

SCHEMA_VERSION = 1


class SchemaError(Exception):
    pass


# ---------------------------------------------------------------------------
# Primitive encoders


def _enc_rational(x: Fraction) -> Union[int, str]:
    x = Fraction(x)
    return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _dec_rational(v: Any, where: str) -> Fraction:
    if isinstance(v, bool):
        raise SchemaError(f"{where}: expected a rational, got a boolean")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"{where}: bad rational {v!r}: {exc}") from None
    if isinstance(v, float):
        raise SchemaError(f"{where}: floats are not allowed, write '{v}' exactly")
    raise SchemaError(f"{where}: expected a rational, got {type(v).__name__}")


def _enc_place(v: Place) -> Union[int, str]:
    return "real" if v.is_real else v.p


def _dec_place(v: Any, where: str) -> Place:
    if isinstance(v, str) and v.lower() in ("real", "oo", "inf", "infinity"):
        return REAL
    if isinstance(v, int):
        try:
            return Place(v)
        except ValueError as exc:
            raise SchemaError(f"{where}: {exc}") from None
    if isinstance(v, str):
        try:
            return Place(int(v))
        except ValueError as exc:
            raise SchemaError(f"{where}: bad place {v!r}") from None
    raise SchemaError(f"{where}: bad place {v!r}")


# ---------------------------------------------------------------------------
# Etale block


def _enc_field(f: BaseField) -> Any:
    return "Q" if f.m is None else {"sqrt": f.m}


def _dec_field(v: Any, where: str) -> BaseField:
    if v == "Q":
        return BaseField(None)
    if isinstance(v, dict) and set(v) == {"sqrt"} and isinstance(v["sqrt"], int):
        try:
            return BaseField(v["sqrt"])
        except Exception as exc:
            raise SchemaError(f"{where}: {exc}") from None
    raise SchemaError(f"{where}: base field must be \"Q\" or {{\"sqrt\": m}}")


def encode_etale(e: EtaleAlgebra) -> Dict[str, Any]:
    comps = []
    for c in e.components:
        entry: Dict[str, Any] = {"F": _enc_field(c.F), "kind": c.kind.value}
        if c.kind is Kind.QUAD:
            entry["d"] = _enc_rational(c.d)
        comps.append(entry)
    out = {"case": e.case.value, "components": comps}
    if e.case is Case.UNITARY:
        out["delta"] = e.delta
    return out


def decode_etale(block: Any) -> EtaleAlgebra:
    if not isinstance(block, dict):
        raise SchemaError("etale block must be an object")
    try:
        case = Case(block.get("case"))
    except ValueError:
        raise SchemaError(f"etale.case must be one of {[c.value for c in Case]}") from None
    comps = []
    raw = block.get("components")
    if not isinstance(raw, list) or not raw:
        raise SchemaError("etale.components must be a nonempty list")
    for i, c in enumerate(raw):
        where = f"etale.components[{i}]"
        if not isinstance(c, dict):
            raise SchemaError(f"{where}: must be an object")
        f = _dec_field(c.get("F", "Q"), where)
        kind = c.get("kind")
        if kind == "trivial":
            comps.append(Component(f, Kind.TRIVIAL))
        elif kind == "split_pair":
            comps.append(Component(f, Kind.SPLIT_PAIR))
        elif kind == "quad":
            comps.append(Component(f, Kind.QUAD, _dec_rational(c.get("d"), where + ".d")))
        else:
            raise SchemaError(f"{where}.kind must be trivial | split_pair | quad")
    delta = block.get("delta")
    if case is Case.UNITARY and not isinstance(delta, int):
        raise SchemaError("etale.delta (integer) required in the unitary case")
    try:
        return validate(case, comps, delta if case is Case.UNITARY else None)
    except Exception as exc:
        raise SchemaError(f"etale block invalid: {exc}") from None


# ---------------------------------------------------------------------------
# Algebra block


def encode_algebra(a: InvolutionAlgebra) -> Dict[str, Any]:
    if isinstance(a, OrthSplit):
        return {"variant": "orth_split", "q": [_enc_rational(c) for c in a.q.coeffs]}
    if isinstance(a, OrthNonSplit):
        out: Dict[str, Any] = {
            "variant": "orth_nonsplit",
            "ram": [_enc_place(v) for v in sorted(a.ram_set())],
            "r": a.r,
            "disc": a.disc,
        }
        if a.hasse:
            out["hasse"] = {str(_enc_place(v)): b for v, b in a.hasse}
        if a.signature is not None:
            out["signature"] = list(a.signature)
        return out
    if isinstance(a, Sympl):
        out = {"variant": "symplectic", "n": a.n,
               "ram": [_enc_place(v) for v in sorted(a.ram_set())]}
        if a.signature is not None:
            out["signature"] = list(a.signature)
        return out
    if isinstance(a, UnitSplit):
        return {"variant": "unit_split", "delta": a.delta,
                "h": [_enc_rational(c) for c in a.h]}
    raise SchemaError(f"unknown algebra {a!r}")


def decode_algebra(block: Any) -> InvolutionAlgebra:
    if not isinstance(block, dict):
        raise SchemaError("algebra block must be an object")
    variant = block.get("variant")
    try:
        if variant == "orth_split":
            q = [_dec_rational(c, "algebra.q") for c in block.get("q", [])]
            if not q:
                raise SchemaError("algebra.q must be a nonempty list")
            alg: InvolutionAlgebra = OrthSplit(DiagonalForm(tuple(q)))
        elif variant == "orth_nonsplit":
            ram = tuple(_dec_place(v, "algebra.ram") for v in block.get("ram", []))
            hasse = tuple(sorted(
                (_dec_place(k, "algebra.hasse"), int(b))
                for k, b in (block.get("hasse") or {}).items()))
            sig = block.get("signature")
            alg = OrthNonSplit(ram, int(block.get("r", 0)), int(block.get("disc", 0)),
                               hasse, tuple(sig) if sig is not None else None)
        elif variant == "symplectic":
            ram = tuple(_dec_place(v, "algebra.ram") for v in block.get("ram", []))
            sig = block.get("signature")
            alg = Sympl(int(block.get("n", 0)), ram,
                        tuple(sig) if sig is not None else None)
        elif variant == "unit_split":
            h = tuple(_dec_rational(c, "algebra.h") for c in block.get("h", []))
            alg = UnitSplit(int(block.get("delta", 0)), h)
        else:
            raise SchemaError("algebra.variant must be orth_split | orth_nonsplit | "
                              "symplectic | unit_split")
        return validate_algebra(alg)
    except SchemaError:
        raise
    except Exception as exc:
        raise SchemaError(f"algebra block invalid: {exc}") from None


# ---------------------------------------------------------------------------
# Instance files


@dataclass
class Instance:
    etale: EtaleAlgebra
    algebra: InvolutionAlgebra
    options: Dict[str, Any]

    def to_json(self) -> str:
        doc = {
            "version": SCHEMA_VERSION,
            "etale": encode_etale(self.etale),
            "algebra": encode_algebra(self.algebra),
        }
        if self.options:
            doc["options"] = self.options
        return json.dumps(doc, indent=2) + "\n"


def parse_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")
    version = doc.get("version")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported version {version!r}, expected {SCHEMA_VERSION}")
    e = decode_etale(doc.get("etale"))
    a = decode_algebra(doc.get("algebra"))
    opts = doc.get("options") or {}
    if not isinstance(opts, dict):
        raise SchemaError("options must be an object")
    return Instance(e, a, opts)


def load_instance(path: str) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_instance(fh.read())


# ---------------------------------------------------------------------------
# Reports


def verdict_report(inst: Instance, verdict: Verdict, seed: Optional[int] = None) -> Dict[str, Any]:
    """Machine-readable report; round-trips through JSON."""
    rep: Dict[str, Any] = {
        "version": SCHEMA_VERSION,
        "instance": json.loads(inst.to_json()),
        "outcome": verdict.outcome.value,
        "exit_code": verdict.exit_code,
        "detail": verdict.detail,
    }
    if seed is not None:
        rep["seed"] = seed
    if verdict.necessary is not None:
        rep["necessary"] = [
            {"check": name, "passed": ok, "info": info}
            for name, ok, info in verdict.necessary.checks
        ]
    if verdict.scan is not None:
        rep["local"] = [
            {"place": _enc_place(p), "embeddable": lv.embeddable, "rule": lv.rule}
            for p, lv in sorted(verdict.scan.verdicts.items())
        ]
    if verdict.places:
        rep["places"] = [_enc_place(p) for p in verdict.places]
    if verdict.sha is not None:
        sha = verdict.sha
        rep["sha"] = {
            "order": sha.order,
            "reduced_order": sha.reduced_order,
            "basis": [list(sha.partition(mask)[1]) for mask in sha.basis_masks],
        }
    if verdict.datum is not None:
        rep["datum"] = {
            "places": [_enc_place(p) for p in verdict.datum.places],
            "bits": [
                {str(_enc_place(p)): b for p, b in sorted(row.items())}
                for row in verdict.datum.bits
            ],
            "targets": {str(_enc_place(p)): t for p, t in sorted(verdict.datum.targets.items())},
        }
    if verdict.f_values is not None and verdict.sha is not None:
        rep["f"] = [
            {"partition_i1": list(verdict.sha.partition(mask)[1]), "value": bit}
            for mask, bit in sorted(verdict.f_values.items())
        ]
    if verdict.witness_mask is not None:
        i0, i1 = verdict.sha.partition(verdict.witness_mask)
        rep["witness"] = {"i0": list(i0), "i1": list(i1)}
    return rep


def render_text(rep: Dict[str, Any]) -> str:
    lines = []
    lines.append(f"outcome: {rep['outcome']} (exit {rep['exit_code']})")
    if rep.get("detail"):
        lines.append(f"  {rep['detail']}")
    for row in rep.get("necessary", []):
        mark = "ok" if row["passed"] else "FAIL"
        lines.append(f"necessary {row['check']}: {mark} ({row['info']})")
    if "local" in rep:
        lines.append("local verdicts:")
        for row in rep["local"]:
            mark = "yes" if row["embeddable"] else "NO"
            lines.append(f"  v = {row['place']}: {mark}  [{row['rule']}]")
    if "sha" in rep:
        lines.append(f"sha order: {rep['sha']['order']} "
                     f"(reduced {rep['sha']['reduced_order']})")
        for b in rep["sha"]["basis"]:
            lines.append(f"  basis partition I1 = {b}")
    if "f" in rep:
        vals = {tuple(row["partition_i1"]): row["value"] for row in rep["f"]}
        lines.append(f"f values: {vals}")
    if "witness" in rep:
        lines.append(f"witness partition: I0 = {rep['witness']['i0']}, "
                     f"I1 = {rep['witness']['i1']}")
    if "places" in rep:
        lines.append(f"places: {rep['places']}")
    return "\n".join(lines) + "\n"
