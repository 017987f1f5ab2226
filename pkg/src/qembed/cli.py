"""Command line interface.

Exit codes: 0 globally embeddable, 2 locally obstructed or necessary
condition failed, 3 obstructed by the partition-group map, 4 orientation
indeterminate, 1 input or budget error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from typing import Any, Dict, List, Optional

from .arith import GuardExceeded, REAL, Place
from .csa import AlgebraError
from .etale import ValidationError
from .families import (
    SearchExhausted,
    hyperbolic_plane_instance,
    sec93,
    three_subfield_bm,
    three_subfield_etale,
    three_subfield_parameters,
)
from .instances import (
    Instance,
    SchemaError,
    load_instance,
    render_text,
    verdict_report,
)
from .local_embed import CaseMismatch, local_embeddable
from .pipeline import decide
from .shagroup import PatternBudget, ScanExhausted, compute_sha

INPUT_ERROR = 1


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return INPUT_ERROR


def _load(path: str) -> Instance:
    if not os.path.exists(path):
        raise SchemaError(f"no such file: {path}")
    return load_instance(path)


def cmd_decide(args) -> int:
    inst = _load(args.file)
    verdict = decide(inst.etale, inst.algebra)
    rep = verdict_report(inst, verdict, seed=args.seed)
    if args.json:
        print(json.dumps(rep, indent=2))
    else:
        print(render_text(rep), end="")
    return verdict.exit_code


def cmd_sha(args) -> int:
    inst = _load(args.file)
    sha = compute_sha(inst.etale)
    out = {
        "order": sha.order,
        "reduced_order": sha.reduced_order,
        "members": [list(sha.partition(mask)[1]) for mask in sha.masks],
        "basis": [list(sha.partition(mask)[1]) for mask in sha.basis_masks],
        "rejected": [
            {"i1": list(sha.partition(mask)[1]),
             "witness": _witness_desc(sha, fail)}
            for mask, fail in sha.rejected
        ],
    }
    print(json.dumps(out, indent=2))
    return 0


def _witness_desc(sha, fail) -> Dict[str, Any]:
    v = fail.witness_place(sha.frob)
    return {"place": "real" if v.is_real else v.p}


def cmd_local(args) -> int:
    inst = _load(args.file)
    if args.place.lower() in ("real", "oo", "inf"):
        v = REAL
    else:
        try:
            v = Place(int(args.place))
        except ValueError as exc:
            return _fail(str(exc))
    lv = local_embeddable(inst.etale, inst.algebra, v)
    out = {"place": args.place, "embeddable": lv.embeddable, "rule": lv.rule,
           "data": {k: repr(x) for k, x in lv.data.items()}}
    print(json.dumps(out, indent=2))
    return 0


def cmd_family(args) -> int:
    name = args.name
    if name == "sec93":
        if len(args.params) != 4:
            return _fail("sec93 takes four distinct primes")
        places = tuple(int(p) for p in args.params)
        inst = sec93(places)
        doc = Instance(inst.etale, inst.algebra,
                       {"family": "sec93", "a": inst.a, "b": inst.b,
                        "places": list(places)})
    elif name == "three-subfield-sha":
        if args.params:
            if len(args.params) != 2:
                return _fail("three-subfield-sha takes zero or two integers (a, b)")
            a, b = int(args.params[0]), int(args.params[1])
        else:
            a, b = three_subfield_parameters()
        built = three_subfield_bm(a, b)
        doc = Instance(built.etale, built.algebra,
                       {"family": "three-subfield-sha", "a": built.a, "b": built.b,
                        "twist_places": list(built.twist_places)})
    elif name == "hyperbolic-plane":
        e, alg = hyperbolic_plane_instance()
        doc = Instance(e, alg, {"family": "hyperbolic-plane"})
    else:
        return _fail(f"unknown family {name!r}; known: sec93, three-subfield-sha, hyperbolic-plane")
    text = doc.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


# ---------------------------------------------------------------------------
# Search mode


def _instance_hash(doc: Dict[str, Any]) -> str:
    blob = json.dumps(doc, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _search_grid(config: Dict[str, Any]) -> List[Instance]:
    mode = config.get("mode", "three_subfield")
    out: List[Instance] = []
    if mode == "three_subfield":
        lo = int(config.get("min", 17))
        hi = int(config.get("max", 200))
        pairs = []
        cands = [n for n in range(lo, hi, 8)
                 if n % 8 == 1 and _is_squarefree(n)]
        for i, a in enumerate(cands):
            for b in cands[i + 1:]:
                pairs.append((a, b))
        for a, b in pairs:
            try:
                built = three_subfield_bm(a, b)
            except SearchExhausted:
                continue
            out.append(Instance(built.etale, built.algebra,
                                {"family": "three-subfield-sha", "a": a, "b": b}))
    elif mode == "sec93":
        import itertools
        primes = [int(p) for p in config.get("primes", [3, 5, 7, 11, 13])]
        for places in itertools.combinations(primes, 4):
            inst = sec93(places)
            out.append(Instance(inst.etale, inst.algebra,
                                {"family": "sec93", "a": inst.a, "b": inst.b,
                                 "places": list(places)}))
    else:
        raise SchemaError(f"unknown search mode {mode!r}")
    budget = int(config.get("budget", 10 ** 9))
    return out[:budget]


def _is_squarefree(n: int) -> bool:
    from .arith import square_class
    return n > 1 and square_class(n).rep == n


def _search_one(inst: Instance) -> Optional[Dict[str, Any]]:
    verdict = decide(inst.etale, inst.algebra)
    if verdict.outcome.value in ("BrauerManinObstructed", "OrientationIndeterminate"):
        rep = verdict_report(inst, verdict)
        rep["hash"] = _instance_hash(rep["instance"])
        return rep
    return None


def cmd_search(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        config = json.load(fh)
    grid = _search_grid(config)
    workers = int(config.get("workers", args.workers or 1))
    results = []
    if workers > 1:
        import multiprocessing
        with multiprocessing.Pool(workers) as pool:
            for rep in pool.map(_search_one, grid):
                if rep is not None:
                    results.append(rep)
    else:
        checked = 0
        for inst in grid:
            rep = _search_one(inst)
            checked += 1
            if rep is not None:
                results.append(rep)
    # deterministic merge, deduplicated by instance hash
    seen = {}
    for rep in results:
        seen.setdefault(rep["hash"], rep)
    merged = [seen[h] for h in sorted(seen)]
    out_path = config.get("out", args.out)
    if out_path:
        existing = set()
        if os.path.exists(out_path):
            with open(out_path, "r", encoding="utf-8") as fh:
                for line in fh:
                    try:
                        existing.add(json.loads(line)["hash"])
                    except (json.JSONDecodeError, KeyError):
                        pass
        with open(out_path, "a", encoding="utf-8") as fh:
            for rep in merged:
                if rep["hash"] not in existing:
                    fh.write(json.dumps(rep, sort_keys=True) + "\n")
    print(json.dumps({
        "scanned": len(grid),
        "hits": [{"hash": r["hash"], "outcome": r["outcome"]} for r in merged],
    }, indent=2))
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qembed",
        description="decide embeddability of an etale algebra with involution "
                    "into a central simple algebra with involution over Q")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decide", help="run the full pipeline on an instance file")
    p.add_argument("file")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.add_argument("--seed", type=int, default=None, help="echoed into the report")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("sha", help="partition group of the etale side")
    p.add_argument("file")
    p.set_defaults(func=cmd_sha)

    p = sub.add_parser("local", help="single-place embeddability verdict")
    p.add_argument("file")
    p.add_argument("--place", required=True, help="a prime, or 'real'")
    p.set_defaults(func=cmd_local)

    p = sub.add_parser("family", help="emit a named instance file")
    p.add_argument("name")
    p.add_argument("params", nargs="*")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("search", help="scan a parameter grid for obstructed instances")
    p.add_argument("config")
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_search)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, ValidationError, AlgebraError, CaseMismatch,
            PatternBudget, ScanExhausted, SearchExhausted, GuardExceeded) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
