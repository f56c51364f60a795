"""Command-line entry point.

Exit codes: 0 success, 2 malformed input, 3 semantic rejection, 4 hyperbox
relation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Sequence

import numpy as np

from . import __version__
from .cupcomplex import homology_rank, kernel_containment_check
from .cupform import LinkModel, ThreeForm, complexity, free_part, load_json, reduction_trace
from .errors import RelationError, SchemaError, SemanticError
from .hypercube import HyperboxComplex, check_relations, compress, total_complex
from .specseq import collapse_check, from_hypercube, pages
from .surgery import ModelKnotComplex, knot_surgery_complex

EXIT_OK, EXIT_SCHEMA, EXIT_SEMANTIC, EXIT_RELATION = 0, 2, 3, 4
RINGS = {"f2": ("F2",), "q": ("Q",), "both": ("F2", "Q")}


def _read(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}") from None
    return load_json(text)


def _emit(obj: dict[str, Any], fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(obj, indent=2) + "\n")
        return
    for line in _text_lines(obj):
        out.write(line + "\n")


def _text_lines(obj: Any, prefix: str = "") -> list[str]:
    lines = []
    for key, val in obj.items():
        if isinstance(val, dict):
            lines.append(f"{prefix}{key}:")
            lines.extend(_text_lines(val, prefix + "  "))
        elif isinstance(val, list) and val and isinstance(val[0], dict):
            lines.append(f"{prefix}{key}:")
            for item in val:
                lines.append(f"{prefix}  - " + ", ".join(f"{k}={json.dumps(v)}" for k, v in item.items()))
        else:
            lines.append(f"{prefix}{key}: {json.dumps(val)}")
    return lines


def _load_form(args) -> ThreeForm:
    if args.random is not None:
        if args.input is not None:
            raise SchemaError("give either an input file or --random, not both")
        return ThreeForm.random(np.random.default_rng(args.seed), args.random)
    if args.input is None:
        raise SchemaError("an input file is required")
    link = LinkModel.from_json_obj(_read(args.input))
    if not link.homologically_split:
        raise SemanticError("linking data is not homologically split; the cup complex needs zero pairwise linking")
    return link.milnor


def cmd_cup(args) -> tuple[int, dict[str, Any]]:
    mu = _load_form(args)
    if args.check:
        return EXIT_OK, {"valid": True, "ell": mu.ell, "complexity": complexity(mu)}
    report = homology_rank(mu, RINGS[args.ring])
    out = {"ell": mu.ell, **report.to_json_obj()}
    if args.random is not None:
        out["form"] = mu.to_json_obj()
    return EXIT_OK, out


def cmd_surgery_knot(args) -> tuple[int, dict[str, Any]]:
    knot = ModelKnotComplex.from_json_obj(_read(args.input))
    if args.check:
        return EXIT_OK, {"valid": True, "generators": knot.rank}
    sl = knot_surgery_complex(knot, args.framing, S=args.truncation)
    return EXIT_OK, sl.to_json_obj()


def _hypercube_report(h: HyperboxComplex, max_page: int | None) -> dict[str, Any]:
    fc = from_hypercube(total_complex(h))
    report = collapse_check(fc, 1)
    upto = max(max_page or 0, report.collapse_page, fc.depth + 1)
    seq = pages(fc, upto)
    shown = seq[: max_page] if max_page else seq
    nonzero = set(report.nonzero_pages)
    return {
        "pages": [
            {"r": pg.r, "dims": [pg.dims()[p] for p in pg.levels], "total": pg.total_dim, "d_rank": pg.d_rank()}
            for pg in shown
        ],
        "d1_zero": 1 not in nonzero,
        "d2_zero": 2 not in nonzero,
        "nonzero_differentials": sorted(nonzero),
        "collapse_page": report.collapse_page,
        "e_infinity": report.e_infinity,
        "total_homology": report.total_homology,
        "agree": report.e_infinity == report.total_homology,
    }


def cmd_hypercube(args) -> tuple[int, dict[str, Any]]:
    h = HyperboxComplex.from_json_obj(_read(args.input))
    bad = check_relations(h)
    out: dict[str, Any] = {
        "size": list(h.size),
        "relations": {"ok": not bad, "violations": [v.to_json_obj() for v in bad]},
    }
    if bad:
        return EXIT_RELATION, out
    if args.check:
        return EXIT_OK, out
    if not h.is_hypercube:
        h = compress(h)
        out["compressed"] = True
    out.update(_hypercube_report(h, args.pages))
    return EXIT_OK, out


def _ledger(node) -> list[dict[str, Any]]:
    rows = []
    for nd in node.walk():
        mu = nd.form
        row: dict[str, Any] = {"kind": nd.kind, "complexity": complexity(mu), "rank_f2": homology_rank(mu, ("F2",)).rank_f2}
        if nd.kind == "connect_sum":
            rest, isolated = (c.form for c in nd.children)
            r = nd.index
            mu2 = ThreeForm(mu.ell, {**free_part(mu, r).triples, **isolated.triples})
            rep = kernel_containment_check(rest, mu2, r)
            row.update(
                index=r,
                psi_check=rep.holds,
                homology_dim=rep.homology_dim,
                cone_rank_psi=rep.cone_rank_psi,
                bound_holds=rep.cone_rank_psi >= row["rank_f2"],
            )
        elif nd.kind == "disjoint":
            a, b = (homology_rank(c.form, ("F2",)).rank_f2 for c in nd.children)
            row["multiplicative"] = a * b == row["rank_f2"] << mu.ell
        rows.append(row)
    return rows


def cmd_reduce(args) -> tuple[int, dict[str, Any]]:
    mu = _load_form(args)
    tree = reduction_trace(mu)
    if args.check:
        return EXIT_OK, {"valid": True, "complexity": complexity(mu)}
    ledger = _ledger(tree)
    checks = all(
        row.get("psi_check", True) and row.get("bound_holds", True) and row.get("multiplicative", True) for row in ledger
    )
    leaves = [complexity(leaf.form) for leaf in tree.leaves()]
    return EXIT_OK, {
        "tree": tree.to_json_obj(),
        "depth": tree.depth(),
        "leaf_complexities": leaves,
        "leaves_ok": all(c <= 1 for c in leaves),
        "ledger": ledger,
        "all_checks_pass": checks,
    }


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized inputs")
    common.add_argument("--check", action="store_true", help="validate the input and stop")

    parser = argparse.ArgumentParser(prog="cuphom", description="Cup homology and hypercube spectral sequence tools")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cup", parents=[common], help="homology rank of the cup complex of a 3-form")
    p.add_argument("input", nargs="?")
    p.add_argument("--ring", choices=tuple(RINGS), default="both")
    p.add_argument("--random", type=int, metavar="ELL", help="use a random form on ELL generators")
    p.set_defaults(func=cmd_cup)

    p = sub.add_parser("surgery-knot", parents=[common], help="ranks of the n-surgery mapping cone of a model knot")
    p.add_argument("input")
    p.add_argument("-n", "--framing", type=int, required=True)
    p.add_argument("--truncation", type=int, metavar="S")
    p.set_defaults(func=cmd_surgery_knot)

    p = sub.add_parser("hypercube", parents=[common], help="relations and spectral sequence of a hypercube")
    p.add_argument("input")
    p.add_argument("--pages", type=int, metavar="R", help="report pages E_1..E_R")
    p.set_defaults(func=cmd_hypercube)

    p = sub.add_parser("reduce", parents=[common], help="complexity reduction trace of a 3-form")
    p.add_argument("input", nargs="?")
    p.add_argument("--random", type=int, metavar="ELL", help="use a random form on ELL generators")
    p.set_defaults(func=cmd_reduce)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SCHEMA if exc.code else EXIT_OK
    if getattr(args, "pages", None) is not None and args.pages < 1:
        print("error: --pages must be at least 1", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        code, out = args.func(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except RelationError as exc:
        print(f"relation failure: {exc}", file=sys.stderr)
        return EXIT_RELATION
    except SemanticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    _emit(out, args.format, sys.stdout)
    if code == EXIT_RELATION:
        print("relation failure: see violations", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
