"""Command-line entry point: ``cloven verify|batch|cells|nerve``.

Exit status 0 when every requested check passes, 1 when a mathematical check
fails (the witness is printed), 2 for usage, size-guard or I/O errors.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .arity import Arity, SizeGuardError, check_size

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _inputs(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(x) for x in text.split(",") if x.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"inputs must be comma-separated integers, got {text!r}")
    if any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("input counts must be nonnegative")
    return values


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write the document here instead of stdout")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.add_argument("--max-n", type=int, default=None, help="size guard on the number of leaves")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for batch sweeps")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings (not reproducible)")


def _arity_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, required=True, help="number of outputs")
    p.add_argument("--inputs", type=_inputs, required=True, help="comma-separated inputs per output block")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cloven", description="Cell complexes of planar directed trees and their homology.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("verify", help="verify one arity")
    _arity_args(p)
    _common(p)
    p = sub.add_parser("batch", help="verify every arity up to a number of leaves")
    p.add_argument("--max-leaves", type=int, required=True)
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=None)
    _common(p)
    p = sub.add_parser("cells", help="cell census of one arity")
    _arity_args(p)
    p.add_argument("--list-keys", action="store_true", help="also list every cell key")
    _common(p)
    p = sub.add_parser("nerve", help="nerve of the cut classes of one arity")
    _arity_args(p)
    _common(p)
    return parser


def _arity(args: argparse.Namespace) -> Arity:
    if len(args.inputs) != args.k:
        raise ValueError(f"--inputs has {len(args.inputs)} entries but --k is {args.k}")
    return Arity(args.k, args.inputs)


def _cells_document(arity: Arity, args: argparse.Namespace) -> tuple[dict, str]:
    from .chain_complex import build_cell_table

    table = build_cell_table(arity, args.max_n)
    census = table.census()
    doc = {
        "schema": "cloven.cells",
        "version": 1,
        "arity": str(arity),
        "total": len(table),
        "census": {str(s): n for s, n in census.items()},
    }
    lines = [f"{arity}: {len(table)} cells"] + [f"s={s}: {n}" for s, n in census.items()]
    if args.list_keys:
        keys = [table.key(i) for i in range(len(table))]
        doc["keys"] = keys
        lines.extend(keys)
    return doc, "\n".join(lines) + "\n"


def _nerve_document(arity: Arity, args: argparse.Namespace) -> tuple[dict, str]:
    from .cuts_nerve import build_nerve, nerve_homology

    nerve = build_nerve(arity, args.max_n)
    h = nerve_homology(nerve)
    doc = {
        "schema": "cloven.nerve",
        "version": 1,
        "arity": str(arity),
        "vertices": [str(c) for c in nerve.vertices],
        "simplices": nerve.counts(),
        "dimension": nerve.dimension,
        "homology": h.to_record(),
        "facets": [[str(c) for c in f] for f in nerve.facets()],
    }
    betti = " ".join(f"{s}:{b}" for s, b in sorted(h.betti.items()) if b)
    text = (
        f"{arity}: nerve on {len(nerve.vertices)} cut classes, dimension {nerve.dimension}, "
        f"simplices {nerve.counts()}, betti {betti or '0'}\n" + nerve.facet_listing()
    )
    return doc, text


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    from . import koszul_report as kr

    args = build_parser().parse_args(argv)
    try:
        if args.jobs < 1:
            raise ValueError("--jobs must be at least 1")
        status = EXIT_OK
        if args.command == "batch":
            doc = kr.batch(args.max_leaves, args.k_min, args.k_max, args.max_n, args.jobs, args.timings)
            text = kr.render_text(doc)
            status = EXIT_OK if doc["all_pass"] else EXIT_FAILED
        else:
            arity = _arity(args)
            check_size(arity, args.max_n)
            if args.command == "verify":
                doc = kr.single(arity, args.max_n, args.timings)
                text = kr.render_text(doc)
                status = EXIT_OK if doc["all_pass"] else EXIT_FAILED
            elif args.command == "cells":
                doc, text = _cells_document(arity, args)
            else:
                doc, text = _nerve_document(arity, args)
        errors = [r for r in doc.get("reports", []) if "error" in r]
        if errors:
            for r in errors:
                print(f"cloven: {r['error']}", file=sys.stderr)
            status = EXIT_USAGE
        _emit(kr.to_json(doc) if args.format == "structured" else text, args.out)
        return status
    except (ValueError, SizeGuardError, OSError, MemoryError) as exc:
        print(f"cloven: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
