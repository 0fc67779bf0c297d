"""Command line: ``treembed {enumerate,embed,audit,verify} [options]``.

Exit codes: 0 pass, 1 bound or identity violation, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from .audit import EXHAUSTIVE_MAX_DEPTH, ExhaustivePairs, SampledPairs, audit, verify_bounds, worst_pair_row
from .checks import suite_for
from .constructions import CONSTRUCTIONS, build_construction
from .james import MAX_BLOCK, block_depth, parse_theta
from .lp import ISO_MODES
from .tree import MAX_DEPTH, enumerate_nodes, preorder_index


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treembed", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=("enumerate", "embed", "audit", "verify"))
    parser.add_argument("--construction", choices=CONSTRUCTIONS, default="hyperbolic")
    parser.add_argument("--depth", type=int, default=4)
    parser.add_argument("--theta", default="1/1", help="rational in (0, 1], e.g. 9/10")
    parser.add_argument("--p", type=float, default=2.0)
    parser.add_argument("--iso", choices=ISO_MODES, default="identity")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--samples", type=int, default=0, help="0 = exhaustive")
    parser.add_argument("--block", type=int, default=None, help="bourgain block n (default: smallest fitting depth)")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default="-", help="output file ('-' = stdout)")
    parser.add_argument("--format", choices=("json", "jsonl", "csv"), default=None)
    return parser


def _construction(args):
    try:
        theta = parse_theta(args.theta)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"invalid --theta {args.theta!r}: {exc}") from None
    if not 0 <= args.depth <= MAX_DEPTH:
        raise UsageError(f"--depth must be in 0..{MAX_DEPTH}")
    if args.p < 1:
        raise UsageError("--p must be >= 1")
    params = {"depth": args.depth}
    if args.construction == "bourgain":
        block = args.block
        if block is None:
            block = next(n for n in range(MAX_BLOCK + 1) if args.depth <= block_depth(n))
        if not 0 <= block <= MAX_BLOCK or args.depth > block_depth(block):
            raise UsageError(f"--block {block} cannot hold depth {args.depth} (needs depth <= 2^(block+1))")
        params.update(theta=str(theta), block=block)
    elif args.block is not None:
        raise UsageError("--block only applies to --construction bourgain")
    if args.construction == "hyperbolic":
        params["theta"] = str(theta)
    if args.construction == "lp":
        params.update(p=args.p, iso=args.iso, seed=args.seed)
    return build_construction(args.construction, params)


def _source(args):
    if args.samples < 0:
        raise UsageError("--samples must be >= 0")
    if args.samples == 0:
        if args.depth > EXHAUSTIVE_MAX_DEPTH:
            raise UsageError(f"exhaustive mode needs --depth <= {EXHAUSTIVE_MAX_DEPTH}; pass --samples N")
        return ExhaustivePairs(args.depth)
    if args.depth < 1:
        raise UsageError("sampled mode needs --depth >= 1")
    return SampledPairs(args.depth, args.samples, args.seed)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True)


def _enumerate(args) -> tuple[str, int]:
    if not 0 <= args.depth <= MAX_DEPTH:
        raise UsageError(f"--depth must be in 0..{MAX_DEPTH}")
    fmt = args.format or "csv"
    rows = ({"node": str(n), "depth": len(n), "index": preorder_index(n, args.depth)} for n in enumerate_nodes(args.depth))
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["node", "depth", "index"], lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue(), 0
    if fmt == "jsonl":
        return "".join(_dumps(r) + "\n" for r in rows), 0
    return _dumps(list(rows)) + "\n", 0


def _embed(args) -> tuple[str, int]:
    construction = _construction(args)
    fmt = args.format or "jsonl"
    if fmt == "csv":
        raise UsageError("embed writes json or jsonl")
    lines = ({"node": str(n), "blocks": construction.embed_json(n)} for n in enumerate_nodes(args.depth))
    if fmt == "jsonl":
        return "".join(_dumps(r) + "\n" for r in lines), 0
    return _dumps(list(lines)) + "\n", 0


def _report_text(report, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["nodeA", "nodeB", "tree_dist", "embedded_dist", "ratio"],
                                lineterminator="\n")
        writer.writeheader()
        for e in report.worst_pairs:
            writer.writerow(worst_pair_row(e))
        return buf.getvalue()
    return json.dumps(report.to_json(), sort_keys=True, indent=2) + "\n"


def _audit(args) -> tuple[str, int]:
    construction = _construction(args)
    source = _source(args)
    report = audit(construction, source, workers=args.workers)
    fmt = args.format or "json"
    if fmt == "jsonl":
        raise UsageError("audit writes json or csv")
    return _report_text(report, fmt), verify_bounds(report).exit_code


def _verify(args) -> tuple[str, int]:
    construction = _construction(args)
    source = _source(args)
    if args.format not in (None, "json"):
        raise UsageError("verify writes json")
    report = audit(construction, source, workers=args.workers)
    verdict = verify_bounds(report)
    checks = suite_for(construction, seed=args.seed)
    passed = verdict.passed and all(c.passed for c in checks)
    payload = {
        "passed": passed,
        "report": report.to_json(),
        "checks": [c.to_json() for c in checks],
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n", 0 if passed else 1


COMMANDS = {"enumerate": _enumerate, "embed": _embed, "audit": _audit, "verify": _verify}


def run(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.workers < 1:
        print("treembed: error: --workers must be >= 1", file=sys.stderr)
        return 2
    try:
        text, code = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"treembed: error: {exc}", file=sys.stderr)
        return 2
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
