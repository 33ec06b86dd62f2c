"""Command line entry point: ``treecipher <command> ...``.

Exit codes: 0 success (or isomorphic), 1 not isomorphic, 2 usage or IO
error, 3 unknown verdict (step limit reached).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import analytics
from .bench import BENCH_HEADER, bench_rows, parse_range, summarize, worker_count
from .dag import Dag, MalformedDagError, compress, dag_stats, decompress
from .dagrw import DagRw, compress_rw, decompress_rw, rw_stats
from .miner import mine, table_summary
from .solver import IsoResult, Verdict, find_isomorphism, is_ciphering_isomorphic
from .synthgen import GenerationFailure, GenSpec, gen_pair
from .tree import TreeSyntaxError, load_tree, read_dataset, serialize_tree

EXIT_OK, EXIT_NOT_ISO, EXIT_USAGE, EXIT_UNKNOWN = 0, 1, 2, 3
RELATIONS = ("topo", "label", "cipher")


class UsageError(Exception):
    pass


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _read_tree(path: str):
    return load_tree(_read_text(path))


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False) + "\n"


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# -- commands ---------------------------------------------------------------


def cmd_iso(args) -> int:
    t1, t2 = _read_tree(args.a), _read_tree(args.b)
    if args.relation == "cipher":
        res = is_ciphering_isomorphic(t1, t2, step_limit=args.step_limit)
    else:
        mapping = find_isomorphism(t1, t2, args.relation)
        if mapping is None:
            res = IsoResult(Verdict.NOT_ISOMORPHIC)
        else:
            cipher = {a: a for a in t1.alphabet()} if args.relation == "label" else None
            res = IsoResult(Verdict.ISOMORPHIC, mapping, cipher)
    _write(None, _dump(res.to_json(with_trace=args.trace is not None)))
    if args.trace is not None and res.trace is not None:
        _write(args.trace, _dump(res.trace.to_json()))
    return {Verdict.ISOMORPHIC: EXIT_OK, Verdict.NOT_ISOMORPHIC: EXIT_NOT_ISO, Verdict.UNKNOWN: EXIT_UNKNOWN}[
        res.verdict
    ]


def _compress(t, relation: str, step_limit):
    if relation == "cipher":
        return compress_rw(t, step_limit)
    return compress(t, relation)


def cmd_compress(args) -> int:
    d = _compress(_read_tree(args.input), args.relation, args.step_limit)
    _write(args.out, _dump(d.to_json()))
    if args.dot:
        _write(args.dot, d.to_dot())
    return EXIT_OK


def _load_dag(path: str):
    try:
        obj = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise MalformedDagError(f"not JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise MalformedDagError("DAG JSON must be an object")
    if obj.get("relation") == "cipher":
        return DagRw.from_json(obj)
    return Dag.from_json(obj)


def cmd_decompress(args) -> int:
    d = _load_dag(args.input)
    t = decompress_rw(d) if isinstance(d, DagRw) else decompress(d)
    _write(args.out, serialize_tree(t) + "\n")
    return EXIT_OK


def cmd_mine(args) -> int:
    trees = read_dataset(args.dataset)
    if not trees:
        raise UsageError("dataset is empty")
    report = mine(trees, args.relation, args.min_support, args.step_limit)
    obj = report.to_json()
    if args.summary:
        obj["summary"] = table_summary(trees, args.min_support, args.step_limit)
    if args.csv:
        _write(args.csv, _csv_text(["pattern", "size", "frequency", "origin_count"], report.csv_rows()))
    if args.format == "csv" and args.out is None:
        _write(None, _csv_text(["pattern", "size", "frequency", "origin_count"], report.csv_rows()))
    else:
        _write(args.out, _dump(obj))
    return EXIT_OK


def cmd_gen(args) -> int:
    spec = GenSpec(args.nodes, args.label_prop, args.seed, args.pair)
    try:
        t1, t2 = gen_pair(spec, args.max_retries)
    except GenerationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _write(f"{args.out}.1.tree", serialize_tree(t1) + "\n")
    if t2 is not None:
        _write(f"{args.out}.2.tree", serialize_tree(t2) + "\n")
    return EXIT_OK


def cmd_bench(args) -> int:
    sizes = parse_range(args.sizes, int)
    props = parse_range(args.props, float)
    if args.reps < 0:
        raise UsageError("--reps must be >= 0")
    rows = []
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w", encoding="utf-8", newline="")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(BENCH_HEADER)
        for row in bench_rows(sizes, props, args.reps, args.seed, args.pair, args.step_limit, worker_count()):
            w.writerow(row.as_list())
            rows.append(row)
    finally:
        if out is not sys.stdout:
            out.close()
    if args.summary:
        _write(args.summary, _dump(summarize(rows)))
    return EXIT_OK


def _parse_f(text: str) -> list[tuple[int, int]]:
    pairs = []
    for item in text.split(","):
        n, _, a = item.strip().partition(":")
        pairs.append((int(n), int(a) if a else 1))
    return pairs


def cmd_model(args) -> int:
    if args.a_n is not None:
        value = analytics.a_n(args.a_n)
    elif args.f is not None:
        value = analytics.f_variadic(_parse_f(args.f))
    elif args.delta is not None:
        value = analytics.delta_f(*args.delta)
    else:
        value = analytics.state_bound(args.state_bound)
    print(value)
    return EXIT_OK


def cmd_stats(args) -> int:
    t = _read_tree(args.input)
    d = _compress(t, args.relation, args.step_limit)
    stats = rw_stats(d) if isinstance(d, DagRw) else dag_stats(d)
    stats = {"relation": args.relation, "tree_size": len(t), **stats}
    if args.format == "csv":
        _write(None, _csv_text(list(stats), [list(stats.values())]))
    else:
        _write(None, _dump(stats))
    return EXIT_OK


def cmd_convert(args) -> int:
    t = _read_tree(args.input)
    if args.to == "json":
        text = json.dumps(t.to_nested(), ensure_ascii=False) + "\n"
    else:
        text = serialize_tree(t) + "\n"
    _write(args.out, text)
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treecipher", description=__doc__.splitlines()[0])
    parser.add_argument("--format", choices=("json", "csv"), default="json", help="stdout format where applicable")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("iso", help="test two trees for isomorphism")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--relation", choices=RELATIONS, default="cipher")
    p.add_argument("--step-limit", type=_positive_int)
    p.add_argument("--trace", metavar="OUT.json", help="write the search trace here")
    p.set_defaults(func=cmd_iso)

    p = sub.add_parser("compress", help="compress a tree into a DAG")
    p.add_argument("input")
    p.add_argument("--relation", choices=RELATIONS, default="cipher")
    p.add_argument("--out")
    p.add_argument("--dot", metavar="OUT.dot")
    p.add_argument("--step-limit", type=_positive_int)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="rebuild a tree from DAG JSON")
    p.add_argument("input")
    p.add_argument("--out")
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("mine", help="frequent subtree patterns of a dataset")
    p.add_argument("dataset")
    p.add_argument("--relation", choices=RELATIONS, default="cipher")
    p.add_argument("--min-support", type=float, default=0.05)
    p.add_argument("--out")
    p.add_argument("--csv", metavar="OUT.csv")
    p.add_argument("--summary", action="store_true", help="add pattern counts for all relations")
    p.add_argument("--step-limit", type=_positive_int)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("gen", help="generate a random tree or tree pair")
    p.add_argument("--nodes", type=_positive_int, required=True)
    p.add_argument("--label-prop", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--pair", choices=("iso", "noniso", "single"), default="single")
    p.add_argument("--max-retries", type=_positive_int, default=100)
    p.add_argument("--out", required=True, metavar="PREFIX")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="time the solver on a grid of random pairs")
    p.add_argument("--sizes", required=True, help="start:stop:step (inclusive) or a comma list")
    p.add_argument("--props", required=True, help="start:stop:step (inclusive) or a comma list")
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--pair", choices=("iso", "noniso"), default="iso")
    p.add_argument("--step-limit", type=_positive_int)
    p.add_argument("--out", help="CSV rows (default stdout)")
    p.add_argument("--summary", metavar="OUT.json", help="per-(n, p) quantiles")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("model", help="evaluate the backtracking size model")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--a-n", type=_positive_int, metavar="N")
    g.add_argument("--f", metavar="n:a,n:a,...")
    g.add_argument("--delta", type=int, nargs=4, metavar=("M", "N", "ALPHA", "BETA"))
    g.add_argument("--state-bound", type=_positive_int, metavar="N")
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("stats", help="compression statistics of a tree")
    p.add_argument("input")
    p.add_argument("--relation", choices=RELATIONS, default="cipher")
    p.add_argument("--step-limit", type=_positive_int)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("convert", help="convert between text and JSON tree forms")
    p.add_argument("input")
    p.add_argument("--to", choices=("json", "text"), required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, TreeSyntaxError, MalformedDagError, UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
