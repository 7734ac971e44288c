"""Command-line front end.

Exit codes: 0 computed/true, 1 computed/false or infeasible, 2 input error,
3 resource limit reached (outcome unknown). Results go to stdout as JSON,
diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import display, oracle, search
from .construct import build_network
from .dot import to_dot
from .forkops import ForkPickingSequence
from .model import InputError, PhyloNetwork, PhyloTree
from .netcheck import temporal_labelling, validate
from .newick import parse_network, parse_tree, read_any, serialize

EXIT_TRUE, EXIT_FALSE, EXIT_INPUT, EXIT_UNKNOWN = 0, 1, 2, 3

# exhaustive searches above these caps print a cost warning
WEAK_CAP_DEFAULT = 2
TEMPORAL_CAP_DEFAULT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_INPUT)


def _read_text(source: str) -> str:
    text = source.strip()
    if text.endswith(";"):
        return text
    try:
        with open(source, encoding="utf-8") as fh:
            return fh.read().strip()
    except OSError as exc:
        raise InputError(f"cannot read {source!r}: {exc.strerror}") from None


def _tree(source: str) -> PhyloTree:
    return parse_tree(_read_text(source))


def _network(source: str, strict: bool = True) -> PhyloNetwork:
    return parse_network(_read_text(source), strict=strict)


def _sequence(source: str) -> ForkPickingSequence:
    try:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {source!r}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = text.replace(",", " ").split()
    if isinstance(data, dict) and "witness" in data:
        data = data["witness"]
    try:
        return ForkPickingSequence.from_json(data)
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed sequence file {source!r}") from exc


class _Out:
    def __init__(self, path: Optional[str]):
        self.path = path

    def write(self, text: str):
        if self.path:
            with open(self.path, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)

    def json(self, obj):
        self.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args, out: _Out) -> int:
    net = _network(args.net, strict=False)
    report = validate(net)
    res = report.to_json()
    res["h"] = net.h
    res["leaves"] = len(net.labels)
    if report.is_temporal:
        res["times"] = {str(v): t for v, t in sorted(temporal_labelling(net).items())}
    out.json(res)
    return EXIT_TRUE if report.is_valid_network else EXIT_FALSE


def cmd_check(args, out: _Out) -> int:
    if args.mode == "rigid":
        if len(args.inputs) != 3:
            raise InputError("check --rigid needs T1 T2 NET")
        t1, t2, net = _tree(args.inputs[0]), _tree(args.inputs[1]), _network(args.inputs[2])
        maps = display.rigidly_displays(net, t1, t2)
        res = {"mode": "rigid", "result": maps is not None}
        if maps is not None:
            res["maps"] = [maps[0].to_json(t1), maps[1].to_json(t2)]
            gamma = display.pair_gamma(maps[0], maps[1], net)
            res["gamma"] = {str(v): g for v, g in sorted(gamma.items())}
        out.json(res)
        return EXIT_TRUE if maps is not None else EXIT_FALSE
    if len(args.inputs) != 2:
        raise InputError(f"check --{args.mode} needs TREE NET")
    tree, net = _tree(args.inputs[0]), _network(args.inputs[1])
    if args.mode == "weak":
        dm = display.weak_display_map(tree, net)
        res = {"mode": "weak", "result": dm is not None}
        if dm is not None:
            res["map"] = dm.to_json(tree)
    else:
        res = {"mode": "display", "result": display.displays(tree, net)}
    out.json(res)
    return EXIT_TRUE if res["result"] else EXIT_FALSE


def _search_exit(result: search.SearchResult) -> int:
    if result.optimum == search.UNKNOWN:
        return EXIT_UNKNOWN
    return EXIT_TRUE if result.feasible else EXIT_FALSE


def _oracle(t1: PhyloTree, t2: PhyloTree, quantity: str, cap: Optional[int], out: _Out) -> int:
    default = WEAK_CAP_DEFAULT if quantity == "h_wd" else TEMPORAL_CAP_DEFAULT
    if cap is None:
        cap = default
    if quantity == "h_wd" and cap >= 2 and len(t1.leaves) >= 6:
        print("warning: exhaustive search over general networks with two reticulations "
              "on six leaves can take tens of minutes", file=sys.stderr)
    cert = oracle.brute_hybrid(t1, t2, quantity, cap)
    out.json(cert.to_json())
    return EXIT_TRUE if isinstance(cert.value, int) else EXIT_UNKNOWN


def cmd_hybrid(args, out: _Out) -> int:
    t1, t2 = _tree(args.t1), _tree(args.t2)
    if args.mode == "weak":
        return _oracle(t1, t2, "h_wd", args.cap, out)
    if args.oracle:
        return _oracle(t1, t2, "h_r" if args.mode == "rigid" else "h_t", args.cap, out)
    solve = (search.min_weight_fork_picking if args.mode == "rigid"
             else search.min_weight_cherry_picking)
    result = solve(t1, t2, time_limit=args.timeout)
    res = result.to_json()
    res["quantity"] = "h_r" if args.mode == "rigid" else "h_t"
    out.json(res)
    return _search_exit(result)


def cmd_sequence(args, out: _Out) -> int:
    t1, t2 = _tree(args.t1), _tree(args.t2)
    solve = (search.min_weight_fork_picking if args.mode == "fork"
             else search.min_weight_cherry_picking)
    result = solve(t1, t2, time_limit=args.timeout)
    out.json(result.to_json())
    return _search_exit(result)


def cmd_construct(args, out: _Out) -> int:
    t1, t2 = _tree(args.t1), _tree(args.t2)
    trace = build_network(t1, t2, _sequence(args.seq))
    if args.enwk:
        with open(args.enwk, "w", encoding="utf-8") as fh:
            fh.write(serialize(trace.network) + "\n")
    out.json(trace.to_json())
    return EXIT_TRUE


def cmd_extract(args, out: _Out) -> int:
    net, t1, t2 = _network(args.net), _tree(args.t1), _tree(args.t2)
    try:
        seq = search.extract_fork_picking(net, t1, t2)
    except search.ExtractionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FALSE
    out.json(seq.to_json())
    return EXIT_TRUE


def cmd_gen_thmbig(args, out: _Out) -> int:
    fam = oracle.gap_family(args.m)
    out.json({
        "m": fam.m,
        "t": fam.t.newick(),
        "t_prime": fam.t_prime.newick(),
        "network": serialize(fam.network),
        "witness": fam.witness.to_json(),
    })
    return EXIT_TRUE


def cmd_dot(args, out: _Out) -> int:
    out.write(to_dot(read_any(args.input), name=args.name))
    return EXIT_TRUE


def cmd_enumerate(args, out: _Out) -> int:
    if args.labels.isdigit():
        labels = [str(i) for i in range(1, int(args.labels) + 1)]
    else:
        labels = args.labels.split(",")
    if args.what == "trees":
        items = (t.newick() for t in oracle.enumerate_trees(labels))
    else:
        items = (serialize(n) for n in oracle.enumerate_networks(labels, args.h, args.cls))
    if args.count_only:
        out.write(f"{sum(1 for _ in items)}\n")
    else:
        out.write("".join(f"{s}\n" for s in items))
    return EXIT_TRUE


# ---------------------------------------------------------------------------
# wiring


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="forkpick", description="Rigid, temporal and weak hybrid numbers of tree pairs.")
    p.add_argument("--jobs", type=int, default=1, help="worker count (solvers currently run sequentially)")
    p.add_argument("-o", "--output", help="write the result here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", help="check network invariants and class membership")
    s.add_argument("net")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("check", help="display predicates")
    mode = s.add_mutually_exclusive_group(required=True)
    for name in ("weak", "display", "rigid"):
        mode.add_argument(f"--{name}", dest="mode", action="store_const", const=name)
    s.add_argument("inputs", nargs="+", help="TREE NET, or T1 T2 NET with --rigid")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("hybrid", help="rigid (h_r), temporal (h_t) or weak (h_wd) hybrid number")
    mode = s.add_mutually_exclusive_group(required=True)
    for name in ("rigid", "temporal", "weak"):
        mode.add_argument(f"--{name}", dest="mode", action="store_const", const=name)
    s.add_argument("t1")
    s.add_argument("t2")
    s.add_argument("--cap", type=int, help="reticulation cap for exhaustive network search")
    s.add_argument("--timeout", type=float, help="seconds before giving up with 'unknown'")
    s.add_argument("--oracle", action="store_true",
                   help="use exhaustive network enumeration instead of sequence search")
    s.set_defaults(func=cmd_hybrid)

    s = sub.add_parser("sequence", help="optimal fork-picking or cherry-picking sequence")
    s.add_argument("t1")
    s.add_argument("t2")
    s.add_argument("--mode", choices=("fork", "cherry"), default="fork")
    s.add_argument("--timeout", type=float)
    s.set_defaults(func=cmd_sequence)

    s = sub.add_parser("construct", help="network from a fork-picking sequence")
    s.add_argument("t1")
    s.add_argument("t2")
    s.add_argument("--seq", required=True, help="JSON sequence or whitespace-separated oK(leaf) ops")
    s.add_argument("--enwk", help="also write the network as extended Newick")
    s.set_defaults(func=cmd_construct)

    s = sub.add_parser("extract", help="fork-picking sequence from a temporal tree-child network")
    s.add_argument("net")
    s.add_argument("t1")
    s.add_argument("t2")
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("gen-thmbig", help="tree pair with a large temporal/rigid gap")
    s.add_argument("--m", type=int, required=True)
    s.set_defaults(func=cmd_gen_thmbig)

    s = sub.add_parser("dot", help="Graphviz rendering of a tree or network")
    s.add_argument("input")
    s.add_argument("--name", default="G")
    s.set_defaults(func=cmd_dot)

    s = sub.add_parser("enumerate", help="list trees or networks on a leaf set")
    s.add_argument("what", choices=("trees", "networks"))
    s.add_argument("labels", help="a leaf count, or comma-separated labels")
    s.add_argument("--h", type=int, default=0)
    s.add_argument("--class", dest="cls", choices=oracle.CLASSES, default="general")
    s.add_argument("--count-only", action="store_true")
    s.set_defaults(func=cmd_enumerate)
    return p


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    out = _Out(args.output)
    try:
        return args.func(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except search.NodeLimitReached:
        print("search limit reached", file=sys.stderr)
        out.json({"optimum": search.UNKNOWN})
        return EXIT_UNKNOWN


def main(argv: Optional[Sequence[str]] = None) -> None:
    try:
        code = run(argv)
    except SystemExit as exc:  # argparse exits
        code = exc.code if isinstance(exc.code, int) else EXIT_INPUT
    sys.exit(code)
