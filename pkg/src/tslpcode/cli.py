"""Command-line driver.

Exit codes: 0 when everything checked passes, 1 when a verification finds a
violation, 2 for usage errors and malformed input.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import harness
from .coder import DecodeError, code_length, dumps, read_container
from .compressor import BudgetExceeded, CompressorId, compress, gamma
from .dag import build_minimal_dag, dag_size
from .harness import EncoderId
from .sources import check_monotone, check_normalized, class_members, parse_source, prob_tree, \
    sample
from .trees import TermSyntaxError, parse_term, serialize_term
from .tslp import evaluate

OK, FINDING, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read_term(args):
    if args.term is not None:
        text = args.term
    elif args.input is not None:
        text = sys.stdin.read() if args.input == "-" else open(args.input).read()
    else:
        raise UsageError("give a tree with --term or an input file")
    try:
        t = parse_term(text)
    except TermSyntaxError as exc:
        raise UsageError(f"malformed tree: {exc}") from None
    if not t.is_tree:
        raise UsageError("expected a tree, found a context")
    return t


def _emit(args, rows):
    if args.csv:
        harness.write_rows(args.csv, rows)


def _csv_value(v) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return repr(v) if isinstance(v, float) else str(v)


def cmd_compress(args) -> int:
    t = _read_term(args)
    g = compress(t, args.algo)
    out = args.output or ((args.input or "tree") + ".tslp")
    data = dumps(g)
    with open(out, "wb") as fh:
        fh.write(data)
    print(f"n={t.size} nonterminals={g.n} size={g.size} bits={code_length(g)} bytes={len(data)} -> {out}")
    return OK


def cmd_decompress(args) -> int:
    try:
        g = read_container(args.input)
    except DecodeError as exc:
        raise UsageError(f"{args.input}: {exc}") from None
    text = serialize_term(evaluate(g))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return OK


def cmd_dag_stats(args) -> int:
    if args.source:
        src = parse_source(args.source)
        trees = [(k, sample(src, args.i, args.seed + k)) for k in range(args.samples)]
    else:
        trees = [(0, _read_term(args))]
    rows = []
    print("sample\tn\tdag_size\tbisection\tdag_route")
    for k, t in trees:
        d = dag_size(build_minimal_dag(t))
        b = compress(t, CompressorId.BISECTION).size
        r = compress(t, CompressorId.DAG_ROUTE).size
        print(f"{k}\t{t.size}\t{d}\t{b}\t{r}")
        for name, value in (("dag_size", d), ("bisection", b), ("dag_route", r)):
            rows.append({"suite": "dag-stats", "source": args.source or "", "encoder": name,
                         "i": args.i if args.source else "", "n": t.size, "mode": "exact",
                         "value": value, "witness_term": serialize_term(t)})
    _emit(args, rows)
    return OK


def cmd_sample(args) -> int:
    src = parse_source(args.source)
    for k in range(args.count):
        print(serialize_term(sample(src, args.i, args.seed + k)))
    return OK


def _class_range(args) -> list[int]:
    if args.i_list:
        return args.i_list
    if args.i_min is None or args.i_max is None:
        raise UsageError("give --i-min and --i-max, or --i-list")
    return list(range(args.i_min, args.i_max + 1))


def cmd_redundancy(args) -> int:
    src = parse_source(args.source)
    rows = []
    print(f"# encoder {args.encoder}" + (" (DAG-route TSLP encoder)" if args.encoder == "dag" else ""))
    print("i\tn_min\tmode\tR\ttrees")
    for i in _class_range(args):
        r = harness.redundancy(args.encoder, src, i, exact=args.exact, samples=args.samples,
                               seed=args.seed, budget=args.budget)
        print(f"{r.i}\t{r.n}\t{r.mode}\t{r.label} {r.value:.6f}\t{r.trees}")
        rows.append(harness.report_row(r))
    _emit(args, rows)
    return OK


def cmd_verify(args) -> int:
    src = parse_source(args.source)
    rows = []
    ok = True
    if args.suite == "domination":
        rep = harness.verify_domination(src, args.n_max)
        print(f"checked {rep.checked}")
        print("n\tsum_lambda\tbound")
        for n in sorted(rep.sums):
            print(f"{n}\t{float(rep.sums[n]):.6f}\t{rep.bounds[n]}")
            rows.append({"suite": "domination", "source": src.name, "i": n, "n": n,
                         "mode": "exact", "value": _csv_value(rep.sums[n])})
        for cond, witness in rep.violations:
            print(f"violation ({cond}): {witness}")
        ok = rep.ok
    elif args.suite == "entropy":
        sizes = args.sizes or ([2 ** k for k in range(6, 15)] if src.kind == "leaf" else list(range(4, 13)))
        rep = harness.verify_entropy_bound(src, args.encoder, sizes, args.samples, args.seed)
        print(f"checked {rep.checked}, skipped {len(rep.skipped)} (m > n), "
              f"violations {len(rep.violations)}, min slack {rep.min_slack}")
        for size, n, m in rep.skipped:
            print(f"skipped size={size} n={n} m={m}")
        for bound, size, tree in rep.violations:
            print(f"violation ({bound}) size={size}: {tree}")
            rows.append({"suite": "entropy", "source": src.name, "encoder": rep.encoder,
                         "i": size, "mode": "sampled", "value": bound, "witness_term": tree})
        ok = rep.ok
    elif args.suite == "normalization":
        bad = check_normalized(src.sigma, args.n_max)
        print(f"sigma normalized up to level {args.n_max}: {bad is None}")
        ok = bad is None
        for i in range(0 if src.kind == "depth" else 1, args.n_max + 1):
            if src.kind == "depth" and i > 4:
                break
            total = sum((prob_tree(src, t) for t in class_members(src, i)), Fraction(0))
            print(f"class {i}: sum P = {total}")
            rows.append({"suite": "normalization", "source": src.name, "i": i, "mode": "exact",
                         "value": _csv_value(total)})
            ok = ok and total == 1
        print(f"monotone up to {args.n_max}: {check_monotone(src.sigma, args.n_max)}")
    print("PASS" if ok else "FAIL")
    _emit(args, rows)
    return OK if ok else FINDING


def cmd_gamma(args) -> int:
    rows = []
    print("n\tgamma\tmode\ttrees")
    for n in range(args.n_min, args.n_max + 1):
        r = gamma(args.algo, n, samples=None if args.exact else args.samples, seed=args.seed,
                  budget=args.budget)
        mode = "exact" if r.exact else "sampled"
        print(f"{n}\t{r.value:.6f}\t{mode}\t{r.trees}")
        rows.append({"suite": "gamma", "encoder": CompressorId(args.algo).value, "i": n, "n": n,
                     "mode": mode, "value": repr(r.value), "witness_term": serialize_term(r.witness)})
    _emit(args, rows)
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tslpcode", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=1 << 20, help="largest class enumerated exhaustively")
    p.add_argument("--csv", metavar="PATH", help="write result rows as CSV")
    sub = p.add_subparsers(dest="command", required=True)

    def tree_input(sp):
        sp.add_argument("input", nargs="?", help="file holding one tree term, or - for stdin")
        sp.add_argument("--term", help="tree term given inline, e.g. 'f(a,a)'")

    sp = sub.add_parser("compress", help="compress a tree into a .tslp container")
    tree_input(sp)
    sp.add_argument("--algo", choices=[c.value for c in CompressorId], default="bisection")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_compress)

    sp = sub.add_parser("decompress", help="restore the tree from a .tslp container")
    sp.add_argument("input")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_decompress)

    sp = sub.add_parser("dag-stats", help="DAG and grammar sizes of a tree or of sampled trees")
    tree_input(sp)
    sp.add_argument("--source")
    sp.add_argument("--i", type=int, default=0, help="class index for sampled trees")
    sp.add_argument("--samples", type=int, default=1)
    sp.set_defaults(func=cmd_dag_stats)

    sp = sub.add_parser("sample", help="draw trees from a source")
    sp.add_argument("--source", required=True)
    sp.add_argument("--i", type=int, required=True)
    sp.add_argument("--count", type=int, default=1)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("redundancy", help="worst-case redundancy per class")
    sp.add_argument("--source", required=True)
    sp.add_argument("--encoder", choices=[e.value for e in EncoderId], default="tslp")
    sp.add_argument("--i-min", type=int)
    sp.add_argument("--i-max", type=int)
    sp.add_argument("--i-list", type=int, nargs="+")
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--samples", type=int, default=1000)
    sp.set_defaults(func=cmd_redundancy)

    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("--suite", choices=["domination", "entropy", "normalization"], required=True)
    sp.add_argument("--source", required=True)
    sp.add_argument("--encoder", choices=[e.value for e in EncoderId], default="tslp")
    sp.add_argument("--n-max", type=int, default=8)
    sp.add_argument("--sizes", type=int, nargs="+")
    sp.add_argument("--samples", type=int, default=100)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("gamma", help="grammar size ratio max |G_t| / n")
    sp.add_argument("--algo", choices=[c.value for c in CompressorId], default="bisection")
    sp.add_argument("--n-min", type=int, default=1)
    sp.add_argument("--n-max", type=int, required=True)
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--samples", type=int, default=1000)
    sp.set_defaults(func=cmd_gamma)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, BudgetExceeded, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
