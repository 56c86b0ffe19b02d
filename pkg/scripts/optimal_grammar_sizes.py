"""Smallest normal-form grammar size per tree, by branch and bound, for all of T_n.

Every nonterminal of a normal-form grammar for t derives a subtree or a
subcontext of t, so a grammar is a set of pieces closed under the chosen
splits:

    tree        -> context(tree)         cost 2 (any non-root cut point)
    context     -> f(x, arg) / f(arg, x) cost 1 (hole below the root)
    context     -> upper(lower)          cost 2 (any split of the hole path)

Shared pieces are paid for once. The bisection result seeds the bound.
Reports max over T_n of the optimum, i.e. gamma for an ideal compressor.
"""

import argparse
import functools
import time
from dataclasses import dataclass

from tslpcode.compressor import _rebuild, bisection
from tslpcode.trees import HOLE, enumerate_trees, serialize_term


@dataclass
class Config:
    n_min: int = 2
    n_max: int = 9


def _positions(t):
    out, stack = [], [(t, ())]
    while stack:
        v, path = stack.pop()
        if v.left is None:
            continue
        for child, went_left in ((v.left, True), (v.right, False)):
            q = path + ((v, went_left),)
            out.append((q, child))
            stack.append((child, q))
    return out


@functools.lru_cache(None)
def tree_splits(t):
    return tuple((_rebuild(list(p), HOLE), c) for p, c in _positions(t))


@functools.lru_cache(None)
def context_splits(c):
    """(splits, None) for a deep hole, (None, arg) when the hole is a child of the root."""
    path, node = [], c
    while node.left is not None:
        went_left = node.left.holes == 1
        path.append((node, went_left))
        node = node.left if went_left else node.right
    if len(path) == 1:
        v, went_left = path[0]
        return None, (v.right if went_left else v.left)
    out = []
    for k in range(1, len(path)):
        v, went_left = path[k - 1]
        out.append((_rebuild(path[:k], HOLE), v.left if went_left else v.right))
    return tuple(out), None


def _lower_bound(x):
    if x.left is None:
        return 0
    if x.holes and context_splits(x)[0] is None:
        return 1
    return 2


def _needs_rule(y):
    return y.left is not None


def optimum(t, bound):
    best = [bound + 1]

    def rec(defined, pending, cost):
        if cost + sum(map(_lower_bound, pending)) >= best[0]:
            return
        if not pending:
            best[0] = cost
            return
        x = max(pending, key=lambda p: (p.size, p.holes))
        rest, done = pending - {x}, defined | {x}
        if x.holes:
            splits, arg = context_splits(x)
            if splits is None:
                new = {arg} if _needs_rule(arg) and arg not in done else set()
                rec(done, rest | new, cost + 1)
                return
        else:
            splits = tree_splits(x)
        options = []
        for a, b in splits:
            new = {y for y in (a, b) if _needs_rule(y) and y not in done}
            options.append((sum(map(_lower_bound, new - rest)), new))
        options.sort(key=lambda o: o[0])
        for _, new in options:
            rec(done, rest | new, cost + 2)

    if t.left is None:
        return 1
    rec(frozenset(), frozenset({t}), 0)
    return best[0]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-min", type=int, default=Config.n_min)
    p.add_argument("--n-max", type=int, default=Config.n_max)
    cfg = Config(**vars(p.parse_args(argv)))
    print("n\tmax_optimum\tratio\tmax_bisection\tworst_tree\tseconds")
    for n in range(cfg.n_min, cfg.n_max + 1):
        start = time.perf_counter()
        worst, witness, worst_b = 0, None, 0
        for t in enumerate_trees(n):
            b = bisection(t).size
            worst_b = max(worst_b, b)
            o = optimum(t, b)
            if o > worst:
                worst, witness = o, t
        print(f"{n}\t{worst}\t{worst / n:.4f}\t{worst_b}\t{serialize_term(witness)}\t"
              f"{time.perf_counter() - start:.1f}", flush=True)


if __name__ == "__main__":
    main()
