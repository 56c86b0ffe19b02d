"""Max bisection grammar size over T_n under alternative context-split rules.

Each rule swaps the spine split used for contexts; tree cuts are unchanged.
"""

import argparse

import tslpcode.compressor as C
from tslpcode.trees import HOLE, enumerate_trees


def _spine(c):
    path, node = [], c
    while node.left is not None:
        went_left = node.left.holes == 1
        path.append((node, went_left))
        node = node.left if went_left else node.right
    return path


def _cut(path, k):
    v, went_left = path[k - 1]
    return C._rebuild(path[:k], HOLE), (v.left if went_left else v.right)


def _balance(c, weight, total):
    path = _spine(c)
    best_k, best = None, None
    node = c
    for k, (v, went_left) in enumerate(path[:-1], start=1):
        node = v.left if went_left else v.right
        score = abs(total - 2 * weight(node))
        if best is None or score < best:
            best_k, best = k, score
    return _cut(path, best_k)


def holes_as_leaves(c):
    return _balance(c, lambda u: u.size + 1, c.size + 1)


def internal_nodes(c):
    return _balance(c, lambda u: 2 * u.size, 2 * c.size)


def bottom_peel(c):
    path = _spine(c)
    return _cut(path, len(path) - 1)


def spine_midpoint(c):
    path = _spine(c)
    return _cut(path, (len(path) + 1) // 2)


RULES = {"current": C._split_context, "holes": holes_as_leaves, "bottom": bottom_peel,
         "nodes": internal_nodes, "spine": spine_midpoint}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-max", type=int, default=12)
    args = p.parse_args(argv)
    original = C._split_context
    try:
        for name, rule in RULES.items():
            C._split_context = rule
            sizes = [max(C.bisection(t).size for t in enumerate_trees(n)) for n in range(2, args.n_max + 1)]
            print(name, sizes)
    finally:
        C._split_context = original


if __name__ == "__main__":
    main()
