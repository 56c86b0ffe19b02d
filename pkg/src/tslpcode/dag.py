"""Minimal DAGs of binary trees and their conversion to normal-form TSLPs."""

from __future__ import annotations

from dataclasses import dataclass

from .trees import LEAF, Term
from .tslp import APPLY, ARG_RIGHT, G_A, NormalFormTslp, _renumber, _A

__all__ = ["Dag", "build_minimal_dag", "dag_size", "unfold", "dag_to_normal_tslp"]


@dataclass(frozen=True)
class Dag:
    """Rules ``A_i -> f(left, right)``; symbol 0 is the leaf, i >= 1 is A_i.

    Every reference in rule i points to an index > i. No rules means the tree ``a``.
    """

    rules: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for i, (l, r) in enumerate(self.rules):
            for s in (l, r):
                if s != 0 and not i < s < len(self.rules):
                    raise ValueError(f"rule A{i} refers to A{s}")

    def __len__(self) -> int:
        return dag_size(self)


def build_minimal_dag(t: Term) -> Dag:
    if not t.is_tree:
        raise ValueError("DAGs are built for trees, not contexts")
    if t.left is None:
        return Dag(())
    ident: dict[tuple[int, int], int] = {}
    by_node: dict[int, int] = {}   # id(node) -> temp id, skips physically shared subtrees
    pairs: list[tuple[int, int]] = []

    def sym(v: Term) -> int:
        return -1 if v.left is None else by_node[id(v)]

    # left-first postorder, so temporary ids are children-before-parents
    stack = [(t, False)]
    while stack:
        v, ready = stack.pop()
        if v.left is None or id(v) in by_node:
            continue
        if not ready:
            stack.append((v, True))
            stack.append((v.right, False))
            stack.append((v.left, False))
            continue
        key = (sym(v.left), sym(v.right))
        k = ident.get(key)
        if k is None:
            k = ident[key] = len(pairs)
            pairs.append(key)
        by_node[id(v)] = k
    last = len(pairs) - 1
    # reverse the temporary ids: the root becomes A_0 and references point upward

    def index(s: int) -> int:
        return 0 if s < 0 else last - s

    return Dag(tuple((index(l), index(r)) for l, r in reversed(pairs)))


def dag_size(d: Dag) -> int:
    """Number of distinct subtrees: n + 1 for n rules, and 1 for the tree ``a``."""
    return len(d.rules) + 1 if d.rules else 1


def unfold(d: Dag) -> Term:
    if not d.rules:
        return LEAF
    val: list[Term | None] = [None] * len(d.rules)
    for i in range(len(d.rules) - 1, -1, -1):
        l, r = d.rules[i]
        val[i] = Term(LEAF if l == 0 else val[l], LEAF if r == 0 else val[r])
    return val[0]


def dag_to_normal_tslp(d: Dag) -> NormalFormTslp:
    """Each rule f(alpha, beta) becomes N -> C(alpha) with a shared C -> f(x, beta)."""
    if not d.rules:
        return G_A
    rules: dict = {}
    ctx_for: dict = {}

    def sym(s: int):
        return _A if s == 0 else ("N", s)

    for i, (l, r) in enumerate(d.rules):
        beta = sym(r)
        c = ctx_for.get(beta)
        if c is None:
            c = ctx_for[beta] = ("C", len(ctx_for))
            rules[c] = (ARG_RIGHT, (beta,))
        rules[("N", i)] = (APPLY, (c, sym(l)))
    return _renumber(("N", 0), rules)
