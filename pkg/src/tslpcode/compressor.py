"""Grammar-based tree compressors producing normal-form TSLPs.

``bisection`` cuts every piece (a tree or a one-hole context) into two
smaller pieces and gives every distinct piece its own nonterminal:

* a tree of size s is cut at the non-root node u whose subtree size is
  closest to s/2 (first in preorder on ties), giving the context "tree with
  t[u] replaced by x" and the subtree t[u];
* a context whose hole is a child of the root is the single rule
  f(alpha, x) or f(x, alpha) over the remaining subtree;
* any other context is cut at the spine node closest to an even split of its
  a-leaves (topmost on ties) into an upper and a lower context.

Pieces are memoized by structural equality, so repeated pieces share one
nonterminal. The cut only depends on the piece itself, which keeps equal
pieces on equal rules and the output deterministic.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass

from .dag import build_minimal_dag, dag_to_normal_tslp
from .sources import build_tree
from .trees import HOLE, Term, catalan, enumerate_trees
from .tslp import APPLY, ARG_LEFT, ARG_RIGHT, COMPOSE, G_A, NormalFormTslp, _A, _renumber

__all__ = ["CompressorId", "compress", "bisection", "dag_route", "gamma", "GammaResult",
           "BudgetExceeded", "uniform_tree"]


class CompressorId(str, enum.Enum):
    BISECTION = "bisection"
    DAG_ROUTE = "dag"


class BudgetExceeded(RuntimeError):
    pass


def _tree_cut(t: Term) -> tuple[list[tuple[Term, bool]], Term]:
    """Path to and the non-root node u minimizing |s - 2|t[u]||, first in preorder.

    Below a node of size <= s/2 every score is worse, so the preorder walk only
    descends into nodes heavier than s/2; at most one child per level is.
    """
    s = t.size
    best, best_score, best_path = None, None, None
    stack = [(t.right, (t, False), None), (t.left, (t, True), None)]
    while stack:
        node, step, parent = stack.pop()
        path = (step, parent)
        score = abs(s - 2 * node.size)
        if best_score is None or score < best_score:
            best, best_score, best_path = node, score, path
        if node.left is not None and 2 * node.size > s:
            stack.append((node.right, (node, False), path))
            stack.append((node.left, (node, True), path))
    steps = []
    while best_path is not None:
        steps.append(best_path[0])
        best_path = best_path[1]
    steps.reverse()
    return steps, best


class _Bisection:
    def __init__(self):
        self.rules: dict = {}
        self.tree_ids: dict[Term, object] = {}
        self.ctx_ids: dict[Term, object] = {}

    def tree(self, t: Term):
        if t.left is None:
            return _A
        key = self.tree_ids.get(t)
        if key is not None:
            return key
        key = ("T", len(self.tree_ids))
        self.tree_ids[t] = key
        upper, lower = _split_tree(t)
        self.rules[key] = (APPLY, (self.context(upper), self.tree(lower)))
        return key

    def context(self, c: Term):
        key = self.ctx_ids.get(c)
        if key is not None:
            return key
        key = ("C", len(self.ctx_ids))
        self.ctx_ids[c] = key
        if c.left.is_hole:
            self.rules[key] = (ARG_RIGHT, (self.tree(c.right),))
        elif c.right.is_hole:
            self.rules[key] = (ARG_LEFT, (self.tree(c.left),))
        else:
            upper, lower = _split_context(c)
            self.rules[key] = (COMPOSE, (self.context(upper), self.context(lower)))
        return key


def _split_tree(t: Term) -> tuple[Term, Term]:
    path, target = _tree_cut(t)
    return _rebuild(path, HOLE), target


def _split_context(c: Term) -> tuple[Term, Term]:
    """Cut at the spine node (strictly inside) closest to an even split, topmost on ties."""
    s = c.size
    path = []
    node = c
    best_len, best_score = None, None
    while node.left is not None:
        went_left = node.left.holes == 1
        path.append((node, went_left))
        node = node.left if went_left else node.right
        if node.left is None:
            break
        score = abs(s - 2 * node.size)
        if best_score is None or score < best_score:
            best_len, best_score = len(path), score
        if 2 * node.size <= s:
            break  # sizes only shrink further down the spine
    prefix = path[:best_len]
    lower = prefix[-1][0].left if prefix[-1][1] else prefix[-1][0].right
    return _rebuild(prefix, HOLE), lower


def _rebuild(path, bottom: Term) -> Term:
    out = bottom
    for parent, went_left in reversed(path):
        out = Term(out, parent.right) if went_left else Term(parent.left, out)
    return out


def bisection(t: Term) -> NormalFormTslp:
    if not t.is_tree:
        raise ValueError("compressors take trees")
    if t.left is None:
        return G_A
    b = _Bisection()
    root = b.tree(t)
    return _renumber(root, b.rules)


def dag_route(t: Term) -> NormalFormTslp:
    return dag_to_normal_tslp(build_minimal_dag(t))


def compress(t: Term, which: CompressorId | str = CompressorId.BISECTION) -> NormalFormTslp:
    which = CompressorId(which)
    if which is CompressorId.BISECTION:
        return bisection(t)
    return dag_route(t)


@dataclass(frozen=True)
class GammaResult:
    n: int
    value: float
    exact: bool          # False: maximum over a sample, a lower bound on gamma
    trees: int
    witness: Term


def gamma(which: CompressorId | str, n: int, *, samples: int | None = None, seed: int = 0,
          budget: int = 1 << 20) -> GammaResult:
    """max |G_t| / n over T_n, exhaustively or over uniformly random trees."""
    if n < 1:
        raise ValueError("n >= 1")
    if samples is None:
        if catalan(n - 1) > budget:
            raise BudgetExceeded(f"|T_{n}| = {catalan(n - 1)} exceeds the budget {budget}")
        trees = enumerate_trees(n)
    else:
        rng = random.Random(seed)
        trees = [uniform_tree(n, rng) for _ in range(samples)]
    best, witness = -1, None
    for t in trees:
        m = compress(t, which).size
        if m > best:
            best, witness = m, t
    return GammaResult(n, best / n, samples is None, len(trees), witness)


def uniform_tree(n: int, rng: random.Random) -> Term:
    """Uniformly random tree with n leaves (split sizes weighted by Catalan products)."""

    def split(size):
        if size == 1:
            return None
        r = rng.randrange(catalan(size - 1))
        for i in range(1, size):
            w = catalan(i - 1) * catalan(size - i - 1)
            if r < w:
                return i, size - i
            r -= w
        raise AssertionError("unreachable")

    return build_tree(n, split)
