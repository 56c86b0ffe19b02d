"""Leaf-centric and depth-centric tree sources.

A leaf-centric source splits a tree with n leaves into children of sizes
(i, j), i + j = n, with probability sigma(i, j); its classes are F_i = T_{i+1}.
A depth-centric source picks child depths (i, j) with max(i, j) = d - 1 for a
tree of depth d; its classes are F_i = T^i (trees of depth exactly i).

Probabilities are exact :class:`fractions.Fraction` values. The log2 variants
multiply numerators and denominators as integers and take one logarithm at
the end, so they stay accurate for trees with 2**16 leaves.
"""

from __future__ import annotations

import json
import math
import random
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable

from .trees import LEAF, Term, catalan, enumerate_depth_class, enumerate_trees, iter_preorder

__all__ = [
    "Sigma", "LeafSigma", "DepthSigma", "BstUniform", "LeafBalancedUniform", "DepthUniform",
    "DepthBalancedUniform", "TableSigma", "TreeSource", "parse_source", "load_table",
    "prob_tree", "prob_context", "log2_prob", "lambda_value", "sample", "build_tree",
    "check_monotone", "is_leaf_balanced", "is_depth_balanced", "check_normalized",
    "class_members", "class_size", "class_min_size", "depth_class_size", "ONE",
]

ONE = Fraction(1)
LEAF_KIND, DEPTH_KIND = "leaf", "depth"


class Sigma:
    """Split distribution sigma(i, j) -> Fraction; subclasses fix ``kind``."""

    kind: str = ""
    bound: int | None = None     # largest level the evaluator is defined for
    uniform: bool = False        # every support pair at a level has equal weight

    def __call__(self, i: int, j: int) -> Fraction:
        raise NotImplementedError

    def draw(self, level: int, rng: random.Random) -> tuple[int, int] | None:
        """Optional O(1) sampler for one level; None means use the generic table."""
        return None

    def level_pairs(self, level: int) -> list[tuple[int, int]]:
        """All argument pairs at one level (leaf: i + j = level; depth: max(i, j) = level - 1)."""
        if self.kind == LEAF_KIND:
            return [(i, level - i) for i in range(1, level)]
        d = level - 1
        return [(d, j) for j in range(d + 1)] + [(i, d) for i in range(d)]

    def support(self, level: int) -> list[tuple[int, int, Fraction]]:
        self._check_level(level)
        out = []
        for i, j in self.level_pairs(level):
            p = self(i, j)
            if p:
                out.append((i, j, p))
        return out

    def _check_level(self, level: int) -> None:
        if self.bound is not None and level > self.bound:
            raise ValueError(f"sigma is only defined up to level {self.bound}, asked {level}")

    def in_domain(self, i: int, j: int) -> bool:
        if self.kind == LEAF_KIND:
            return i >= 1 and j >= 1 and (self.bound is None or i + j <= self.bound)
        return i >= 0 and j >= 0 and (self.bound is None or max(i, j) + 1 <= self.bound)

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class LeafSigma(Sigma):
    kind = LEAF_KIND


class DepthSigma(Sigma):
    kind = DEPTH_KIND


class BstUniform(LeafSigma):
    """Uniform split position: sigma(i, j) = 1 / (i + j - 1)."""

    uniform = True
    name = "bst"

    def __call__(self, i, j):
        return Fraction(1, i + j - 1)

    def draw(self, level, rng):
        i = rng.randrange(1, level)
        return i, level - i


class LeafBalancedUniform(LeafSigma):
    """Uniform over the splits with (i + j) / min(i, j) <= c."""

    uniform = True

    def __init__(self, c: float | Fraction):
        c = Fraction(c)
        if c < 3:
            # a tree with 3 leaves has no split with ratio below 3
            raise ValueError("leaf-balanced sources need c >= 3")
        self.c = c
        self.name = f"leaf-balanced:{_fmt(c)}"

    def _ok(self, i, j):
        return i + j <= self.c * min(i, j)

    def _range(self, n):
        # the admissible left sizes form the interval [ceil(n/c), n - ceil(n/c)]
        lo = max(1, math.ceil(n / self.c))
        return lo, n - lo

    def __call__(self, i, j):
        if not self._ok(i, j):
            return Fraction(0)
        lo, hi = self._range(i + j)
        return Fraction(1, hi - lo + 1)

    def draw(self, level, rng):
        lo, hi = self._range(level)
        i = rng.randint(lo, hi)
        return i, level - i

    def __repr__(self):
        return f"LeafBalancedUniform({_fmt(self.c)})"


class DepthUniform(DepthSigma):
    """Uniform over the 2d + 1 depth pairs with max = d: sigma = 1 / (2 max(i, j) + 1)."""

    uniform = True
    name = "depth-uniform"

    def __call__(self, i, j):
        return Fraction(1, 2 * max(i, j) + 1)

    def draw(self, level, rng):
        d = level - 1
        r = rng.randrange(2 * d + 1)
        return (d, r) if r <= d else (r - d - 1, d)


class DepthBalancedUniform(DepthSigma):
    """Uniform over the depth pairs with |i - j| <= c."""

    uniform = True

    def __init__(self, c: int):
        if c < 0 or int(c) != c:
            raise ValueError("depth-balanced sources need an integer c >= 0")
        self.c = int(c)
        self.name = f"depth-balanced:{self.c}"

    def __call__(self, i, j):
        if abs(i - j) > self.c:
            return Fraction(0)
        return Fraction(1, 2 * min(self.c, max(i, j)) + 1)

    def __repr__(self):
        return f"DepthBalancedUniform({self.c})"


class TableSigma(Sigma):
    """Explicit rational table; pairs not listed have weight 0, levels above ``bound`` are undefined."""

    def __init__(self, kind: str, bound: int, entries: dict[tuple[int, int], Fraction],
                 name: str = "table", check: bool = True):
        if kind not in (LEAF_KIND, DEPTH_KIND):
            raise ValueError(f"unknown sigma kind {kind!r}")
        self.kind = kind
        self.bound = bound
        self.entries = {k: Fraction(v) for k, v in entries.items()}
        self.name = name
        for (i, j), p in self.entries.items():
            if not self.in_domain(i, j):
                raise ValueError(f"table entry ({i},{j}) is outside the declared domain")
            if not 0 <= p <= 1:
                raise ValueError(f"table entry ({i},{j}) = {p} is not a probability")
        if check:
            bad = check_normalized(self, bound)
            if bad is not None:
                raise ValueError(f"table does not sum to 1 at level {bad}")

    def __call__(self, i, j):
        if not self.in_domain(i, j):
            raise ValueError(f"sigma({i},{j}) is outside the table bound {self.bound}")
        return self.entries.get((i, j), Fraction(0))

    def __repr__(self):
        return f"TableSigma({self.kind!r}, bound={self.bound}, {len(self.entries)} entries)"


def _fmt(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def load_table(path: str, name: str | None = None) -> TableSigma:
    """JSON ``{"kind": "leaf"|"depth", "bound": N, "entries": [[i, j, "p/q"], ...]}``."""
    with open(path) as fh:
        doc = json.load(fh)
    try:
        kind, bound, rows = doc["kind"], int(doc["bound"]), doc["entries"]
        entries = {(int(i), int(j)): Fraction(p) for i, j, p in rows}
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed sigma table {path}: {exc}") from None
    return TableSigma(kind, bound, entries, name=name or f"table:{path}")


class TreeSource:
    """A sigma together with its partition (leaf-centric or depth-centric)."""

    def __init__(self, sigma: Sigma, name: str | None = None):
        self.sigma = sigma
        self.kind = sigma.kind
        self.name = name or getattr(sigma, "name", repr(sigma))

    def __repr__(self):
        return f"TreeSource({self.name})"


def parse_source(text: str) -> TreeSource:
    """``bst``, ``depth-uniform``, ``leaf-balanced:<c>``, ``depth-balanced:<c>`` or ``table:<file>``."""
    head, _, arg = text.partition(":")
    if head == "bst" and not arg:
        return TreeSource(BstUniform())
    if head == "depth-uniform" and not arg:
        return TreeSource(DepthUniform())
    if head == "leaf-balanced" and arg:
        return TreeSource(LeafBalancedUniform(Fraction(arg)))
    if head == "depth-balanced" and arg:
        return TreeSource(DepthBalancedUniform(int(arg)))
    if head == "table" and arg:
        return TreeSource(load_table(arg, name=text))
    raise ValueError(f"unknown source {text!r}")


def _as_source(src) -> TreeSource:
    return src if isinstance(src, TreeSource) else TreeSource(src)


# probabilities

def _prod(values: list[int]) -> int:
    # pairwise product keeps the big-integer operands balanced
    while len(values) > 1:
        values = [values[k] * values[k + 1] if k + 1 < len(values) else values[k]
                  for k in range(0, len(values), 2)]
    return values[0] if values else 1


def _factors(src: TreeSource, t: Term) -> Iterable[Fraction]:
    sigma = src.sigma
    leafy = src.kind == LEAF_KIND
    for v in iter_preorder(t):
        if v.left is None:
            continue
        if leafy:
            i, j = v.left.size, v.right.size
            if i == 0 or j == 0:
                continue  # the hole's parent: sigma(0, k) = sigma(k, 0) = 1
            yield sigma(i, j)
        else:
            yield sigma(v.left.depth, v.right.depth)


def _fraction_parts(src: TreeSource, t: Term) -> tuple[int, int]:
    nums, dens = [], []
    for p in _factors(src, t):
        if not p:
            return 0, 1
        if p.numerator != 1:
            nums.append(p.numerator)
        if p.denominator != 1:
            dens.append(p.denominator)
    return _prod(nums), _prod(dens)


def _prob(src, t: Term, log2: bool):
    src = _as_source(src)
    num, den = _fraction_parts(src, t)
    if log2:
        return -math.inf if num == 0 else math.log2(num) - math.log2(den)
    return Fraction(num, den)


def prob_tree(src, t: Term, log2: bool = False):
    """P_sigma(t) as a Fraction, or log2 P (-inf for probability 0)."""
    if not t.is_tree:
        raise ValueError("prob_tree takes a tree; use prob_context for contexts")
    return _prob(src, t, log2)


def prob_context(src, c: Term, log2: bool = False):
    """P_sigma on contexts: the hole has probability 1, its parent contributes sigma(0, k) = 1
    for leaf sources, and depths are measured in c(a)."""
    if not c.is_context:
        raise ValueError("prob_context takes a context")
    return _prob(src, c, log2)


def log2_prob(src, t: Term) -> float:
    return _prob(src, t, True)


def lambda_value(src, u: Term) -> Fraction:
    """max(1 / C_|u|, P(u)) for trees and contexts alike."""
    return max(Fraction(1, catalan(u.size)), _prob(src, u, False))


# classes

def class_min_size(src, i: int) -> int:
    """Smallest tree size in F_i (leaf: the class size itself; depth: the caterpillar)."""
    return i + 1


@lru_cache(maxsize=None)
def _depth_at_most_count(d: int) -> int:
    return 1 if d == 0 else 1 + _depth_at_most_count(d - 1) ** 2


def depth_class_size(d: int) -> int:
    """|T^d| via |T^{<=d}| = 1 + |T^{<=d-1}|^2."""
    if d == 0:
        return 1
    return _depth_at_most_count(d) - _depth_at_most_count(d - 1)


def class_size(src, i: int) -> int:
    src = _as_source(src)
    return catalan(i) if src.kind == LEAF_KIND else depth_class_size(i)


def class_members(src, i: int) -> tuple[Term, ...]:
    src = _as_source(src)
    return enumerate_trees(i + 1) if src.kind == LEAF_KIND else enumerate_depth_class(i)


# sampling

def build_tree(root_param: int, split: Callable[[int], tuple[int, int] | None]) -> Term:
    """Top-down construction: ``split(param)`` is None for a leaf, else the two child params.

    Splits are drawn in preorder (left subtree before right), which fixes the
    order of random draws for samplers.
    """
    _JOIN = object()
    done: list[Term] = []
    stack: list = [root_param]
    while stack:
        param = stack.pop()
        if param is _JOIN:
            right = done.pop()
            done.append(Term(done.pop(), right))
            continue
        parts = split(param)
        if parts is None:
            done.append(LEAF)
        else:
            stack.append(_JOIN)
            stack.append(parts[1])
            stack.append(parts[0])
    return done[0]


class _Sampler:
    def __init__(self, src: TreeSource, rng: random.Random):
        self.sigma = src.sigma
        self.kind = src.kind
        self.rng = rng
        self.tables: dict[int, tuple[list[tuple[int, int]], list[int], int]] = {}

    def table(self, level):
        tab = self.tables.get(level)
        if tab is None:
            sup = self.sigma.support(level)
            if not sup:
                raise ValueError(f"sigma has empty support at level {level}")
            den = math.lcm(*(p.denominator for _, _, p in sup))
            cum, acc = [], 0
            for _, _, p in sup:
                acc += p.numerator * (den // p.denominator)
                cum.append(acc)
            if acc != den:
                raise ValueError(f"sigma does not sum to 1 at level {level}")
            tab = self.tables[level] = ([(i, j) for i, j, _ in sup], cum, acc)
        return tab

    def split(self, param):
        if self.kind == LEAF_KIND:
            if param == 1:
                return None
            level = param
        else:
            if param == 0:
                return None
            level = param
        fast = self.sigma.draw(level, self.rng)
        if fast is not None:
            return fast
        pairs, cum, total = self.table(level)
        r = self.rng.randrange(total)
        lo, hi = 0, len(cum) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if cum[mid] > r:
                hi = mid
            else:
                lo = mid + 1
        return pairs[lo]


def sample(src, i: int, seed: int | random.Random = 0) -> Term:
    """A tree from F_i drawn by ancestral sampling; reproducible for an int seed."""
    src = _as_source(src)
    if i < 0:
        raise ValueError("class index must be nonnegative")
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    sampler = _Sampler(src, rng)
    root = i + 1 if src.kind == LEAF_KIND else i
    return build_tree(root, sampler.split)


# predicates on sigma

def check_normalized(sigma: Sigma, bound: int) -> int | None:
    """First level <= bound whose support does not sum to 1, or None."""
    start = 2 if sigma.kind == LEAF_KIND else 1
    for level in range(start, bound + 1):
        if sum((p for _, _, p in sigma.support(level)), Fraction(0)) != 1:
            return level
    return None


def _domain_pairs(sigma: Sigma, bound: int):
    lo = 1 if sigma.kind == LEAF_KIND else 0
    top = bound if sigma.kind == LEAF_KIND else bound - 1
    for i in range(lo, top + 1):
        for j in range(lo, top + 1):
            if sigma.in_domain(i, j) and (sigma.kind != LEAF_KIND or i + j <= bound):
                yield i, j


def check_monotone(sigma: Sigma, bound: int) -> bool:
    """sigma(i, j) >= sigma(i, j+1) and sigma(i, j) >= sigma(i+1, j) on every pair up to ``bound``.

    ``bound`` is a level: leaf pairs with i + j <= bound, depth pairs with max(i, j) < bound.
    """
    if sigma.bound is not None:
        bound = min(bound, sigma.bound)
    pairs = set(_domain_pairs(sigma, bound))
    for i, j in pairs:
        p = sigma(i, j)
        for nxt in ((i, j + 1), (i + 1, j)):
            if nxt in pairs and sigma(*nxt) > p:
                return False
    return True


def is_leaf_balanced(sigma: Sigma, c, bound: int) -> bool:
    """(i + j) / min(i, j) <= c on the support up to level ``bound``."""
    c = Fraction(c)
    return all(i + j <= c * min(i, j)
               for level in range(2, bound + 1) for i, j, _ in sigma.support(level))


def is_depth_balanced(sigma: Sigma, c: int, bound: int) -> bool:
    """|i - j| <= c on the support up to level ``bound``."""
    return all(abs(i - j) <= c
               for level in range(1, bound + 1) for i, j, _ in sigma.support(level))
