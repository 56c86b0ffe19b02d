"""Binary trees over {f, a} and one-hole contexts over {f, a, x}.

A single immutable node class, :class:`Term`, represents both. Size, depth,
hole count and a structural hash are computed once at construction from the
children, so none of the metrics recurse. Equality is structural and
iterative, which keeps degenerate (caterpillar) shapes with 2**16 leaves safe
from the interpreter recursion limit.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterator

__all__ = [
    "Term", "Tree", "Context", "LEAF", "HOLE", "f",
    "parse_term", "serialize_term", "substitute", "hole_path",
    "iter_preorder", "iter_subterms", "caterpillar",
    "enumerate_trees", "enumerate_contexts", "enumerate_depth_class",
    "catalan", "is_beta_balanced", "is_beta_depth_balanced", "TermSyntaxError",
]


class Term:
    __slots__ = ("left", "right", "size", "depth", "holes", "_hash")

    def __init__(self, left: Term | None = None, right: Term | None = None, *, hole: bool = False):
        if left is None:
            if right is not None:
                raise ValueError("a leaf has no children")
            self.left = self.right = None
            self.size = 0 if hole else 1
            self.depth = 0
            self.holes = 1 if hole else 0
            self._hash = hash(("x",)) if hole else hash(("a",))
            return
        if right is None:
            raise ValueError("an internal node needs two children")
        holes = left.holes + right.holes
        if holes > 1:
            raise ValueError("a context has exactly one hole")
        self.left = left
        self.right = right
        self.size = left.size + right.size
        self.depth = 1 + max(left.depth, right.depth)
        self.holes = holes
        self._hash = hash((left._hash, right._hash))

    @property
    def is_leaf(self) -> bool:
        return self.left is None and self.holes == 0

    @property
    def is_hole(self) -> bool:
        return self.left is None and self.holes == 1

    @property
    def is_internal(self) -> bool:
        return self.left is not None

    @property
    def is_tree(self) -> bool:
        return self.holes == 0

    @property
    def is_context(self) -> bool:
        return self.holes == 1

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Term):
            return NotImplemented
        stack = [(self, other)]
        while stack:
            s, t = stack.pop()
            if s is t:
                continue
            if (s._hash != t._hash or s.size != t.size or s.depth != t.depth
                    or s.holes != t.holes):
                return False
            if s.left is None:
                if t.left is not None:
                    return False
                continue
            if t.left is None:
                return False
            stack.append((s.right, t.right))
            stack.append((s.left, t.left))
        return True

    def __ne__(self, other: object) -> bool:
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __repr__(self) -> str:
        if self.size + self.holes > 64:
            kind = "Context" if self.holes else "Tree"
            return f"<{kind} size={self.size} depth={self.depth}>"
        return f"Term({serialize_term(self)!r})"

    def __str__(self) -> str:
        return serialize_term(self)


Tree = Term
Context = Term

LEAF = Term()
HOLE = Term(hole=True)


def f(left: Term, right: Term) -> Term:
    return Term(left, right)


class TermSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


def parse_term(text: str) -> Term:
    """Parse ``a``, ``x`` and ``f(<term>,<term>)``; whitespace is ignored."""
    pos = 0
    n = len(text)

    def skip() -> None:
        nonlocal pos
        while pos < n and text[pos].isspace():
            pos += 1

    def expect(ch: str) -> None:
        nonlocal pos
        skip()
        if pos >= n or text[pos] != ch:
            found = repr(text[pos]) if pos < n else "end of input"
            raise TermSyntaxError(f"expected {ch!r}, found {found}", pos)
        pos += 1

    # explicit stack: each frame is the list of finished children of an open f(
    frames: list[list[Term]] = []
    result = None
    hole_count = 0
    while True:
        skip()
        if pos >= n:
            raise TermSyntaxError("unexpected end of input", pos)
        ch = text[pos]
        if ch == "f":
            pos += 1
            expect("(")
            frames.append([])
            continue
        if ch == "a":
            pos += 1
            node = LEAF
        elif ch == "x":
            hole_count += 1
            if hole_count > 1:
                raise TermSyntaxError("multiple holes", pos)
            pos += 1
            node = HOLE
        else:
            raise TermSyntaxError(f"unexpected character {ch!r}", pos)
        while True:
            if not frames:
                result = node
                break
            frames[-1].append(node)
            if len(frames[-1]) == 1:
                expect(",")
                break
            expect(")")
            left, right = frames.pop()
            node = Term(left, right)
        if result is not None:
            break
    skip()
    if pos != n:
        raise TermSyntaxError("trailing characters", pos)
    return result


def serialize_term(t: Term) -> str:
    out = []
    stack: list[Term | str] = [t]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
        elif item.left is None:
            out.append("x" if item.holes else "a")
        else:
            out.append("f(")
            stack.append(")")
            stack.append(item.right)
            stack.append(",")
            stack.append(item.left)
    return "".join(out)


def hole_path(c: Term) -> list[tuple[Term, bool]]:
    """Spine of a context from the root down: (node, hole_is_left) per internal node."""
    if c.holes != 1:
        raise ValueError("not a context")
    path = []
    node = c
    while node.left is not None:
        went_left = node.left.holes == 1
        path.append((node, went_left))
        node = node.left if went_left else node.right
    return path


def substitute(s: Term, t: Term) -> Term:
    """Replace the hole of context ``s`` by ``t``; copies only the spine of ``s``."""
    path = hole_path(s)
    node = t
    for parent, went_left in reversed(path):
        node = Term(node, parent.right) if went_left else Term(parent.left, node)
    return node


def iter_preorder(t: Term) -> Iterator[Term]:
    stack = [t]
    while stack:
        node = stack.pop()
        yield node
        if node.left is not None:
            stack.append(node.right)
            stack.append(node.left)


iter_subterms = iter_preorder


def caterpillar(n: int) -> Term:
    """The left-leaning chain with ``n`` occurrences of f (n + 1 leaves)."""
    t = LEAF
    for _ in range(n):
        t = Term(t, LEAF)
    return t


@lru_cache(maxsize=None)
def catalan(n: int) -> int:
    if n < 0:
        raise ValueError("catalan index must be nonnegative")
    return math.comb(2 * n, n) // (n + 1)


@lru_cache(maxsize=32)
def enumerate_trees(n: int) -> tuple[Term, ...]:
    """All trees with n leaves, ordered by left-subtree size descending, then recursively."""
    if n < 1:
        raise ValueError("trees have at least one leaf")
    if n == 1:
        return (LEAF,)
    out = []
    for left_size in range(n - 1, 0, -1):
        rights = enumerate_trees(n - left_size)
        for left in enumerate_trees(left_size):
            for right in rights:
                out.append(Term(left, right))
    return tuple(out)


@lru_cache(maxsize=32)
def enumerate_contexts(n: int) -> tuple[Term, ...]:
    """All contexts with n a-leaves: hole-left shapes first, then hole-right."""
    if n < 0:
        raise ValueError("context size must be nonnegative")
    if n == 0:
        return (HOLE,)
    out = []
    for ctx_size in range(n - 1, -1, -1):
        trees = enumerate_trees(n - ctx_size)
        for c in enumerate_contexts(ctx_size):
            for t in trees:
                out.append(Term(c, t))
    for tree_size in range(n, 0, -1):
        ctxs = enumerate_contexts(n - tree_size)
        for t in enumerate_trees(tree_size):
            for c in ctxs:
                out.append(Term(t, c))
    return tuple(out)


@lru_cache(maxsize=8)
def _depth_at_most(d: int) -> tuple[Term, ...]:
    if d == 0:
        return (LEAF,)
    return _depth_at_most(d - 1) + enumerate_depth_class(d)


@lru_cache(maxsize=8)
def enumerate_depth_class(d: int) -> tuple[Term, ...]:
    """All trees of depth exactly d (the class T^d)."""
    if d < 0:
        raise ValueError("depth must be nonnegative")
    if d == 0:
        return (LEAF,)
    exact = enumerate_depth_class(d - 1)
    lower = _depth_at_most(d - 1)
    shallower = lower[: len(lower) - len(exact)]
    out = [Term(l, r) for l in exact for r in lower]
    out.extend(Term(l, r) for l in shallower for r in exact)
    return tuple(out)


def is_beta_balanced(t: Term, beta: float) -> bool:
    """Every parent/child pair of internal nodes contains a beta-balanced node."""

    def balanced(v: Term) -> bool:
        return v.left.size <= beta * v.right.size and v.right.size <= beta * v.left.size

    for v in iter_preorder(t):
        if v.left is None:
            continue
        if balanced(v):
            continue
        for u in (v.left, v.right):
            if u.left is not None and not balanced(u):
                return False
    return True


def is_beta_depth_balanced(t: Term, beta: int) -> bool:
    return all(abs(v.left.depth - v.right.depth) <= beta
               for v in iter_preorder(t) if v.left is not None)
