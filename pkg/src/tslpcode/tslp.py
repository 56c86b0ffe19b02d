"""Tree straight-line programs.

Two representations live here:

* :class:`Tslp` -- a general grammar, nonterminal names mapped to right-hand
  side patterns over ``f``, ``a``, ``x`` and nonterminal calls.
* :class:`NormalFormTslp` -- the indexed normal form, stored as a per-rule
  type code plus the concatenated rhs word ``rho``. In ``rho`` words the
  symbol ``0`` stands for the leaf ``a`` and ``i >= 1`` for ``A_i``; ``A_0``
  is never referenced, so the integer order is the alphabet order
  ``a < A_1 < A_2 < ...`` used by the coder.
"""

from __future__ import annotations

import math
import re
import secrets
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Union

from .trees import HOLE, LEAF, Term, substitute

__all__ = [
    "APPLY", "COMPOSE", "ARG_LEFT", "ARG_RIGHT", "SINGLETON",
    "F", "Call", "Pattern", "Tslp", "NormalFormTslp", "G_A",
    "parse_grammar", "format_grammar", "format_pattern", "as_normal_form", "to_tslp",
    "evaluate", "rho_word", "omega_word", "entropy", "empirical_entropy",
    "Violation", "ValidationReport", "validate_normal_form",
    "canonical_renumber", "normalize",
    "DerivationNode", "derivation_tree", "first_occurrence_initial_subtree", "eval_initial",
]

# type codes, as written by the coder
APPLY = 0       # A_i -> A_j(alpha)
COMPOSE = 1     # A_i -> A_j(A_k(x))
ARG_LEFT = 2    # A_i -> f(alpha, x)
ARG_RIGHT = 3   # A_i -> f(x, alpha)
SINGLETON = -1  # only in G_a: A_0 -> a

_ARITY = {APPLY: 2, COMPOSE: 2, ARG_LEFT: 1, ARG_RIGHT: 1, SINGLETON: 1}

# leaf marker inside label-keyed rule maps (nonterminal names are never "a")
_A = "a"


# ---------------------------------------------------------------------------
# general grammars

@dataclass(frozen=True)
class F:
    left: "Pattern"
    right: "Pattern"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Pattern | None" = None


Pattern = Union[str, F, Call]


def _holes(p: Pattern) -> int:
    count = 0
    stack = [p]
    while stack:
        q = stack.pop()
        if q == "x":
            count += 1
        elif isinstance(q, F):
            stack.append(q.left)
            stack.append(q.right)
        elif isinstance(q, Call) and q.arg is not None:
            stack.append(q.arg)
    return count


def _calls(p: Pattern) -> list[Call]:
    out = []
    stack = [p]
    while stack:
        q = stack.pop()
        if isinstance(q, F):
            stack.append(q.right)
            stack.append(q.left)
        elif isinstance(q, Call):
            out.append(q)
            if q.arg is not None:
                stack.append(q.arg)
    return out


def _symbol_count(p: Pattern) -> int:
    count = 0
    stack = [p]
    while stack:
        q = stack.pop()
        count += 1
        if isinstance(q, F):
            stack.append(q.left)
            stack.append(q.right)
        elif isinstance(q, Call) and q.arg is not None:
            stack.append(q.arg)
    return count


def _topo(children: dict, roots: Iterable) -> list:
    """Children-before-parents order of everything reachable from ``roots``.

    Raises ValueError on a cycle or on a reference to an unknown key.
    """
    order = []
    state: dict = {}
    for root in roots:
        if root in state:
            continue
        stack = [(root, iter(children[root]))]
        state[root] = 1
        while stack:
            node, it = stack[-1]
            for child in it:
                if child not in children:
                    raise ValueError(f"reference to undefined nonterminal {child!r}")
                mark = state.get(child)
                if mark == 1:
                    raise ValueError(f"cyclic reference through {child!r}")
                if mark is None:
                    state[child] = 1
                    stack.append((child, iter(children[child])))
                    break
            else:
                stack.pop()
                state[node] = 2
                order.append(node)
    return order


@dataclass
class Tslp:
    """A general TSLP; the rank of a nonterminal is 1 iff its rhs contains ``x``."""

    start: str
    rules: dict[str, Pattern]
    ranks: dict[str, int] = field(init=False)

    def __post_init__(self):
        if self.start not in self.rules:
            raise ValueError(f"start nonterminal {self.start!r} has no rule")
        self.ranks = {}
        for name, rhs in self.rules.items():
            holes = _holes(rhs)
            if holes > 1:
                raise ValueError(f"rhs of {name} has {holes} parameters")
            self.ranks[name] = holes
        if self.ranks[self.start] != 0:
            raise ValueError("start nonterminal must have rank 0")
        for name, rhs in self.rules.items():
            for call in _calls(rhs):
                if call.name not in self.rules:
                    raise ValueError(f"rhs of {name} calls undefined {call.name}")
                want = 1 if call.arg is not None else 0
                if self.ranks[call.name] != want:
                    raise ValueError(f"{call.name} has rank {self.ranks[call.name]} but is used with rank {want}")
        _topo(self._children(), list(self.rules))

    def _children(self) -> dict[str, list[str]]:
        return {name: [c.name for c in _calls(rhs)] for name, rhs in self.rules.items()}

    def size(self) -> int:
        """Total number of symbols over all right-hand sides."""
        return sum(_symbol_count(rhs) for rhs in self.rules.values())


def _subst_pattern(p: Pattern, q: Pattern) -> Pattern:
    """Replace the single ``x`` of pattern ``p`` by ``q``."""
    path = []
    node = p
    while node != "x":
        if isinstance(node, F):
            if _holes(node.left):
                path.append((node, 0))
                node = node.left
            else:
                path.append((node, 1))
                node = node.right
        elif isinstance(node, Call) and node.arg is not None:
            path.append((node, 2))
            node = node.arg
        else:
            raise ValueError("pattern has no parameter")
    out = q
    for parent, which in reversed(path):
        if which == 0:
            out = F(out, parent.right)
        elif which == 1:
            out = F(parent.left, out)
        else:
            out = Call(parent.name, out)
    return out


def format_pattern(p: Pattern) -> str:
    out = []
    stack: list = [p]
    while stack:
        item = stack.pop()
        if isinstance(item, tuple):
            out.append(item[0])
        elif isinstance(item, str):
            out.append(item)
        elif isinstance(item, F):
            out.append("f(")
            stack.extend([(")",), item.right, (",",), item.left])
        else:
            out.append(item.name)
            if item.arg is not None:
                out.append("(")
                stack.extend([(")",), item.arg])
    return "".join(out)


_TOKEN = re.compile(r"\s*(?:([A-Z][A-Za-z0-9_]*)|(.))")


def _parse_pattern(text: str) -> Pattern:
    tokens = [(m.group(1) or m.group(2), m.start()) for m in _TOKEN.finditer(text)
              if (m.group(1) or m.group(2)) and not (m.group(2) or "").isspace()]
    pos = 0

    def peek():
        return tokens[pos][0] if pos < len(tokens) else None

    def take(expected=None):
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError(f"unexpected end of pattern {text!r}")
        tok, where = tokens[pos]
        if expected is not None and tok != expected:
            raise ValueError(f"expected {expected!r} at position {where} in {text!r}")
        pos += 1
        return tok

    def pattern():
        tok = take()
        if tok in ("a", "x"):
            return tok
        if tok == "f":
            take("(")
            left = pattern()
            take(",")
            right = pattern()
            take(")")
            return F(left, right)
        if tok[0].isupper():
            if peek() == "(":
                take("(")
                arg = pattern()
                take(")")
                return Call(tok, arg)
            return Call(tok)
        raise ValueError(f"unexpected token {tok!r} in {text!r}")

    result = pattern()
    if pos != len(tokens):
        raise ValueError(f"trailing input in pattern {text!r}")
    return result


def parse_grammar(text: str) -> Tslp:
    """Parse one ``NAME -> pattern`` rule per line; the first rule is the start."""
    rules: dict[str, Pattern] = {}
    start = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        lhs, sep, rhs = line.partition("->")
        lhs = lhs.strip()
        if not sep or not re.fullmatch(r"[A-Z][A-Za-z0-9_]*", lhs):
            raise ValueError(f"line {lineno}: expected 'NAME -> pattern'")
        if lhs in rules:
            raise ValueError(f"line {lineno}: duplicate rule for {lhs}")
        rules[lhs] = _parse_pattern(rhs)
        if start is None:
            start = lhs
    if start is None:
        raise ValueError("empty grammar")
    return Tslp(start, rules)


# ---------------------------------------------------------------------------
# normal form

@dataclass(frozen=True)
class NormalFormTslp:
    types: tuple[int, ...]
    rho: tuple[int, ...]

    def __post_init__(self):
        if not self.types:
            raise ValueError("a grammar has at least one nonterminal")
        if any(t not in _ARITY for t in self.types):
            raise ValueError(f"unknown type code in {self.types}")
        if SINGLETON in self.types and self.types != (SINGLETON,):
            raise ValueError("the singleton type only occurs in G_a")
        if sum(_ARITY[t] for t in self.types) != len(self.rho):
            raise ValueError("rho length does not match the rule types")

    @property
    def n(self) -> int:
        return len(self.types)

    @property
    def size(self) -> int:
        return len(self.rho)

    def __len__(self) -> int:
        return len(self.rho)

    @property
    def is_singleton(self) -> bool:
        return self.types == (SINGLETON,)

    @cached_property
    def _offsets(self) -> tuple[int, ...]:
        out, pos = [], 0
        for t in self.types:
            out.append(pos)
            pos += _ARITY[t]
        return tuple(out)

    def rule(self, i: int) -> tuple[int, tuple[int, ...]]:
        t = self.types[i]
        start = self._offsets[i]
        return t, self.rho[start:start + _ARITY[t]]

    def rules(self) -> list[tuple[int, tuple[int, ...]]]:
        return [self.rule(i) for i in range(self.n)]

    def rank(self, i: int) -> int:
        return 0 if self.types[i] in (APPLY, SINGLETON) else 1

    def __str__(self) -> str:
        return format_grammar(self)


G_A = NormalFormTslp((SINGLETON,), (0,))


def _sym_name(s: int) -> str:
    return "a" if s == 0 else f"A{s}"


def _rule_pattern(t: int, payload: tuple) -> Pattern:
    def sym(s):
        return "a" if s == 0 else Call(f"A{s}")

    if t == SINGLETON:
        return "a"
    if t == APPLY:
        j, alpha = payload
        return Call(f"A{j}", sym(alpha))
    if t == COMPOSE:
        j, k = payload
        return Call(f"A{j}", Call(f"A{k}", "x"))
    if t == ARG_LEFT:
        return F(sym(payload[0]), "x")
    return F("x", sym(payload[0]))


def to_tslp(g: NormalFormTslp) -> Tslp:
    return Tslp("A0", {f"A{i}": _rule_pattern(*g.rule(i)) for i in range(g.n)})


def format_grammar(g: Tslp | NormalFormTslp) -> str:
    if isinstance(g, NormalFormTslp):
        g = to_tslp(g)
    names = [g.start] + [name for name in g.rules if name != g.start]
    return "\n".join(f"{name} -> {format_pattern(g.rules[name])}" for name in names)


def _normal_shape(rhs: Pattern, rank: int):
    """(type, payload labels) of a normal-form rhs, or None. Leaf is the label ``_A``."""

    def alpha(p):
        if p == "a":
            return _A
        if isinstance(p, Call) and p.arg is None:
            return p.name
        return None

    if rhs == "a" and rank == 0:
        return SINGLETON, (_A,)
    if isinstance(rhs, Call) and rhs.arg is not None:
        arg = rhs.arg
        if rank == 0:
            a = alpha(arg)
            return (APPLY, (rhs.name, a)) if a is not None else None
        if isinstance(arg, Call) and arg.arg == "x":
            return COMPOSE, (rhs.name, arg.name)
        return None
    if isinstance(rhs, F) and rank == 1:
        if rhs.right == "x":
            a = alpha(rhs.left)
            return (ARG_LEFT, (a,)) if a is not None else None
        if rhs.left == "x":
            a = alpha(rhs.right)
            return (ARG_RIGHT, (a,)) if a is not None else None
    return None


def _label_rules(g: Tslp) -> dict:
    out = {}
    for name, rhs in g.rules.items():
        shape = _normal_shape(rhs, g.ranks[name])
        if shape is None:
            raise ValueError(f"rule {name} -> {format_pattern(rhs)} is not a normal-form shape")
        out[name] = shape
    return out


def as_normal_form(g: Tslp) -> NormalFormTslp:
    """Read a grammar named A0..A{n-1} in normal-form shapes, keeping its indices."""
    n = len(g.rules)
    expected = {f"A{i}" for i in range(n)}
    if set(g.rules) != expected or g.start != "A0":
        raise ValueError("nonterminals must be exactly A0..A{n-1} with start A0")
    shapes = _label_rules(g)
    types, rho = [], []
    for i in range(n):
        t, payload = shapes[f"A{i}"]
        if t == SINGLETON and n != 1:
            raise ValueError("A0 -> a is only allowed as the whole grammar")
        types.append(t)
        rho.extend(0 if s == _A else int(s[1:]) for s in payload)
    return NormalFormTslp(tuple(types), tuple(rho))


def _index_rules(g: NormalFormTslp) -> dict:
    """Rule map keyed by index with the leaf as ``_A``."""
    return {i: (t, tuple(_A if s == 0 else s for s in payload))
            for i, (t, payload) in enumerate(g.rules())}


def _nt_children(rules: dict) -> dict:
    return {k: [s for s in payload if s != _A] for k, (_, payload) in rules.items()}


def _renumber(start, rules: dict) -> NormalFormTslp:
    """Discovery-order indices: scan rho(A_0), rho(A_1), ... assigning fresh indices."""
    t0, payload0 = rules[start]
    if t0 == SINGLETON:
        if len(rules) != 1:
            raise ValueError("unreachable nonterminal next to the singleton rule")
        return G_A
    index = {start: 0}
    queue = [start]
    types, rho = [], []
    pos = 0
    while pos < len(queue):
        label = queue[pos]
        pos += 1
        t, payload = rules[label]
        types.append(t)
        for s in payload:
            if s == _A:
                rho.append(0)
                continue
            if s not in index:
                index[s] = len(queue)
                queue.append(s)
            rho.append(index[s])
    if len(queue) != len(rules):
        missing = sorted(map(str, set(rules) - set(index)))
        raise ValueError(f"unreachable nonterminal(s): {', '.join(missing)}")
    return NormalFormTslp(tuple(types), tuple(rho))


def canonical_renumber(g: Tslp | NormalFormTslp) -> NormalFormTslp:
    """Relabel a grammar in normal-form shapes so that rho has ordered first occurrences."""
    if isinstance(g, NormalFormTslp):
        return _renumber(0, _index_rules(g))
    return _renumber(g.start, _label_rules(g))


# ---------------------------------------------------------------------------
# evaluation and fingerprints over label-keyed rule maps

def _val_sizes(rules: dict, order: list) -> dict:
    size = {}
    for k in order:
        t, payload = rules[k]
        size[k] = sum(1 if s == _A else size[s] for s in payload)
    return size


def _vals_exact(rules: dict, order: list) -> dict:
    val = {}

    def sym(s):
        return LEAF if s == _A else val[s]

    for k in order:
        t, payload = rules[k]
        if t == SINGLETON:
            val[k] = LEAF
        elif t == APPLY:
            val[k] = substitute(val[payload[0]], sym(payload[1]))
        elif t == COMPOSE:
            val[k] = substitute(val[payload[0]], val[payload[1]])
        elif t == ARG_LEFT:
            val[k] = Term(sym(payload[0]), HOLE)
        else:
            val[k] = Term(HOLE, sym(payload[0]))
    return val


_MOD = (1 << 61) - 1
_BASE = secrets.randbelow(_MOD - (1 << 20)) + (1 << 20)
_CODES = {ch: i + 1 for i, ch in enumerate("fa(),")}


def _lit(s: str) -> tuple[int, int]:
    h = 0
    for ch in s:
        h = (h * _BASE + _CODES[ch]) % _MOD
    return h, len(s)


def _cat(*parts: tuple[int, int]) -> tuple[int, int]:
    h, n = 0, 0
    for ph, pn in parts:
        h = (h * pow(_BASE, pn, _MOD) + ph) % _MOD
        n += pn
    return h, n


_F_OPEN, _COMMA, _CLOSE, _LEAF_FP = _lit("f("), _lit(","), _lit(")"), _lit("a")


def _fingerprints(rules: dict, order: list) -> dict:
    """Polynomial fingerprints of serialized vals; contexts as (prefix, suffix) around x."""
    fp = {}

    def sym(s):
        return _LEAF_FP if s == _A else fp[s]

    for k in order:
        t, payload = rules[k]
        if t == SINGLETON:
            fp[k] = _LEAF_FP
        elif t == APPLY:
            pre, suf = fp[payload[0]]
            fp[k] = _cat(pre, sym(payload[1]), suf)
        elif t == COMPOSE:
            (p1, s1), (p2, s2) = fp[payload[0]], fp[payload[1]]
            fp[k] = (_cat(p1, p2), _cat(s2, s1))
        elif t == ARG_LEFT:
            fp[k] = (_cat(_F_OPEN, sym(payload[0]), _COMMA), _CLOSE)
        else:
            fp[k] = (_F_OPEN, _cat(_COMMA, sym(payload[0]), _CLOSE))
    return fp


def _val_keys(rules: dict, order: list, exact_limit: int) -> tuple[dict, bool]:
    """A key per nonterminal that is equal iff the vals are equal; bool says exact."""
    sizes = _val_sizes(rules, order)
    if not sizes or max(sizes.values()) <= exact_limit:
        vals = _vals_exact(rules, order)
        return {k: (rules[k][0] in (APPLY, SINGLETON), vals[k]) for k in order}, True
    fps = _fingerprints(rules, order)
    return {k: (rules[k][0] in (APPLY, SINGLETON), fps[k]) for k in order}, False


def evaluate(g: Tslp | NormalFormTslp) -> Term:
    """The tree derived from the start nonterminal."""
    if isinstance(g, NormalFormTslp):
        if g.is_singleton:
            return LEAF
        rules = _index_rules(g)
        order = _topo(_nt_children(rules), [0])
        return _vals_exact(rules, order)[0]
    children = g._children()
    val: dict[str, Term] = {}

    def build(p: Pattern) -> Term:
        # patterns are short rhs terms; nonterminal values are already computed
        if p == "a":
            return LEAF
        if p == "x":
            return HOLE
        if isinstance(p, F):
            return Term(build(p.left), build(p.right))
        if p.arg is None:
            return val[p.name]
        return substitute(val[p.name], build(p.arg))

    for name in _topo(children, [g.start]):
        val[name] = build(g.rules[name])
    return val[g.start]


# ---------------------------------------------------------------------------
# words and entropy

def rho_word(g: NormalFormTslp) -> tuple[int, ...]:
    return g.rho


def omega_word(g: NormalFormTslp) -> tuple[int, ...]:
    """rho with the first occurrence of every A_i (i >= 1) removed."""
    seen = set()
    out = []
    for s in g.rho:
        if s != 0 and s not in seen:
            seen.add(s)
            continue
        out.append(s)
    return tuple(out)


def empirical_entropy(word: Iterable) -> float:
    """Unnormalized empirical entropy in bits: -sum log2 p(w_i)."""
    counts = Counter(word)
    total = sum(counts.values())
    if total == 0:
        return 0.0
    return total * math.log2(total) - sum(c * math.log2(c) for c in counts.values())


def entropy(g: NormalFormTslp) -> float:
    return empirical_entropy(omega_word(g))


# ---------------------------------------------------------------------------
# validation

@dataclass(frozen=True)
class Violation:
    code: str
    detail: str
    index: int | None = None


@dataclass
class ValidationReport:
    violations: list[Violation]
    # "exact", "probabilistic", or "unchecked" when structural errors came first
    distinctness: str

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_normal_form(g: NormalFormTslp, exact_limit: int = 1 << 16) -> ValidationReport:
    if g.is_singleton:
        ok = g.rho == (0,)
        return ValidationReport([] if ok else [Violation("shape", "G_a must be A0 -> a")], "exact")
    out: list[Violation] = []
    n = g.n
    ranks = [g.rank(i) for i in range(n)]
    if ranks[0] != 0:
        out.append(Violation("start-rank", "A0 must have rank 0", 0))
    for i, (t, payload) in enumerate(g.rules()):
        bad = [s for s in payload if not 0 <= s < n]
        if bad:
            out.append(Violation("symbol-range", f"A{i} refers to undefined symbols {bad}", i))
            continue

        def alpha_ok(s):
            return s == 0 or ranks[s] == 0

        if t == APPLY:
            ok = ranks[payload[0]] == 1 and payload[0] != 0 and alpha_ok(payload[1])
        elif t == COMPOSE:
            ok = all(s != 0 and ranks[s] == 1 for s in payload)
        else:
            ok = alpha_ok(payload[0])
        if not ok:
            pattern = format_pattern(_rule_pattern(t, payload))
            out.append(Violation("rank", f"A{i} -> {pattern} mixes ranks", i))
    highest = 0
    for pos, s in enumerate(g.rho):
        if s > highest + 1:
            out.append(Violation("rho-order", f"A{s} occurs at position {pos} before A{highest + 1}"))
            break
        highest = max(highest, s)
    else:
        if highest != n - 1:
            out.append(Violation("unreferenced", f"A{highest + 1}..A{n - 1} never occur in rho"))
    if out:
        return ValidationReport(out, "unchecked")
    rules = _index_rules(g)
    children = _nt_children(rules)
    try:
        order = _topo(children, list(range(n)))
    except ValueError as exc:
        return ValidationReport([Violation("cycle", str(exc))], "unchecked")
    reachable = set(_topo(children, [0]))
    for i in range(n):
        if i not in reachable:
            out.append(Violation("unreachable", f"A{i} is not reachable from A0", i))
    keys, exact = _val_keys(rules, order, exact_limit)
    first: dict = {}
    for i in range(n):
        other = first.setdefault(keys[i], i)
        if other != i:
            out.append(Violation("val-collision", f"val(A{other}) == val(A{i})", i))
    return ValidationReport(out, "exact" if exact else "probabilistic")


# ---------------------------------------------------------------------------
# normalization

def normalize(g: Tslp, exact_limit: int = 1 << 16) -> NormalFormTslp:
    """Normal form deriving the same tree; at most 3 rho symbols per input rhs symbol.

    Each rhs is decomposed top-down into the four rule shapes: a tree node
    f(p, q) becomes C(alpha_p) with C -> f(x, alpha_q); a context node whose
    hole sits below one child becomes a one-f context composed with the
    translation of that child. Identical rules are hash-consed, nonterminals
    with equal values are merged, and indices are assigned in discovery order.
    """
    rules: dict[tuple, int] = {}
    by_id: dict[int, tuple] = {}

    def emit(t, payload):
        key = (t, payload)
        k = rules.get(key)
        if k is None:
            k = rules[key] = len(rules)
            by_id[k] = key
        return k

    def compose(outer, inner):
        if outer is None:
            return inner
        if inner is None:
            return outer
        return emit(COMPOSE, (outer, inner))

    tree_sym: dict[str, object] = {}
    ctx_sym: dict[str, int | None] = {}

    def tree(p):
        if p == "a":
            return _A
        if isinstance(p, F):
            left = tree(p.left)
            right = tree(p.right)
            return emit(APPLY, (emit(ARG_RIGHT, (right,)), left))
        if p.arg is None:
            return tree_sym[p.name]
        c = ctx_sym[p.name]
        arg = tree(p.arg)
        return arg if c is None else emit(APPLY, (c, arg))

    def ctx(p):
        if p == "x":
            return None
        if isinstance(p, F):
            if _holes(p.left):
                inner = ctx(p.left)
                top = emit(ARG_RIGHT, (tree(p.right),))
            else:
                inner = ctx(p.right)
                top = emit(ARG_LEFT, (tree(p.left),))
            return compose(top, inner)
        return compose(ctx_sym[p.name], ctx(p.arg))

    for name in _topo(g._children(), [g.start]):
        if g.ranks[name] == 0:
            tree_sym[name] = tree(g.rules[name])
        else:
            ctx_sym[name] = ctx(g.rules[name])
    root = tree_sym[g.start]
    if root == _A:
        return G_A

    labelled = {k: by_id[k] for k in by_id}
    order = _topo(_nt_children(labelled), [root])
    keys, _ = _val_keys(labelled, order, exact_limit)
    rep: dict = {}
    canon = {}
    for k in order:
        canon[k] = rep.setdefault(keys[k], k)

    def fix(s):
        return s if s == _A else canon[s]

    merged = {}
    for k in order:
        if canon[k] == k:
            t, payload = labelled[k]
            merged[k] = (t, tuple(fix(s) for s in payload))
    return _renumber(canon[root], merged)


# ---------------------------------------------------------------------------
# derivation trees

@dataclass
class DerivationNode:
    """Node of a derivation tree; ``label`` is a nonterminal index or None for ``a``."""

    label: int | None
    children: list["DerivationNode"] = field(default_factory=list)

    def nodes(self) -> list["DerivationNode"]:
        out, stack = [], [self]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(reversed(v.children))
        return out

    def leaves(self) -> list["DerivationNode"]:
        return [v for v in self.nodes() if not v.children]

    def shape(self):
        """Nested (label, children...) tuples, handy for comparisons in tests."""
        if not self.children:
            return self.label
        return (self.label, *(c.shape() for c in self.children))


def derivation_tree(g: NormalFormTslp) -> DerivationNode:
    """The full derivation tree T_G; its a-leaves are the leaves of val(G)."""
    root = DerivationNode(0)
    stack = [root]
    while stack:
        v = stack.pop()
        _, payload = g.rule(v.label)
        v.children = [DerivationNode(None if s == 0 else s) for s in payload]
        stack.extend(c for c in v.children if c.label is not None)
    return root


def first_occurrence_initial_subtree(g: NormalFormTslp) -> DerivationNode:
    """Only the first (preorder) node carrying each nonterminal keeps its children."""
    root = DerivationNode(0)
    seen = set()
    stack = [root]
    while stack:
        v = stack.pop()
        if v.label in seen:
            continue
        seen.add(v.label)
        _, payload = g.rule(v.label)
        v.children = [DerivationNode(None if s == 0 else s) for s in payload]
        for child in reversed(v.children):
            if child.label is not None:
                stack.append(child)
    return root


def eval_initial(g: NormalFormTslp, t: DerivationNode) -> Pattern:
    """The pattern derived from A_0 according to an initial subtree of T_G."""
    if t.label != 0:
        raise ValueError("an initial subtree is rooted at A0")
    result: dict[int, Pattern] = {}
    for v in reversed(t.nodes()):  # reversed preorder: children before parents
        if v.label is None:
            if v.children:
                raise ValueError("a-labelled nodes are leaves")
            result[id(v)] = "a"
            continue
        if not 0 <= v.label < g.n:
            raise ValueError(f"unknown nonterminal A{v.label}")
        rank = g.rank(v.label)
        if not v.children:
            name = f"A{v.label}"
            result[id(v)] = Call(name, "x") if rank else Call(name)
            continue
        t_type, payload = g.rule(v.label)
        labels = [c.label for c in v.children]
        if labels != [None if s == 0 else s for s in payload]:
            raise ValueError(f"children of A{v.label} do not match its rule")
        kids = [result.pop(id(c)) for c in v.children]
        if t_type == SINGLETON:
            result[id(v)] = "a"
        elif t_type == ARG_LEFT:
            result[id(v)] = F(kids[0], "x")
        elif t_type == ARG_RIGHT:
            result[id(v)] = F("x", kids[0])
        else:
            result[id(v)] = _subst_pattern(kids[0], kids[1])
    return result[id(t)]
