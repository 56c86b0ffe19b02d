"""Experiment harness: end-to-end encoders, worst-case redundancy, bound checks.

The DAG encoder here is the DAG-route TSLP encoder (minimal DAG turned into a
normal-form grammar, then coded like every other grammar); it is not a
dedicated DAG code.
"""

from __future__ import annotations

import csv
import enum
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .coder import code_length, encode
from .compressor import BudgetExceeded, CompressorId, compress
from .sources import DEPTH_KIND, LEAF_KIND, TreeSource, _fraction_parts, class_members, \
    class_size, lambda_value, sample
from .trees import Term, enumerate_contexts, enumerate_trees, serialize_term, substitute
from .tslp import entropy

__all__ = [
    "EncoderId", "tree_code", "tree_code_length", "RedundancyReport", "redundancy",
    "DominationReport", "verify_domination", "EntropyReport", "verify_entropy_bound",
    "CSV_COLUMNS", "write_rows", "report_row", "ENTROPY_CONSTANTS", "level_sum_bound",
]


class EncoderId(str, enum.Enum):
    TSLP = "tslp"
    DAG = "dag"

    @property
    def compressor(self) -> CompressorId:
        return CompressorId.BISECTION if self is EncoderId.TSLP else CompressorId.DAG_ROUTE


def tree_code(enc: EncoderId | str, t: Term) -> str:
    return encode(compress(t, EncoderId(enc).compressor), validate=False)


def tree_code_length(enc: EncoderId | str, t: Term) -> int:
    return code_length(compress(t, EncoderId(enc).compressor))


def _log2_fraction(num: int, den: int) -> float:
    return math.log2(num) - math.log2(den)


# worst-case redundancy

@dataclass
class RedundancyReport:
    encoder: str
    source: str
    i: int
    n: int                  # smallest tree size in the class
    mode: str               # "exact" or "sampled" (a lower bound on the class maximum)
    trees: int              # class members with P > 0, or samples drawn
    value: float
    witness: Term
    average: float | None = None   # sum of P(t) (|E(t)| + log2 P(t)) / |t|, exact mode only

    @property
    def label(self) -> str:
        return "=" if self.mode == "exact" else ">="


def redundancy(enc: EncoderId | str, src: TreeSource, i: int, *, exact: bool = True,
               samples: int = 1000, seed: int = 0, budget: int = 1 << 20) -> RedundancyReport:
    """max over F_i with P(t) > 0 of (|E(t)| + log2 P(t)) / |t|."""
    enc = EncoderId(enc)
    if exact:
        if class_size(src, i) > budget:
            raise BudgetExceeded(f"class {i} has {class_size(src, i)} trees, budget {budget}")
        trees: Iterable[Term] = class_members(src, i)
    else:
        rng = random.Random(seed)
        trees = (sample(src, i, rng) for _ in range(samples))
    best, witness, count, avg = -math.inf, None, 0, 0.0
    for t in trees:
        num, den = _fraction_parts(src, t)
        if num == 0:
            continue
        lp = _log2_fraction(num, den)
        r = (tree_code_length(enc, t) + lp) / t.size
        count += 1
        if exact:
            avg += num / den * r
        if r > best:
            best, witness = r, t
    if witness is None:
        raise ValueError(f"class {i} has no tree with positive probability")
    return RedundancyReport(enc.value, src.name, i, i + 1, "exact" if exact else "sampled",
                            count, best, witness, avg if exact else None)


# strong domination

def level_sum_bound(kind: str, n: int) -> int:
    """Allowed sum of lambda over T_n and C_n: 8n - 2 (leaf) or 4n^2 + 3n - 1 (depth)."""
    return 8 * n - 2 if kind == LEAF_KIND else 4 * n * n + 3 * n - 1


@dataclass
class DominationReport:
    source: str
    n_max: int
    sums: dict[int, Fraction] = field(default_factory=dict)
    bounds: dict[int, int] = field(default_factory=dict)
    checked: dict[str, int] = field(default_factory=dict)
    violations: list[tuple[str, str]] = field(default_factory=list)   # (condition, witness)

    @property
    def ok(self) -> bool:
        return not self.violations


def _pieces(n: int) -> Iterable[Term]:
    yield from enumerate_trees(n)
    yield from enumerate_contexts(n)


def verify_domination(src: TreeSource, n_max: int, max_violations: int = 20) -> DominationReport:
    """Conditions (i)-(iv) of strong domination for lambda(u) = max(1/C_|u|, P(u)).

    (i)   lambda(u) >= P(u) on trees and contexts of size <= n_max
    (ii)  lambda(f(s, t)) <= lambda(s) lambda(t) for trees, |s| + |t| <= n_max
    (iii) lambda(s(t)) <= lambda(s) lambda(t) for a context s and a tree or context t
    (iv)  the level sums stay below :func:`level_sum_bound`
    """
    rep = DominationReport(src.name, n_max)
    lam: dict[Term, Fraction] = {}

    def note(cond, witness):
        if len(rep.violations) < max_violations:
            rep.violations.append((cond, witness))

    def lam_of(u):
        v = lam.get(u)
        if v is None:
            v = lam[u] = lambda_value(src, u)
        return v

    checked = {"i": 0, "ii": 0, "iii": 0, "iv": 0}
    for n in range(1, n_max + 1):
        total = Fraction(0)
        for u in _pieces(n):
            lu = lam_of(u)
            checked["i"] += 1
            num, den = _fraction_parts(src, u)
            if lu < Fraction(num, den):
                note("i", serialize_term(u))
            total += lu
        rep.sums[n] = total
        rep.bounds[n] = level_sum_bound(src.kind, n)
        checked["iv"] += 1
        if total > rep.bounds[n]:
            note("iv", f"n={n}: sum {float(total):.6g} > {rep.bounds[n]}")
    lam[Term(hole=True)] = Fraction(1)
    for total in range(2, n_max + 1):
        for a in range(1, total):
            for s in enumerate_trees(a):
                for t in enumerate_trees(total - a):
                    checked["ii"] += 1
                    if lam_of(Term(s, t)) > lam_of(s) * lam_of(t):
                        note("ii", f"s={serialize_term(s)} t={serialize_term(t)}")
    for total in range(1, n_max + 1):
        for a in range(0, total + 1):
            ctxs = enumerate_contexts(a)
            others = list(enumerate_contexts(total - a))
            if total - a >= 1:
                others.extend(enumerate_trees(total - a))
            for s in ctxs:
                for t in others:
                    checked["iii"] += 1
                    if lam_of(substitute(s, t)) > lam_of(s) * lam_of(t):
                        note("iii", f"s={serialize_term(s)} t={serialize_term(t)}")
    rep.checked = checked
    return rep


# entropy bound

ENTROPY_CONSTANTS = {LEAF_KIND: (8, 1), DEPTH_KIND: (8, 2)}


@dataclass
class EntropyReport:
    source: str
    encoder: str
    checked: int = 0
    skipped: list[tuple[int, int, int]] = field(default_factory=list)     # (size, n, m) with m > n
    violations: list[tuple[str, int, str]] = field(default_factory=list)  # (bound, size, tree)
    min_slack: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_entropy_bound(src: TreeSource, enc: EncoderId | str, sizes: Sequence[int],
                         samples: int, seed: int = 0, rel_tol: float = 1e-9) -> EntropyReport:
    """For sampled trees check, with m = |G| and n = |t|,

        H(G)   <= -log2 P(t) + (1 + log2 c1) m + (2 + c2) m log2(n / m)
        |B(G)| <= H(G) + 5 m + 3

    ``sizes`` are leaf counts for leaf sources and depths for depth sources.
    Grammars with m > n fall outside the first bound and are listed as skipped.
    H is a float; ``rel_tol`` absorbs its rounding.
    """
    enc = EncoderId(enc)
    c1, c2 = ENTROPY_CONSTANTS[src.kind]
    rep = EntropyReport(src.name, enc.value)
    rep.min_slack = {"entropy": math.inf, "length": math.inf}
    rng = random.Random(seed)
    for size in sizes:
        i = size - 1 if src.kind == LEAF_KIND else size
        for _ in range(samples):
            t = sample(src, i, rng)
            g = compress(t, enc.compressor)
            n, m = t.size, g.size
            h = entropy(g)
            tol = rel_tol * max(1.0, h)
            length = code_length(g)
            slack_len = h + 5 * m + 3 - length
            rep.min_slack["length"] = min(rep.min_slack["length"], slack_len)
            if slack_len < -tol:
                rep.violations.append(("length", size, serialize_term(t)))
            if m > n:
                rep.skipped.append((size, n, m))
                continue
            num, den = _fraction_parts(src, t)
            rhs = -_log2_fraction(num, den) + (1 + math.log2(c1)) * m \
                + (2 + c2) * m * math.log2(n / m)
            rep.min_slack["entropy"] = min(rep.min_slack["entropy"], rhs - h)
            rep.checked += 1
            if h > rhs + tol:
                rep.violations.append(("entropy", size, serialize_term(t)))
    return rep


# CSV

CSV_COLUMNS = ("suite", "source", "encoder", "i", "n", "mode", "value", "witness_term", "average")


def report_row(r: RedundancyReport) -> dict:
    return {"suite": "redundancy", "source": r.source, "encoder": r.encoder, "i": r.i, "n": r.n,
            "mode": r.mode, "value": repr(r.value), "witness_term": serialize_term(r.witness),
            "average": "" if r.average is None else repr(r.average)}


def write_rows(path: str, rows: Iterable[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: row.get(k, "") for k in CSV_COLUMNS})
