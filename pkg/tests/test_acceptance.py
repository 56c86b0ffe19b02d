"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line (also collected into the terminal
summary). Time budgets are asserted alongside the numeric checks.
"""

import math
import time
from fractions import Fraction

import pytest

from tslpcode.coder import (code_parts, decode, encode, multiset_count, rank_multiset_word,
                            unrank_multiset_word)
from tslpcode.compressor import CompressorId, compress, gamma
from tslpcode.dag import build_minimal_dag, dag_size
from tslpcode.harness import level_sum_bound, redundancy, verify_domination, verify_entropy_bound
from tslpcode.sources import (BstUniform, DepthBalancedUniform, DepthUniform, LeafBalancedUniform,
                              TreeSource, prob_tree)
from tslpcode.trees import caterpillar, enumerate_depth_class, enumerate_trees, \
    is_beta_depth_balanced
from tslpcode.tslp import evaluate

from conftest import ACCEPTANCE_LINES, EXAMPLE_NF

BST = TreeSource(BstUniform())
DEPTH = TreeSource(DepthUniform())
S_CAP = 10 ** 4          # largest multiset class |S| in the rank/unrank sweep
LENGTH_CAP = 10          # longest word in that sweep


def verdict(num, ok, detail):
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


class Clock:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def test_c01_worked_example():
    best = math.inf
    for _ in range(5):
        with Clock() as clk:
            parts = code_parts(EXAMPLE_NF)
            bits = encode(EXAMPLE_NF)
            g, used = decode(bits)
        best = min(best, clk.seconds)
    words = (parts.w0, parts.w1, parts.w2, parts.w3, parts.w4)
    ok = (words == ("00001", "0011000011", "11110000", "110101", "1000") and len(bits) == 33
          and used == 33 and g == EXAMPLE_NF and best < 1e-3)
    verdict(1, ok, f"words={' '.join(words)} bits={len(bits)} roundtrip={g == EXAMPLE_NF} "
                   f"time={best * 1e3:.3f}ms")


def test_c02_lossless_roundtrip():
    bad, count = [], 0
    with Clock() as clk:
        for n in range(1, 11):
            for t in enumerate_trees(n):
                for which in CompressorId:
                    bits = encode(compress(t, which))
                    g, used = decode(bits)
                    count += 1
                    if used != len(bits) or evaluate(g) != t:
                        bad.append((which.value, t))
    ok = not bad and count == 2 * 6918 and clk.seconds < 60
    verdict(2, ok, f"{count} round trips over 6918 trees, failures={len(bad)} time={clk.seconds:.1f}s")


def test_c03_prefix_free():
    with Clock() as clk:
        codes = sorted({encode(compress(t, which)) for n in range(1, 9)
                        for t in enumerate_trees(n) for which in CompressorId})
        clashes = [(x, y) for x, y in zip(codes, codes[1:]) if y.startswith(x)]
    # in sorted order a proper prefix is always immediately followed by an extension of it
    ok = not clashes and clk.seconds < 60
    verdict(3, ok, f"{len(codes)} distinct codewords, prefix pairs={len(clashes)} time={clk.seconds:.1f}s")


def _profiles(cap=S_CAP, max_len=LENGTH_CAP):
    # compositions (all counts >= 1); |S| only grows when a part grows or is added
    def grow(prefix):
        if prefix:
            yield prefix
        if sum(prefix) >= max_len:
            return
        for c in range(1, max_len - sum(prefix) + 1):
            nxt = prefix + (c,)
            if multiset_count(nxt) > cap:
                break
            yield from grow(nxt)
    yield from grow(())


def test_c04_enumerative_coding():
    profiles = words = 0
    bad = []
    with Clock() as clk:
        for counts in _profiles():
            profiles += 1
            pairs = list(enumerate(counts))
            alphabet = range(len(counts))
            prev = None
            for i in range(multiset_count(counts)):
                w = unrank_multiset_word(pairs, i)
                words += 1
                if rank_multiset_word(w, alphabet) != i or (prev is not None and not prev < w):
                    bad.append((counts, i))
                prev = w
    example = ["A3", "A4", "a", "a"]
    order = ["a", "A3", "A4"]
    ex_rank = rank_multiset_word(example, order)
    ex_size = multiset_count([2, 1, 1])
    ex_back = unrank_multiset_word([("a", 2), ("A3", 1), ("A4", 1)], 8)
    ok = not bad and ex_rank == 8 and ex_size == 12 and list(ex_back) == example
    verdict(4, ok, f"{profiles} profiles (length <= {LENGTH_CAP}, |S| <= {S_CAP}), {words} words, "
                   f"failures={len(bad)}; rank(A3 A4 a a)={ex_rank} |S|={ex_size} "
                   f"time={clk.seconds:.1f}s")


def test_c05_source_normalization():
    leaf = {"bst": BST, "leaf-balanced:3": TreeSource(LeafBalancedUniform(3)),
            "leaf-balanced:4": TreeSource(LeafBalancedUniform(4))}
    depth = {"depth-uniform": DEPTH, "depth-balanced:0": TreeSource(DepthBalancedUniform(0)),
             "depth-balanced:1": TreeSource(DepthBalancedUniform(1)),
             "depth-balanced:2": TreeSource(DepthBalancedUniform(2))}
    bad = []
    with Clock() as clk:
        classes = {n: enumerate_trees(n) for n in range(1, 13)}
        for name, src in leaf.items():
            for n, ts in classes.items():
                if sum((prob_tree(src, t) for t in ts), Fraction(0)) != 1:
                    bad.append((name, n))
        for name, src in depth.items():
            for d in range(5):
                if sum((prob_tree(src, t) for t in enumerate_depth_class(d)), Fraction(0)) != 1:
                    bad.append((name, d))
    ok = not bad and clk.seconds < 120
    verdict(5, ok, f"{len(leaf)} leaf sources n<=12, {len(depth)} depth sources d<=4, "
                   f"non-unit sums={bad} time={clk.seconds:.1f}s")


@pytest.fixture(scope="module")
def domination():
    sources = {"bst": BST, "depth-uniform": DEPTH,
               "leaf-balanced:3": TreeSource(LeafBalancedUniform(3)),
               "depth-balanced:1": TreeSource(DepthBalancedUniform(1))}
    return {name: verify_domination(src, 8) for name, src in sources.items()}


def test_c06_domination_sums(domination):
    over = []
    margins = {}
    for name, rep in domination.items():
        for n, s in rep.sums.items():
            if s > level_sum_bound(rep_kind(name), n):
                over.append((name, n))
        margins[name] = f"{float(rep.sums[8]):.3f}/{level_sum_bound(rep_kind(name), 8)}"
    ok = not over and all(len(r.sums) == 8 for r in domination.values())
    verdict(6, ok, f"n<=8 sums at n=8: {margins} exceedances={over}")


def rep_kind(name):
    return "depth" if name.startswith("depth") else "leaf"


def test_c07_domination_closure(domination):
    monotone = ("bst", "depth-uniform")
    found = {name: [v for v in domination[name].violations if v[0] in ("ii", "iii")]
             for name in monotone}
    checked = {name: domination[name].checked["ii"] + domination[name].checked["iii"] for name in monotone}
    ok = not any(found.values())
    verdict(7, ok, f"total size <= 8, pairs checked={checked} violations="
                   f"{ {k: len(v) for k, v in found.items()} }")


def test_c08_entropy_bound():
    sizes = [2 ** k for k in range(6, 15)]
    with Clock() as clk:
        rep = verify_entropy_bound(BST, "tslp", sizes, samples=100, seed=0)
    ok = rep.ok and rep.checked > 0 and clk.seconds < 300
    verdict(8, ok, f"bst sizes 2^6..2^14 x100 seed 0 (c1=8, c2=1): checked={rep.checked} "
                   f"skipped(m>n)={len(rep.skipped)} violations={len(rep.violations)} "
                   f"min slack entropy={rep.min_slack['entropy']:.1f} "
                   f"length={rep.min_slack['length']:.1f} time={clk.seconds:.1f}s")


def test_c09_depth_balanced_size():
    bad, hits = [], 0
    for n in range(1, 13):
        for t in enumerate_trees(n):
            for beta in range(4):
                if is_beta_depth_balanced(t, beta):
                    hits += 1
                    if t.size < (1 + 1 / (1 + beta)) ** t.depth:
                        bad.append((beta, t))
    verdict(9, not bad, f"n<=12, beta 0..3: balanced cases={hits} violations={len(bad)}")


def test_c10_caterpillar():
    rows, bad = [], []
    with Clock() as clk:
        for k in range(4, 13):
            n = 2 ** k
            t = caterpillar(n)
            d = dag_size(build_minimal_dag(t))
            m = compress(t, CompressorId.BISECTION).size
            rows.append(f"{n}:{d}/{m}")
            if d != n + 1 or m > 64 * math.log2(n):
                bad.append(n)
    ok = not bad and clk.seconds < 60
    verdict(10, ok, f"n:dag/tslp {' '.join(rows)} (bound 64 log2 n) time={clk.seconds:.1f}s")


def test_c11_redundancy_trend():
    with Clock() as clk:
        exact = {i: redundancy("tslp", BST, i).value for i in range(2, 13)}
        sampled = {i: redundancy("tslp", BST, i, exact=False, samples=1000, seed=0).value
                   for i in (2 ** 6, 2 ** 8, 2 ** 10, 2 ** 12)}
    series = {**exact, **sampled}
    lo, hi = min(series), max(series)
    ok = series[hi] < series[lo] and clk.seconds < 600
    verdict(11, ok, f"R(bst, i={lo})={series[lo]:.3f} R(i={hi})={series[hi]:.3f} "
                    f"sampled {[round(v, 3) for v in sampled.values()]} time={clk.seconds:.1f}s")


def test_c12_gamma_non_increasing():
    with Clock() as clk:
        values = {n: gamma(CompressorId.BISECTION, n).value for n in range(8, 13)}
    rises = [n for n in range(9, 13) if values[n] > values[n - 1]]
    ok = not rises and clk.seconds < 300
    verdict(12, ok, f"gamma_bisection n=8..12: {[round(v, 4) for v in values.values()]} "
                    f"increases at n={rises} time={clk.seconds:.1f}s")
