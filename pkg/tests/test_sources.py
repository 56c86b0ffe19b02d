import json
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tslpcode.sources import (BstUniform, DepthBalancedUniform, DepthUniform, LeafBalancedUniform,
                              TableSigma, TreeSource, check_monotone, check_normalized,
                              class_members, class_size, depth_class_size, is_depth_balanced,
                              is_leaf_balanced, lambda_value, load_table, log2_prob,
                              parse_source, prob_context, prob_tree, sample)
from tslpcode.trees import (HOLE, LEAF, catalan, caterpillar, enumerate_depth_class,
                            enumerate_trees, is_beta_balanced, is_beta_depth_balanced, parse_term)

from conftest import trees

BST = TreeSource(BstUniform())
DEPTH = TreeSource(DepthUniform())


def adversarial_table(bound=8):
    # all weight on the most even split: not monotone in either argument
    return TableSigma("leaf", bound, {(-(-n // 2), n - -(-n // 2)): 1 for n in range(2, bound + 1)})


def test_probability_examples():
    assert prob_tree(BST, LEAF) == 1 and prob_tree(DEPTH, LEAF) == 1
    assert prob_tree(BST, parse_term("f(f(a,a),a)")) == Fraction(1, 2)
    assert [prob_tree(DEPTH, t) for t in enumerate_depth_class(2)] == [Fraction(1, 3)] * 3


def test_context_probabilities():
    for c in ("f(x,a)", "f(a,x)"):
        assert prob_context(BST, parse_term(c)) == 1
    assert prob_context(BST, HOLE) == 1 and prob_context(DEPTH, HOLE) == 1
    # depths are measured in c(a): f(x,a) has children of depth 0 and 0
    assert prob_context(DEPTH, parse_term("f(x,a)")) == DepthUniform()(0, 0) == 1
    assert prob_context(DEPTH, parse_term("f(f(x,a),a)")) == Fraction(1, 3)
    assert prob_context(BST, parse_term("f(f(x,a),f(a,a))")) == Fraction(1, 2)


def test_tree_and_context_entry_points_check_kind():
    with pytest.raises(ValueError):
        prob_tree(BST, HOLE)
    with pytest.raises(ValueError):
        prob_context(BST, LEAF)


@pytest.mark.parametrize("sigma", [BstUniform(), LeafBalancedUniform(3), LeafBalancedUniform(4),
                                   LeafBalancedUniform(Fraction(7, 2))])
def test_leaf_normalization(sigma):
    src = TreeSource(sigma)
    assert check_normalized(sigma, 60) is None
    for n in range(1, 10):
        assert sum(prob_tree(src, t) for t in enumerate_trees(n)) == 1


@pytest.mark.parametrize("sigma", [DepthUniform(), DepthBalancedUniform(0), DepthBalancedUniform(1),
                                   DepthBalancedUniform(2)])
def test_depth_normalization(sigma):
    src = TreeSource(sigma)
    assert check_normalized(sigma, 40) is None
    for d in range(4):
        assert sum(prob_tree(src, t) for t in enumerate_depth_class(d)) == 1


def test_lambda_examples():
    assert lambda_value(BST, LEAF) == 1
    assert lambda_value(BST, parse_term("f(x,a)")) == 1
    assert lambda_value(BST, parse_term("f(a,x)")) == 1
    assert sum(lambda_value(BST, parse_term(u)) for u in ("a", "f(x,a)", "f(a,x)")) == 3
    assert lambda_value(DEPTH, parse_term("f(f(a,a),a)")) == Fraction(1, 3)
    assert lambda_value(BST, HOLE) == 1


@given(trees(30))
def test_lambda_dominates(t):
    assert lambda_value(BST, t) >= prob_tree(BST, t)
    assert lambda_value(BST, t) >= Fraction(1, catalan(t.size))


@given(trees(60))
def test_log2_matches_exact(t):
    for src in (BST, DEPTH):
        p = prob_tree(src, t)
        assert log2_prob(src, t) == pytest.approx(math.log2(p), rel=1e-12, abs=1e-12)


def test_zero_probability_log():
    src = TreeSource(LeafBalancedUniform(3))
    assert prob_tree(src, caterpillar(5)) == 0
    assert log2_prob(src, caterpillar(5)) == -math.inf


def test_large_tree_log_probability():
    t = sample(BST, 1 << 15, seed=1)
    lp = log2_prob(BST, t)
    assert math.isfinite(lp) and lp < 0


def test_monotonicity():
    assert check_monotone(BstUniform(), 40)
    assert check_monotone(DepthUniform(), 40)
    # weight only on the leftmost split is still monotone in both arguments
    first_left = TableSigma("leaf", 20, {(1, n - 1): 1 for n in range(2, 21)})
    assert check_monotone(first_left, 20)
    first_right = TableSigma("leaf", 20, {(n - 1, 1): 1 for n in range(2, 21)})
    assert check_monotone(first_right, 20)
    assert not check_monotone(adversarial_table(), 8)
    assert not check_monotone(LeafBalancedUniform(3), 20)
    assert not check_monotone(DepthBalancedUniform(1), 20)


def test_balance_predicates():
    assert is_leaf_balanced(LeafBalancedUniform(3), 3, 60)
    assert is_leaf_balanced(LeafBalancedUniform(Fraction(9, 2)), Fraction(9, 2), 60)
    assert not is_leaf_balanced(BstUniform(), 10, 40)
    assert is_depth_balanced(DepthBalancedUniform(1), 1, 30)
    assert not is_depth_balanced(DepthUniform(), 3, 10)


def test_balanced_sources_produce_balanced_trees():
    for seed in range(5):
        assert is_beta_balanced(sample(TreeSource(LeafBalancedUniform(3)), 300, seed), 2)
        assert is_beta_depth_balanced(sample(TreeSource(DepthBalancedUniform(1)), 9, seed), 1)


def test_leaf_balanced_needs_c_at_least_three():
    with pytest.raises(ValueError):
        LeafBalancedUniform(2)


def test_depth_balanced_builtin_values():
    s = DepthBalancedUniform(1)
    assert s(3, 2) == s(3, 3) == s(2, 3) == Fraction(1, 3)
    assert s(3, 1) == 0
    assert s(0, 0) == 1


def test_sample_small_classes():
    assert sample(BST, 0, seed=5) == LEAF
    assert sample(BST, 1, seed=5) == parse_term("f(a,a)")
    for seed in range(10):
        assert sample(DEPTH, 4, seed).depth == 4
        assert sample(BST, 9, seed).size == 10


def test_sample_deterministic():
    assert sample(BST, 200, seed=11) == sample(BST, 200, seed=11)
    rng_a, rng_b = random.Random(3), random.Random(3)
    assert [sample(DEPTH, 5, rng_a) for _ in range(5)] == [sample(DEPTH, 5, rng_b) for _ in range(5)]


def _frequencies_match(src, i, count, seed):
    rng = random.Random(seed)
    hits = {}
    for _ in range(count):
        t = sample(src, i, rng)
        hits[t] = hits.get(t, 0) + 1
    for t in class_members(src, i):
        p = float(prob_tree(src, t))
        sd = math.sqrt(count * p * (1 - p))
        assert abs(hits.get(t, 0) - count * p) <= 3 * sd + 1e-9


def test_sampler_frequencies_bst():
    _frequencies_match(BST, 3, 100_000, seed=0)


def test_sampler_frequencies_generic_table():
    # goes through the rational table path instead of a closed-form draw
    table = TableSigma("leaf", 5, {(1, 1): 1, (1, 2): Fraction(1, 4), (2, 1): Fraction(3, 4),
                                   (1, 3): Fraction(1, 2), (2, 2): Fraction(1, 3),
                                   (3, 1): Fraction(1, 6), (1, 4): 1})
    _frequencies_match(TreeSource(table), 3, 20_000, seed=1)


def test_sampler_frequencies_depth():
    _frequencies_match(DEPTH, 3, 20_000, seed=2)


def test_class_sizes():
    assert [class_size(BST, i) for i in range(6)] == [1, 1, 2, 5, 14, 42]
    assert [depth_class_size(d) for d in range(6)] == [1, 1, 3, 21, 651, 457653]
    assert len(class_members(DEPTH, 3)) == 21


def test_table_loading(tmp_path):
    path = tmp_path / "sigma.json"
    path.write_text(json.dumps({"kind": "leaf", "bound": 3,
                                "entries": [[1, 1, "1"], [1, 2, "1/3"], [2, 1, "2/3"]]}))
    src = parse_source(f"table:{path}")
    assert prob_tree(src, parse_term("f(f(a,a),a)")) == Fraction(2, 3)
    with pytest.raises(ValueError, match="bound"):
        src.sigma(2, 2)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "leaf", "bound": 3, "entries": [[1, 1, "1"], [1, 2, "1/3"]]}))
    with pytest.raises(ValueError, match="level 3"):
        load_table(str(bad))
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps({"kind": "leaf"}))
    with pytest.raises(ValueError, match="malformed"):
        load_table(str(broken))


def test_parse_source_names():
    assert isinstance(parse_source("bst").sigma, BstUniform)
    assert isinstance(parse_source("depth-uniform").sigma, DepthUniform)
    assert parse_source("leaf-balanced:7/2").sigma.c == Fraction(7, 2)
    assert parse_source("depth-balanced:2").sigma.c == 2
    for bad in ("nope", "bst:3", "leaf-balanced", "table:"):
        with pytest.raises(ValueError):
            parse_source(bad)


@given(st.integers(0, 20), st.integers(0, 20))
def test_catalan_supermultiplicative(m, k):
    assert catalan(m + k) >= catalan(m) * catalan(k)


@pytest.mark.parametrize("n", range(1, 11))
def test_depth_source_tree_sum(n):
    total = sum(prob_tree(DEPTH, t) for t in enumerate_trees(n))
    assert total <= n - math.ceil(math.log2(n))
