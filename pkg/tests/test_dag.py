import pytest
from hypothesis import given

from tslpcode.dag import Dag, build_minimal_dag, dag_size, dag_to_normal_tslp, unfold
from tslpcode.sources import parse_source, sample
from tslpcode.trees import LEAF, caterpillar, enumerate_trees, iter_preorder, parse_term
from tslpcode.tslp import G_A, evaluate, validate_normal_form

from conftest import trees


def distinct_subtrees(t):
    return len(set(iter_preorder(t)))


def test_shared_pair():
    d = build_minimal_dag(parse_term("f(f(a,a),f(a,a))"))
    assert d.rules == ((1, 1), (0, 0))
    assert dag_size(d) == 3


def test_caterpillar_rules_point_down_the_chain():
    d = build_minimal_dag(caterpillar(3))
    assert d.rules == ((1, 0), (2, 0), (0, 0))
    assert dag_size(d) == 4
    assert unfold(build_minimal_dag(caterpillar(2))) == parse_term("f(f(a,a),a)")


def test_single_leaf():
    d = build_minimal_dag(LEAF)
    assert d.rules == () and dag_size(d) == 1
    assert unfold(d) == LEAF
    assert dag_to_normal_tslp(d) == G_A


def test_size_of_pair():
    assert dag_size(build_minimal_dag(parse_term("f(a,a)"))) == 2


def test_index_order_enforced():
    with pytest.raises(ValueError):
        Dag(((0, 0), (1, 0)))


def test_contexts_rejected():
    with pytest.raises(ValueError):
        build_minimal_dag(parse_term("f(x,a)"))


def test_conversion_of_pair():
    g = dag_to_normal_tslp(build_minimal_dag(parse_term("f(a,a)")))
    assert g.types == (0, 3) and g.rho == (1, 0, 0)
    assert g.size == 3


@pytest.mark.parametrize("n", range(1, 11))
def test_exhaustive_minimality(n):
    for t in enumerate_trees(n):
        d = build_minimal_dag(t)
        assert dag_size(d) == distinct_subtrees(t)
        assert unfold(d) == t
        if n <= 9:
            g = dag_to_normal_tslp(d)
            assert evaluate(g) == t
            assert validate_normal_form(g).ok
            assert g.size <= 4 * dag_size(d)


@given(trees(80))
def test_idempotent_and_canonical(t):
    d = build_minimal_dag(t)
    assert build_minimal_dag(unfold(d)) == d
    copy = parse_term(str(t))
    assert build_minimal_dag(copy) == d


@pytest.mark.parametrize("k", [4, 8, 12])
def test_caterpillar_worst_case(k):
    assert dag_size(build_minimal_dag(caterpillar(1 << k))) == (1 << k) + 1


def _mean_dag_ratio(src, i, samples=10):
    total = 0.0
    for seed in range(samples):
        t = sample(src, i, seed)
        total += dag_size(build_minimal_dag(t)) / t.size
    return total / samples


@pytest.mark.parametrize("name, classes", [
    ("leaf-balanced:3", [2 ** k - 1 for k in range(8, 15)]),
    ("depth-balanced:1", list(range(8, 15))),
])
def test_balanced_trees_share_more_as_they_grow(name, classes):
    src = parse_source(name)
    ratios = [_mean_dag_ratio(src, i) for i in classes]
    assert all(b < a for a, b in zip(ratios, ratios[1:])), ratios
