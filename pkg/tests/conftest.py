import random

import pytest
from hypothesis import settings, strategies as st

from tslpcode.compressor import uniform_tree
from tslpcode.sources import BstUniform, TreeSource, sample
from tslpcode.trees import HOLE, Term
from tslpcode.tslp import NormalFormTslp, parse_grammar

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# the five-rule worked example: A0 -> A1(A2), A1 -> f(x,A3), A2 -> A4(A3), A3 -> A4(a), A4 -> f(x,a)
EXAMPLE_NF = NormalFormTslp((0, 3, 0, 0, 3), (1, 2, 3, 4, 3, 4, 0, 0))
EXAMPLE_TREE = "f(f(f(a,a),a),f(a,a))"
EXAMPLE_GRAMMAR_TEXT = """
A0 -> f(A1, A2(a))
A1 -> A2(A2(a))
A2 -> f(x, a)
"""


@pytest.fixture
def example_nf():
    return EXAMPLE_NF


@pytest.fixture
def example_grammar():
    return parse_grammar(EXAMPLE_GRAMMAR_TEXT)


@st.composite
def trees(draw, max_leaves=40):
    n = draw(st.integers(1, max_leaves))
    seed = draw(st.integers(0, 2**32 - 1))
    return uniform_tree(n, random.Random(seed))


@st.composite
def contexts(draw, max_leaves=30):
    t = draw(trees(max_leaves))
    # replace one leaf (chosen by preorder index among leaves) with the hole
    k = draw(st.integers(0, t.size - 1))
    return _hole_at(t, k)


def _hole_at(t, k):
    if t.left is None:
        return HOLE
    if k < t.left.size:
        return Term(_hole_at(t.left, k), t.right)
    return Term(t.left, _hole_at(t.right, k - t.left.size))


def bst_sample(n, seed):
    return sample(TreeSource(BstUniform()), n - 1, seed)


# one verdict line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
