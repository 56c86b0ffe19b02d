"""Grammar-based coding of binary trees with normal-form TSLPs."""

from .coder import decode, encode, read_container, write_container
from .compressor import CompressorId, compress, gamma
from .dag import build_minimal_dag, dag_size, dag_to_normal_tslp, unfold
from .sources import TreeSource, lambda_value, parse_source, prob_context, prob_tree, sample
from .trees import Term, caterpillar, catalan, enumerate_trees, parse_term, serialize_term
from .tslp import NormalFormTslp, Tslp, evaluate, entropy, normalize, parse_grammar, \
    validate_normal_form

__version__ = "0.1.0"
