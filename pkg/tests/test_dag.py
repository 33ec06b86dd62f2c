from collections import Counter

import pytest
from hypothesis import given, settings

from oracles import brute_classes
from strategies import trees
from treecipher.dag import PLACEHOLDER, Dag, MalformedDagError, compress, dag_stats, decompress, expanded_size
from treecipher.synthgen import GenSpec, gen_tree
from treecipher.tree import SignatureRegistry, canonical_classes, parse_tree


def same_class(t1, t2, relation):
    reg = SignatureRegistry()
    return canonical_classes(t1, relation, reg).code[0] == canonical_classes(t2, relation, reg).code[0]


def test_sample_tree_topo(sample_tree):
    d = compress(sample_tree, "topo")
    assert len(d.vertices) == 4
    assert d.edges == [(0, 1, 2), (1, 2, 3), (2, 3, 2)]
    assert dag_stats(d)["vertex_count"] == 4


def test_sample_tree_label(sample_tree):
    d = compress(sample_tree, "label")
    assert dag_stats(d)["vertex_count"] == 17
    assert all(v.label == sample_tree.labels[v.repr] for v in d.vertices)
    assert same_class(decompress(d), sample_tree, "label")


def test_single_node():
    d = compress(parse_tree("A"), "label")
    assert dag_stats(d) == {"vertex_count": 1, "edge_count": 0, "compaction_ratio": 1.0}
    assert decompress(d).labels == ("A",)
    assert decompress(compress(parse_tree("A"), "topo")).labels == (PLACEHOLDER,)


def test_repr_is_first_preorder_node(sample_tree):
    d = compress(sample_tree, "topo")
    code = canonical_classes(sample_tree, "topo").code
    for v in d.vertices:
        assert v.repr == min(u for u in range(len(sample_tree)) if code[u] == code[v.repr])


def test_multiplicities_sum_to_child_counts(sample_tree):
    for relation in ("topo", "label"):
        d = compress(sample_tree, relation)
        totals = Counter()
        for a, _, m in d.edges:
            totals[a] += m
        for i, v in enumerate(d.vertices):
            assert totals[i] == len(sample_tree.children[v.repr])


def test_json_round_trip(sample_tree):
    d = compress(sample_tree, "label")
    again = Dag.from_json(d.to_json())
    assert decompress(again) == decompress(d)


def test_dot_export(sample_tree):
    dot = compress(sample_tree, "topo").to_dot()
    assert dot.startswith("digraph") and '[label="2"]' in dot


@pytest.mark.parametrize(
    "edges, source",
    [([(0, 1, 1), (1, 0, 1)], 0), ([(0, 1, 1)], 0), ([(0, 1, 0), (1, 2, 1)], 0)],
)
def test_malformed_dags(edges, source):
    from treecipher.dag import DagVertex

    d = Dag("topo", [DagVertex(i, None, i) for i in range(3)], edges, source)
    with pytest.raises(MalformedDagError):
        decompress(d)


def test_random_topo_round_trip():
    for seed in range(1000):
        n = 1 + seed % 50
        t = gen_tree(GenSpec(n, 0.5, seed))
        assert same_class(decompress(compress(t, "topo")), t, "topo")


@settings(max_examples=150, deadline=None)
@given(trees(max_nodes=30))
def test_idempotent_and_lossless(t):
    for relation in ("topo", "label"):
        d = compress(t, relation)
        assert expanded_size(d) == len(t)
        again = compress(decompress(d), relation)
        assert len(again.vertices) == len(d.vertices)
        assert sorted(m for *_, m in again.edges) == sorted(m for *_, m in d.edges)
    assert same_class(decompress(compress(t, "label")), t, "label")


@settings(max_examples=60, deadline=None)
@given(trees(max_nodes=9, alphabet="ab"))
def test_vertex_count_matches_brute_force(t):
    for relation in ("topo", "label"):
        assert len(compress(t, relation).vertices) == len(brute_classes([t], relation))
