import pytest
from hypothesis import given, settings

from oracles import brute_classes, brute_isomorphic
from strategies import trees
from treecipher.dag import MalformedDagError
from treecipher.dagrw import Cipher, DagRw, RwEdge, RwVertex, compress_rw, decompress_rw, rw_stats
from treecipher.solver import is_ciphering_isomorphic
from treecipher.tree import SignatureRegistry, canonical_classes, parse_tree


def label_equal(t1, t2):
    reg = SignatureRegistry()
    return canonical_classes(t1, "label", reg).code[0] == canonical_classes(t2, "label", reg).code[0]


def path_count(d):
    out = {}
    for e in d.edges:
        out.setdefault(e.source, []).append(e.target)
    memo = {}

    def count(v):
        if v not in memo:
            memo[v] = 1 + sum(count(w) for w in out.get(v, []))
        return memo[v]

    return count(d.source)


def test_sample_tree(sample_tree):
    d = compress_rw(sample_tree)
    assert rw_stats(d) == {"vertex_count": 5, "edge_count": 9, "cipher_payload": 11, "identity_edge_count": 5}
    tables = sorted((dict(e.cipher.table) for e in d.edges if e.cipher.kind == "Table"), key=len)
    assert tables == [
        {"3": "4"},
        {"3": "4"},
        {"2": "4", "3": "9", "4": "16"},
        {"1": "2", "2": "4", "3": "6", "4": "8", "9": "18", "16": "32"},
    ]
    targets = {e.target for e in d.edges if e.cipher.kind == "Identity"}
    assert targets == set(range(1, 5))
    assert label_equal(decompress_rw(d), sample_tree)


def test_single_node():
    d = compress_rw(parse_tree("A"))
    assert rw_stats(d) == {"vertex_count": 1, "edge_count": 0, "cipher_payload": 0, "identity_edge_count": 0}
    assert decompress_rw(d).labels == ("A",)


def test_chain_of_distinct_labels():
    t = parse_tree("a(b(c(d(e(f)))))")
    assert rw_stats(compress_rw(t))["vertex_count"] == 6


def test_json_and_dot_round_trip(sample_tree):
    d = compress_rw(sample_tree)
    again = DagRw.from_json(d.to_json())
    assert decompress_rw(again) == decompress_rw(d)
    dot = d.to_dot()
    assert "1→2;16→32" in dot and '[label="id"]' in dot


def test_malformed_inputs():
    verts = [RwVertex(0, "a", 0), RwVertex(1, "b", 1)]
    with pytest.raises(MalformedDagError, match="identity"):
        decompress_rw(DagRw(verts, [RwEdge(0, 1, Cipher("Table", (("b", "c"),)))]))
    with pytest.raises(MalformedDagError, match="bijection"):
        decompress_rw(DagRw(verts, [RwEdge(0, 1, Cipher("Identity")), RwEdge(0, 1, Cipher("Table", (("b", "c"), ("b", "d"))))]))
    with pytest.raises(MalformedDagError, match="domain"):
        decompress_rw(DagRw(verts, [RwEdge(0, 1, Cipher("Identity")), RwEdge(0, 1, Cipher("Table", (("z", "c"),)))]))
    with pytest.raises(MalformedDagError):
        decompress_rw(DagRw(verts, [RwEdge(0, 1, Cipher("Identity")), RwEdge(1, 0, Cipher("Identity"))]))
    with pytest.raises(MalformedDagError):
        Cipher.from_json({"kind": "Formula"})


@settings(max_examples=200, deadline=None)
@given(trees(max_nodes=40, alphabet="abcd"))
def test_structure_invariants(t):
    d = compress_rw(t)
    assert label_equal(decompress_rw(d), t)
    assert path_count(d) == len(t)
    out_count = {}
    for e in d.edges:
        out_count[e.source] = out_count.get(e.source, 0) + 1
    for i, v in enumerate(d.vertices):
        assert out_count.get(i, 0) == len(t.children[v.section])
        assert v.label == t.labels[v.section]
    identity_targets = {e.target for e in d.edges if e.cipher.kind == "Identity"}
    assert identity_targets == set(range(1, len(d.vertices)))


@settings(max_examples=80, deadline=None)
@given(trees(max_nodes=9, alphabet="abc"))
def test_vertices_are_ciphering_classes(t):
    d = compress_rw(t)
    assert len(d.vertices) == len(brute_classes([t], "cipher"))
    for e in d.edges:
        sub_rep = t.subtree(d.vertices[e.target].section)
        sub = t.subtree(e.node)
        table = e.cipher.as_dict() or {a: a for a in sub_rep.alphabet()}
        assert brute_isomorphic(sub_rep.relabel([table[a] for a in sub_rep.labels]), sub, "label")


@settings(max_examples=60, deadline=None)
@given(trees(max_nodes=20, alphabet="ab"))
def test_same_class_vertices_are_not_equivalent(t):
    d = compress_rw(t)
    by_class = {}
    for v in d.vertices:
        by_class.setdefault(v.class_id, []).append(v.section)
    for sections in by_class.values():
        for i, a in enumerate(sections):
            for b in sections[i + 1:]:
                assert not is_ciphering_isomorphic(t.subtree(a), t.subtree(b)).isomorphic


def test_step_limit_keeps_losslessness():
    t = parse_tree("r(s(a,b,c,d,e,f),s(f,e,d,c,b,a),s(g,h,i,j,k,l))")
    d = compress_rw(t, step_limit=1)
    assert label_equal(decompress_rw(d), t)
    assert d.unknown_tests == 1
    assert rw_stats(d)["vertex_count"] == rw_stats(compress_rw(t))["vertex_count"] + 1
