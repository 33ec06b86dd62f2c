import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from samples import GROWTH_TREE, bfs_ids
from oracles import brute_isomorphic
from strategies import shuffled_copy, trees
from treecipher.solver import (
    Bijection,
    SearchState,
    SearchTrace,
    Verdict,
    backtrack,
    deduction_phase,
    ext_bij,
    find_isomorphism,
    is_ciphering_isomorphic,
    map_nodes,
    next_candidates,
    search_space_size,
    split_children,
    verify_ciphering,
)
from treecipher.tree import LabeledTree, parse_tree

# -- extension of bijections ---------------------------------------------------


def test_ext_bij_examples():
    f = Bijection()
    assert ext_bij(f, "B", "β") and f.forward == {"B": "β"}
    assert ext_bij(f, "B", "β") and f.forward == {"B": "β"}
    assert not ext_bij(f, "A", "β") and f.forward == {"B": "β"} and f.backward == {"β": "B"}
    assert not ext_bij(f, "B", "α")


def test_bijection_rejects_non_injective_pairs():
    with pytest.raises(ValueError):
        Bijection({"a": "x", "b": "x"})


# -- MapNodes ------------------------------------------------------------------


def whole_bag_state(t1, t2):
    st_ = SearchState(t1, t2)
    st_.add_bag(set(range(len(t1))), set(range(len(t2))))
    return st_


def test_map_roots_of_running_example(running_pair):
    st_ = whole_bag_state(*running_pair)
    assert map_nodes(st_, 0, 0)
    assert st_.f.forward == {"B": "β"}
    assert st_.phi.forward == {0: 0}
    sizes = sorted(len(b) for b in st_.bags.values())
    assert sizes == [5, 10]


def test_map_nodes_label_clash(running_pair):
    st_ = whole_bag_state(*running_pair)
    st_.f.extend("B", "α")
    assert not map_nodes(st_, 0, 0)


def test_map_nodes_parent_mismatch():
    t = parse_tree("r(a(c),a(c))")
    st_ = SearchState(t, t)
    st_.phi.extend(0, 0)
    st_.phi.extend(1, 1)
    st_.f.extend("r", "r")
    st_.f.extend("a", "a")
    st_.add_bag({3}, {3})
    st_.add_bag({2, 4}, {2, 4})
    assert not map_nodes(st_, 2, 4)


def test_map_nodes_inside_collection_leaves_residual_bag():
    t = parse_tree("r(x,x,x)")
    st_ = SearchState(t, t)
    st_.phi.extend(0, 0)
    st_.f.extend("r", "r")
    st_.add_collection({"x": {1, 2, 3}}, {"x": {1, 2, 3}})
    assert map_nodes(st_, 2, 3)
    assert not st_.colls
    assert [(b.b1, b.b2) for b in st_.bags.values()] == [({1, 3}, {1, 2})]


# -- SplitChildren -------------------------------------------------------------


def test_split_bag_and_descendants():
    t = parse_tree("r(u(x(y),x(y),x(y)),w(x(y)))")
    xs = {u for u in range(len(t)) if t.labels[u] == "x"}
    ys = {u for u in range(len(t)) if t.labels[u] == "y"}
    st_ = SearchState(t, t)
    st_.add_bag(set(xs), set(xs))
    st_.add_bag(set(ys), set(ys))
    assert split_children(st_, {1}, {1})
    assert sorted(len(b) for b in st_.bags.values()) == [1, 1, 3, 3]
    under_u = set(t.subtree_nodes(1))
    for b in st_.bags.values():
        assert b.b1 <= under_u or not (b.b1 & under_u)


def test_split_collection_set_of_five():
    t = parse_tree("r(u(x,x,x),w(x,x))")
    xs = {u for u in range(len(t)) if t.labels[u] == "x"}
    st_ = SearchState(t, t)
    st_.add_collection({"x": set(xs)}, {"x": set(xs)})
    assert split_children(st_, {1}, {1})
    sets = sorted(len(c.c1["x"]) for c in st_.colls.values())
    assert sets == [2, 3]
    assert all(c.balanced() for c in st_.colls.values())


def test_split_childless_is_noop():
    t = parse_tree("r(a,b)")
    st_ = SearchState(t, t)
    st_.add_bag({1, 2}, {1, 2})
    assert split_children(st_, {1}, {1})
    assert [(b.b1, b.b2) for b in st_.bags.values()] == [({1, 2}, {1, 2})]


def test_split_detects_cardinality_mismatch():
    t1, t2 = parse_tree("r(u(x,x),x)"), parse_tree("r(u(x),x,x)")
    st_ = SearchState(t1, t2)
    st_.add_bag({2, 3, 4}, {2, 3, 4})
    assert not split_children(st_, {1}, {1})


# -- search space size -----------------------------------------------------------


def test_search_space_size_examples():
    t = parse_tree("r(a,a,a,b,b,c,c)")
    st_ = SearchState(t, t)
    assert search_space_size(st_) == 1
    st_.add_bag({1, 2, 3}, {1, 2, 3})
    st_.add_collection({"b": {4, 5}, "c": {6, 7}}, {"b": {4, 5}, "c": {6, 7}})
    assert search_space_size(st_) == 6 * (2 * 2 * 2) == 48


def test_running_example_snapshots(running_pair):
    res = is_ciphering_isomorphic(*running_pair)
    assert res.trace.phase_sizes() == [11_496_038_400, 2_073_600, 69_120, 4_608, 256, 8]
    d_size = dict(res.trace.snapshots)["D"]
    assert d_size == 2**3 * 24**2


def test_local_growth_trace():
    t = parse_tree(GROWTH_TREE)
    res = is_ciphering_isomorphic(t, t)
    merged = []
    for n in res.trace.sizes():
        if not merged or merged[-1] != n:
            merged.append(n)
    assert merged == [479_001_600, 241_920, 80_640, 768, 384, 576]


def test_single_node_deductions():
    t = parse_tree("A")
    res = is_ciphering_isomorphic(t, t)
    assert res.verdict is Verdict.ISOMORPHIC
    assert set(res.trace.sizes()) == {1}


# -- candidates and backtracking -------------------------------------------------


def test_next_candidates_after_deductions(running_pair):
    t1, t2 = running_pair
    st_ = deduction_phase(t1, t2)
    assert search_space_size(st_) == 8
    u, v = bfs_ids(t1), bfs_ids(t2)
    flag, cands = next_candidates(st_)
    assert flag == "bags"
    assert cands == [(u[8], v[6]), (u[8], v[7])]


def test_next_candidates_prefers_largest_set_size():
    t = parse_tree("r(a,a,a,b,b,b,c,c)")
    st_ = SearchState(t, t)
    st_.add_collection({"a": {1, 2, 3}, "b": {4, 5, 6}}, {"a": {1, 2, 3}, "b": {4, 5, 6}})
    st_.add_collection({"c": {7, 8}}, {"c": {7, 8}})
    flag, cands = next_candidates(st_)
    assert flag == "collections"
    assert cands == [(frozenset({1, 2, 3}), frozenset({1, 2, 3})), (frozenset({1, 2, 3}), frozenset({4, 5, 6}))]
    assert next_candidates(SearchState(t, t)) == ("empty", [])


def test_running_example_without_backtracking(running_pair):
    t1, t2 = running_pair
    res = is_ciphering_isomorphic(t1, t2)
    assert res.verdict is Verdict.ISOMORPHIC
    u, v = bfs_ids(t1), bfs_ids(t2)
    # the first candidate of each choice point is accepted: root state plus two choices
    assert res.trace.states_visited == 3
    assert res.mapping[u[8]] == v[6]
    assert (res.mapping[u[3]], res.mapping[u[2]], res.mapping[u[4]], res.mapping[u[5]]) == (v[2], v[3], v[5], v[4])
    assert {k: res.cipher[k] for k in "ABC"} == {"A": "α", "B": "β", "C": "γ"}
    assert {res.cipher["D"], res.cipher["E"]} == {"δ", "η"}
    assert verify_ciphering(t1, t2, res.mapping, res.cipher)


def test_pattern_pair(pattern_pair):
    t1, t2 = pattern_pair
    res = is_ciphering_isomorphic(t1, t2)
    assert res.verdict is Verdict.ISOMORPHIC
    assert len(res.cipher) == 6
    assert verify_ciphering(t1, t2, res.mapping, res.cipher)
    expected_cipher = {"1": "2", "2": "4", "3": "6", "4": "8", "9": "18", "16": "32"}
    assert verify_ciphering(t1, t2, list(range(len(t1))), expected_cipher)


def test_histogram_mismatch_rejected_before_backtracking():
    res = is_ciphering_isomorphic(parse_tree("r(a,a,b)"), parse_tree("r(a,b,c)"))
    assert res.verdict is Verdict.NOT_ISOMORPHIC
    assert res.trace.states_visited == 0


def test_shape_mismatch():
    res = is_ciphering_isomorphic(parse_tree("r(a(b))"), parse_tree("r(a,b)"))
    assert res.verdict is Verdict.NOT_ISOMORPHIC


def test_backtrack_entry_point(running_pair):
    st_ = deduction_phase(*running_pair)
    res = backtrack(st_, trace=SearchTrace())
    assert res.verdict is Verdict.ISOMORPHIC
    assert verify_ciphering(*running_pair, res.mapping, res.cipher)
    assert search_space_size(st_) == 8  # the caller's state is left untouched


def test_step_limit_gives_unknown():
    t = parse_tree("r(a,b,c,d,e,f,g,h)")
    t2 = parse_tree("r(h,g,f,e,d,c,b,a)")
    res = is_ciphering_isomorphic(t, t2, step_limit=1)
    assert res.verdict is Verdict.UNKNOWN and res.mapping is None


def test_verify_ciphering_rejects_mutations(pattern_pair):
    t1, t2 = pattern_pair
    res = is_ciphering_isomorphic(t1, t2)
    mapping = dict(res.mapping)
    a, b = t1.children[0][0], t1.children[0][1]
    mapping[a], mapping[b] = mapping[b], mapping[a]
    assert not verify_ciphering(t1, t2, mapping, res.cipher)
    bad = dict(res.cipher)
    bad["1"] = "4"
    assert not verify_ciphering(t1, t2, res.mapping, bad)
    assert verify_ciphering(t1, t1, list(range(len(t1))), {a: a for a in t1.alphabet()})
    assert not verify_ciphering(t1, t2, {0: 0}, res.cipher)


def test_noniso_shuffles_match_brute_force():
    rng = random.Random(7)
    checked = 0
    for _ in range(300):
        n = rng.randint(2, 10)
        parents = [-1] + [rng.randrange(i) for i in range(1, n)]
        labels = [rng.choice("abc") for _ in range(n)]
        t1 = LabeledTree.from_parents(labels, parents)
        shuffled = labels[:]
        rng.shuffle(shuffled)
        t2 = LabeledTree.from_parents(shuffled, parents)
        res = is_ciphering_isomorphic(t1, t2)
        assert res.isomorphic == brute_isomorphic(t1, t2)
        checked += not res.isomorphic
    assert checked > 50


# -- properties ------------------------------------------------------------------


@st.composite
def tree_pairs(draw):
    t1 = draw(trees(max_nodes=10, alphabet="abcd"))
    kind = draw(st.sampled_from(["shuffle", "rename", "relabel", "independent"]))
    if kind == "independent":
        return t1, draw(trees(min_nodes=len(t1), max_nodes=len(t1), alphabet="abcd"))
    t2 = draw(shuffled_copy(t1))
    if kind == "rename":
        alphabet = sorted(t1.alphabet())
        image = draw(st.permutations(list("wxyz")))
        ren = dict(zip(alphabet, image))
        t2 = t2.relabel([ren[a] for a in t2.labels])
    elif kind == "relabel":
        t2 = t2.relabel(draw(st.permutations(list(t2.labels))))
    return t1, t2


@settings(max_examples=400, deadline=None)
@given(tree_pairs())
def test_sound_and_complete(pair):
    t1, t2 = pair
    res = is_ciphering_isomorphic(t1, t2)
    assert res.isomorphic == brute_isomorphic(t1, t2)
    if res.isomorphic:
        assert verify_ciphering(t1, t2, res.mapping, res.cipher)


@settings(max_examples=200, deadline=None)
@given(tree_pairs())
def test_inclusion_chain(pair):
    t1, t2 = pair
    res = is_ciphering_isomorphic(t1, t2)
    if find_isomorphism(t1, t2, "label") is not None:
        assert res.isomorphic
    if res.isomorphic:
        assert find_isomorphism(t1, t2, "topo") is not None


@settings(max_examples=200, deadline=None)
@given(trees(max_nodes=25, alphabet="abcde").flatmap(lambda t: st.tuples(st.just(t), shuffled_copy(t))))
def test_trace_and_map_node_counts(pair):
    t1, t2 = pair
    res = is_ciphering_isomorphic(t1, t2)
    assert res.isomorphic
    sizes = dict(res.trace.snapshots)
    assert sizes["A"] >= sizes["B"] >= sizes["C"] >= sizes["D"]
    assert res.trace.map_calls_deduction <= len(t1)
    assert res.trace.deductions["map_nodes"] >= len(t1)


@settings(max_examples=100, deadline=None)
@given(trees(max_nodes=15, alphabet="abc"))
def test_same_tree_gives_identity(t):
    res = is_ciphering_isomorphic(t, t)
    assert res.isomorphic and all(a == b for a, b in res.cipher.items())


@settings(max_examples=100, deadline=None)
@given(tree_pairs())
def test_deterministic(pair):
    a = is_ciphering_isomorphic(*pair)
    b = is_ciphering_isomorphic(*pair)
    assert (a.verdict, a.mapping, a.cipher, a.trace) == (b.verdict, b.mapping, b.cipher, b.trace)
