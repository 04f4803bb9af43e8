import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treelike import pretree
from treelike.pretree import BetweennessStructure, StructuralInconsistency

P4 = pretree.path(4)
STAR = pretree.star()
ANTICHAIN = BetweennessStructure.from_triples(["u", "v", "w"], [])


def nx_graph(T):
    G = nx.Graph()
    G.add_nodes_from(T.points)
    G.add_edges_from(T.edges)
    return G


def path_oracle(T, a, c):
    return set(nx.shortest_path(nx_graph(T), a, c))


trees = st.integers(1, 14).flatmap(
    lambda n: st.integers(0, 2**32 - 1).map(lambda s: pretree.random_tree(n, np.random.default_rng(s)))
)


def test_between_examples():
    assert pretree.between(P4, "0", "1", "3")
    assert pretree.between(P4, "0", "0", "3")
    assert not pretree.between(STAR, "x", "y", "z")


def test_interval_examples():
    assert pretree.interval(P4, "0", "3").members == {"0", "1", "2", "3"}
    assert pretree.interval(P4, "2", "2").members == {"2"}
    assert pretree.interval(STAR, "x", "z").members == {"x", "c", "z"}


def test_axioms_examples():
    assert pretree.check_axioms(P4).ok
    assert pretree.check_axioms(pretree.BetweennessStructure.from_order(["0", "1", "2"])).ok
    bad = BetweennessStructure.from_triples(["a", "b", "c"], [("a", "b", "c"), ("a", "c", "b")])
    rep = pretree.check_axioms(bad)
    assert not rep["B2"].holds
    assert ("a", "b", "c") in rep["B2"].witnesses or ("a", "c", "b") in rep["B2"].witnesses


def test_median_examples():
    assert pretree.median(P4, "0", "2", "3") == "2"
    assert pretree.median(STAR, "x", "y", "z") == "c"
    assert pretree.median(STAR, "x", "x", "y") == "x"
    assert pretree.median(ANTICHAIN, "u", "v", "w") is None


def test_is_median_pretree_examples():
    assert pretree.is_median_pretree(P4)
    assert not pretree.is_median_pretree(ANTICHAIN)
    assert pretree.check_axioms(ANTICHAIN).ok
    assert pretree.is_median_pretree(BetweennessStructure.from_tree([], ["p"]))


def test_median_algebra_examples():
    assert pretree.check_median_algebra(pretree.path(3)).ok
    assert pretree.check_median_algebra(STAR).ok


def test_convex_examples():
    assert pretree.is_convex(P4, {"1", "2"})
    assert not pretree.is_convex(P4, {"0", "2"})
    assert pretree.is_convex(P4, set())


def test_check_monotone_examples():
    ident = pretree.Mapping(P4, P4, {p: p for p in P4.points})
    assert pretree.check_monotone(ident, "B") and pretree.check_monotone(ident, "C")
    P2 = pretree.path(2)
    f = pretree.Mapping(P4, P2, {"0": "0", "1": "0", "2": "1", "3": "1"})
    assert pretree.check_monotone(f, "B")
    g = pretree.Mapping(P4, P4, {"0": "0", "1": "2", "2": "1", "3": "3"})
    v = pretree.check_monotone(g, "B")
    assert not v and v.witness == ("0", "1", "2")
    assert not pretree.check_monotone(g, "C")


def test_mapping_must_be_total():
    with pytest.raises(ValueError):
        pretree.Mapping(P4, P4, {"0": "0"})


def test_monotone_equivalence_examples():
    e = pretree.monotone_equivalence(pretree.path(3), pretree.path(3))
    assert e.n_maps == 27 and e.agree
    assert pretree.monotone_equivalence(pretree.star(["x", "y", "z"]), pretree.path(2)).agree
    e = pretree.monotone_equivalence(pretree.path(2), pretree.path(2))
    assert e.n_maps == 4 and e.n_b_monotone == 4 and e.agree


def test_monotone_equivalence_size_limit():
    with pytest.raises(ValueError):
        pretree.monotone_equivalence(pretree.path(7), pretree.path(2))


def test_bad_tree_inputs():
    with pytest.raises(ValueError):
        BetweennessStructure.from_tree([("a", "b"), ("c", "d")], ["a", "b", "c", "d"])
    with pytest.raises(ValueError):
        BetweennessStructure.from_tree([("a", "b"), ("b", "c"), ("c", "a")])


def test_nonisomorphic_tree_counts():
    assert [len(pretree.nonisomorphic_trees(n)) for n in range(1, 9)] == [1, 1, 1, 2, 3, 6, 11, 23]


@settings(max_examples=60, deadline=None)
@given(trees)
def test_table_matches_path_oracle(T):
    for a in T.points:
        for c in T.points:
            on = path_oracle(T, a, c)
            assert pretree.interval(T, a, c).members == on
            for b in T.points:
                assert pretree.between(T, a, b, c) == (b in on)


@settings(max_examples=60, deadline=None)
@given(trees)
def test_random_trees_pass_axioms(T):
    assert pretree.check_axioms(T).ok
    assert pretree.check_median_algebra(T).ok
    assert pretree.is_median_pretree(T)


@settings(max_examples=40, deadline=None)
@given(trees)
def test_interval_splits_at_inner_point(T):
    for a, b in itertools.product(T.points, repeat=2):
        I = pretree.interval(T, a, b).members
        for c in I:
            assert I == pretree.interval(T, a, c).members | pretree.interval(T, c, b).members


@settings(max_examples=40, deadline=None)
@given(trees)
def test_between_iff_median(T):
    for a, b, c in itertools.product(T.points, repeat=3):
        assert pretree.between(T, a, c, b) == (pretree.median(T, a, c, b) == c)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_composition_of_monotone_maps(seed):
    rng = np.random.default_rng(seed)
    A, B, C = (pretree.random_tree(int(rng.integers(1, 6)), rng) for _ in range(3))
    mono = []
    for S, T in ((A, B), (B, C)):
        maps = pretree._all_maps(len(S), len(T))
        good = [m for m in maps if pretree.check_monotone(
            pretree.Mapping(S, T, {S.points[i]: T.points[j] for i, j in enumerate(m)}), "B")]
        mono.append(good[int(rng.integers(len(good)))])
    f, g = mono
    comp = pretree.Mapping(A, C, {A.points[i]: C.points[g[f[i]]] for i in range(len(A))})
    assert pretree.check_monotone(comp, "B")


def test_median_raises_on_non_pretree_overlap():
    # c and d are each between a and the other, so the three intervals meet in two points
    T = BetweennessStructure.from_triples(
        ["a", "b", "c", "d"],
        [("a", "c", "b"), ("a", "d", "b"), ("a", "c", "d"), ("a", "d", "c"), ("b", "c", "d"), ("b", "d", "c")],
    )
    assert not pretree.check_axioms(T).ok
    with pytest.raises(StructuralInconsistency):
        pretree.median(T, "a", "b", "c")
