import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treelike import pretree, shadow
from treelike.pretree import BetweennessStructure

P3 = pretree.path(3)
P4 = pretree.path(4)
STAR = pretree.star()
ANTICHAIN = BetweennessStructure.from_triples(["u", "v", "w"], [])

trees = st.integers(1, 9).flatmap(
    lambda n: st.integers(0, 2**32 - 1).map(lambda s: pretree.random_tree(n, np.random.default_rng(s)))
)


def closed_family_oracle(T):
    """Close the shadow subbase under pairwise union and intersection until nothing changes."""
    pts = T.points
    full = frozenset(pts)
    fam = {frozenset(), full}
    for u, v in itertools.permutations(pts, 2):
        fam.add(frozenset(x for x in pts if pretree.between(T, x, u, v)))
    while True:
        new = {a | b for a in fam for b in fam} | {a & b for a in fam for b in fam}
        if new <= fam:
            return fam
        fam |= new


def as_sets(T, masks):
    return {frozenset(shadow.mask_members(T, m)) for m in masks}


def test_shadow_examples():
    assert shadow.shadow(P4, "1", "3").members == {"0", "1"}
    assert shadow.shadow(STAR, "c", "x").members == {"c", "y", "z"}
    with pytest.raises(ValueError):
        shadow.shadow(P4, "1", "1")


def test_topology_examples():
    top = shadow.generate_topology(P3)
    assert top.is_discrete and len(top.closed_sets) == 8
    assert shadow.generate_topology(pretree.path(2)).is_discrete
    assert shadow.generate_topology(STAR).is_discrete
    assert top.check_lattice()


def test_hausdorff_examples():
    assert shadow.is_hausdorff(P4)
    # regression fixture: shadows of the antichain are singletons, so it is discrete too
    assert shadow.is_hausdorff(ANTICHAIN)


def test_retraction_examples():
    assert shadow.retraction(P4, "0", "2", "3") == "2"
    assert shadow.retraction(P4, "0", "2", "1") == "1"
    assert shadow.retraction(STAR, "x", "y", "z") == "c"


def test_retraction_report_path():
    rep = shadow.retraction_report(P4, "0", "2")
    assert rep.ok
    assert {r.name for r in rep.records} >= {"retraction", "median_preserving", "continuous", "preimage_identities"}
    phi = {x: shadow.retraction(P4, "0", "2", x) for x in P4.points}
    assert {x for x in P4.points if phi[x] in {"0", "1"}} == shadow.shadow(P4, "1", "2").members


def test_shadow_separation_examples():
    rep = shadow.shadow_separation(P4)
    assert rep.ok
    single = shadow.shadow_separation(pretree.path(2))
    assert single.ok and single.records[0].detail["strict_triples"] == 0


def test_stability_examples():
    r = shadow.stability_check(P3)
    assert not r.stable and r.witness == ("0", "1")
    assert r.pair_witness[("0", "2")] == "1"
    assert not shadow.stability_check(pretree.path(2)).stable
    for k in range(2, 7):
        assert shadow.stability_check(pretree.path(k + 1)).pair_witness[("0", str(k))] is not None


def test_finite_topology_operations():
    top = shadow.topology_from_subbase(3, {0b001, 0b011})
    assert top.check_lattice()
    assert top.closure(0b010) == 0b011
    assert top.interior(0b110) == 0b110
    assert top.is_open(0b100) and not top.is_closed(0b100)
    assert top.minimal_neighborhood(1) == 0b110
    assert top.interior(0b010) == 0 and top.boundary(0b010) == 0b011


@settings(max_examples=40, deadline=None)
@given(trees)
def test_topology_matches_oracle(T):
    top = shadow.generate_topology(T)
    assert as_sets(T, top.closed_sets) == closed_family_oracle(T)
    assert top.is_discrete


@settings(max_examples=40, deadline=None)
@given(trees)
def test_shadow_invariants(T):
    for u, v in itertools.permutations(T.points, 2):
        S = shadow.shadow(T, u, v).members
        assert u in S and v not in S
        assert S == {x for x in T.points if u in pretree.interval(T, x, v).members}


@settings(max_examples=40, deadline=None)
@given(trees)
def test_retraction_idempotent(T):
    for u, v in itertools.permutations(T.points, 2):
        phi = shadow.retraction_map(T, T.idx(u), T.idx(v))
        assert (phi[phi] == phi).all()


def separation_oracle(T):
    pts = T.points
    for u, w, v in itertools.permutations(pts, 3):
        if not pretree.between(T, u, w, v):
            continue
        U = set(pts) - shadow.shadow(T, w, u).members
        V = set(pts) - shadow.shadow(T, w, v).members
        if u not in U or v not in V:
            return False
        if not all(pretree.between(T, x, w, y) for x in U for y in V):
            return False
    return True


@settings(max_examples=40, deadline=None)
@given(trees)
def test_shadow_separation_matches_oracle(T):
    assert shadow.shadow_separation(T).ok == separation_oracle(T)


def test_shadow_separation_on_explicit_structure():
    # non-median explicit structure: the kernel is still computed and agrees with the oracle
    T = BetweennessStructure.from_triples(["a", "b", "c", "d"], [("a", "b", "c"), ("b", "c", "d")])
    assert shadow.shadow_separation(T).ok == separation_oracle(T)
