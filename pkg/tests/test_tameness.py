import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treelike import pretree, tameness
from treelike.pretree import BetweennessStructure
from treelike.tameness import FunctionFamily

P4 = pretree.path(4)
STAR = pretree.star()


def independent_oracle(F):
    """Try every threshold pair built from values and thirds of each gap; True if some pair realizes all patterns."""
    vals = sorted({v for f in F.functions for v in f.values()})
    cands = set(vals)
    cands |= {x + (y - x) * k / 3 for x, y in zip(vals, vals[1:]) for k in (1, 2)}
    cands |= {vals[0] - 1, vals[-1] + 1}
    cands = sorted(cands)
    n = len(F)
    pts = F.carrier.points
    for a, b in itertools.combinations(cands, 2):
        ok = True
        for pat in itertools.product("PM", repeat=n):
            if not any(all((F.functions[i][x] < a) if c == "P" else (F.functions[i][x] > b)
                           for i, c in enumerate(pat)) for x in pts):
                ok = False
                break
        if ok:
            return True
    return False


def test_rademacher_witness():
    F = tameness.rademacher_family()
    w = tameness.is_independent(F)
    assert w and (w.a, w.b) == (Fraction(1, 4), Fraction(3, 4))
    assert tameness.verify_witness(F, w)
    assert set(w.pattern_witnesses) == {"PP", "PM", "MP", "MM"}


def test_constant_and_monotone_examples():
    T = BetweennessStructure.from_order("0123")
    assert not tameness.is_independent(FunctionFamily(T, [{p: 1 for p in "0123"}] * 2))
    F = FunctionFamily(P4, [{p: int(p) for p in P4.points}, {p: 3 - int(p) for p in P4.points}])
    assert not tameness.is_independent(F)


def test_family_validation():
    with pytest.raises(ValueError):
        FunctionFamily(P4, [{"0": 1}])
    with pytest.raises(ValueError):
        FunctionFamily(P4, [{p: 5 for p in P4.points}], bounds=(0, 1))


def test_tame_check_examples():
    fam, rep = tameness.separating_tame_family(P4)
    assert tameness.tame_check(fam)
    R = tameness.rademacher_family()
    T = R.carrier
    mixed = FunctionFamily(T, [{p: 0 for p in T.points}, *R.functions])
    v = tameness.tame_check(mixed)
    assert not v and v.indices == (1, 2)
    single = FunctionFamily(T, [R.functions[0]])
    assert tameness.tame_check(single)


def test_convfun_examples():
    assert tameness.convfun_property_test(pretree.path(10), 1000, 1).ok
    rep = tameness.convfun_property_test(pretree.star([f"l{i}" for i in range(5)]), 1000, 2)
    assert rep.ok
    assert rep.records[-1].name == "rademacher_control_independent" and rep.records[-1].passed


def test_monotone_separator_examples():
    assert tameness.monotone_separator(P4, "0", "3") == {
        "0": 0, "1": Fraction(1, 3), "2": Fraction(2, 3), "3": 1}
    f = tameness.monotone_separator(STAR, "x", "y")
    assert f == {"x": 0, "c": Fraction(1, 2), "z": Fraction(1, 2), "y": 1}
    with pytest.raises(ValueError):
        tameness.monotone_separator(P4, "1", "1")


def test_separating_family_examples():
    fam, rep = tameness.separating_tame_family(pretree.path(2))
    assert rep.ok and len(fam) == 1
    fam, rep = tameness.separating_tame_family(P4)
    assert rep.ok and len(fam) == 6
    S4 = pretree.star(["a", "b", "c", "d"], "h")
    swap = {"h": "h", "a": "b", "b": "a", "c": "c", "d": "d"}
    fam, rep = tameness.separating_tame_family(S4, [swap])
    assert rep.ok


def test_helly_alternating():
    g = {p: Fraction(int(p), 3) for p in P4.points}
    h = {p: 1 - v for p, v in g.items()}
    F = FunctionFamily(P4, [g, h] * 32)
    r = tameness.helly_select(F, Fraction(1, 100), 16)
    assert r and r.oscillation == 0
    assert len({i % 2 for i in r.indices}) == 1 and len(r.indices) == 32
    src = g if r.indices[0] % 2 == 0 else h
    assert all(abs(r.limit[p] - src[p]) <= Fraction(1, 200) for p in P4.points)


def test_helly_decreasing():
    T = pretree.path(6)
    F = FunctionFamily(T, [{p: Fraction(int(p), n) for p in T.points} for n in range(1, 65)])
    # 5/64 > 1/100, so only a coarser bucket width can collect a tail of length 8
    eps = Fraction(1, 10)
    r = tameness.helly_select(F, eps, 8)
    assert r and r.indices == sorted(r.indices) and r.oscillation <= eps
    assert min(r.indices) > 32
    assert all(abs(v) <= eps for v in r.limit.values())


def test_helly_insufficient_and_bound():
    F = FunctionFamily(pretree.path(2), [{"0": 0, "1": Fraction(k, 4)} for k in range(5)])
    assert not tameness.helly_select(F, Fraction(1, 10), 2)
    assert tameness.helly_bound(F, Fraction(1, 10), 2) >= 2
    with pytest.raises(ValueError):
        tameness.helly_select(F, 0, 2)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 3))
def test_is_independent_matches_oracle(seed, n):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2**n, 2**n + 5))
    T = BetweennessStructure.from_order([str(i) for i in range(k)])
    funcs = [{p: Fraction(int(rng.integers(0, 3))) for p in T.points} for _ in range(n)]
    F = FunctionFamily(T, funcs)
    w = tameness.is_independent(F)
    assert bool(w) == independent_oracle(F)
    if w:
        assert tameness.verify_witness(F, w)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_monotone_functions_are_monotone_and_tame(seed):
    rng = np.random.default_rng(seed)
    T = pretree.random_tree(int(rng.integers(2, 12)), rng)
    fs = [tameness.random_monotone_function(T, rng) for _ in range(2)]
    assert all(tameness.limit_is_monotone(T, f) for f in fs)
    assert not independent_oracle(FunctionFamily(T, fs))
