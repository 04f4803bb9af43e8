"""Acceptance criteria 1 to 11.  Each test prints one PASS/FAIL line; the
lines are repeated in the terminal summary."""
import math
import time
from fractions import Fraction

import numpy as np

from treelike import entropy, pretree, shadow, tameness, ztree

SEED = 20240611


def test_c01_axiom_suite(criterion):
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    failures = []
    sizes = []
    for k in range(1000):
        n = int(rng.integers(1, 41))
        sizes.append(n)
        T = pretree.random_tree(n, rng)
        a, m = pretree.check_axioms(T), pretree.check_median_algebra(T)
        if not (a.ok and m.ok):
            failures.append((k, a.failing() + m.failing()))
    dt = time.perf_counter() - t0
    ok = not failures and dt < 30
    criterion(1, ok, f"1000 trees (max {max(sizes)} points), {len(failures)} failing, {dt:.1f}s (< 30s)")
    assert ok, failures[:3]


def test_c02_retraction_identities(criterion):
    # every tree up to isomorphism with at most 12 points, every ordered pair u != v
    checks = ("retraction", "median_preserving", "continuous", "preimage_identities")
    cases = 0
    bad = []
    for n in range(2, 13):
        for T in pretree.nonisomorphic_trees(n):
            for u in T.points:
                for v in T.points:
                    if u == v:
                        continue
                    cases += 1
                    r = shadow.retraction_report(T, u, v)
                    names = {rec.name for rec in r.records}
                    if not r.ok or not set(checks) <= names:
                        bad.append((T.edges, u, v))
    ok = not bad
    criterion(2, ok, f"{cases} (tree, u, v) cases on all trees <= 12 points, {len(bad)} failing")
    assert ok, bad[:3]


def _preimage_oracle(T, u, v):
    """Set-based recomputation of the preimage identities for one pair."""
    phi = {x: pretree.median(T, u, x, v) for x in T.points}
    seg = pretree.interval(T, u, v).members
    for w in seg:
        if w != v:
            pre = {x for x in T.points if phi[x] in pretree.interval(T, u, w).members}
            if pre != shadow.shadow(T, w, v).members:
                return False
        if w != u:
            pre = {x for x in T.points if phi[x] in pretree.interval(T, w, v).members}
            if pre != shadow.shadow(T, w, u).members:
                return False
    return True


def test_c02_preimage_oracle_agrees():
    # independent set-level recomputation on a random sample, as a cross-check
    rng = np.random.default_rng(SEED)
    for _ in range(40):
        T = pretree.random_tree(int(rng.integers(2, 13)), rng)
        u, v = rng.choice(T.points, 2, replace=False)
        assert _preimage_oracle(T, str(u), str(v))


def test_c03_shadow_separation(criterion):
    rng = np.random.default_rng(SEED)
    triples = 0
    bad = []
    for k in range(500):
        T = pretree.random_tree(int(rng.integers(1, 16)), rng)
        r = shadow.shadow_separation(T)
        triples += r.records[0].detail.get("strict_triples", 0) if r.records[0].detail else 0
        if not r.ok:
            bad.append(k)
    ok = not bad
    criterion(3, ok, f"500 trees <= 15 points, {triples} strict triples, {len(bad)} failing")
    assert ok, bad[:3]


def test_c04_convfun(criterion):
    rng = np.random.default_rng(SEED)
    pairs = 0
    witnesses = 0
    while pairs < 10_000:
        T = pretree.random_tree(int(rng.integers(2, 16)), rng)
        r = tameness.convfun_property_test(T, 20, int(rng.integers(2**31)), control=False)
        pairs += 20
        witnesses += 0 if r.ok else 1
    w = tameness.is_independent(tameness.rademacher_family())
    control = bool(w) and (w.a, w.b) == (Fraction(1, 4), Fraction(3, 4)) and tameness.verify_witness(
        tameness.rademacher_family(), w
    )
    ok = witnesses == 0 and control
    criterion(4, ok, f"{pairs} monotone pairs, {witnesses} independence witnesses; "
                     f"control a={w.a if w else None} b={w.b if w else None}")
    assert ok


def test_c05_helly(criterion):
    rng = np.random.default_rng(SEED)
    eps = Fraction(1, 10**6)
    bad = []
    shortest = None
    for k in range(100):
        T = pretree.random_tree(20, rng)
        pool = [tameness.random_monotone_function(T, rng) for _ in range(4)]
        F = tameness.FunctionFamily(T, [pool[int(i)] for i in rng.integers(len(pool), size=256)])
        r = tameness.helly_select(F, eps, 32)
        if not r or len(r.indices) < 32 or r.oscillation > eps or not tameness.limit_is_monotone(T, r.limit):
            bad.append(k)
            continue
        shortest = len(r.indices) if shortest is None else min(shortest, len(r.indices))
    ok = not bad
    criterion(5, ok, f"100 runs of 256 functions on 20 points, shortest selection {shortest}, {len(bad)} failing")
    assert ok, bad


def test_c06_monotone_equivalence(criterion):
    pairs = maps = disagreements = 0
    for n1 in range(1, 6):
        for n2 in range(1, 7):
            for S in pretree.nonisomorphic_trees(n1):
                for T in pretree.nonisomorphic_trees(n2):
                    e = pretree.monotone_equivalence(S, T)
                    pairs += 1
                    maps += e.n_maps
                    disagreements += 0 if e.agree else 1
    ok = disagreements == 0
    criterion(6, ok, f"{pairs} tree pairs (<= 5 to <= 6 points), {maps} maps, {disagreements} disagreements")
    assert ok


def _expand(seq, n_max):
    if isinstance(seq, entropy.Automorphism):
        out, cur = [], seq
        for _ in range(n_max):
            out.append(cur)
            cur = seq.compose(cur)
        return out
    return list(seq)


def test_c07_entropy_bounds(criterion):
    t0 = time.perf_counter()
    fixtures = entropy.standard_fixtures(SEED)
    bound_bad, trend_bad, oracle_bad = [], [], []
    oracle_checks = 0
    for f in fixtures:
        res = entropy.sequence_entropy(f.cover, f.seq, 12)
        LA = res["L_A"]
        if any(row["N"] > row["n"] * LA for row in res["rows"]):
            bound_bad.append(f.name)
        if not res["rows"][-1]["h"] <= math.log(12 * LA) / 12:
            trend_bad.append(f.name)
        # exact subcover sizes against the all-subsets oracle on the raw joins
        seq = _expand(f.seq, 12)
        full = f.cover.complex.full
        acc = None
        for n, s in enumerate(seq, 1):
            img = [s.apply(m) for m in f.cover.members]
            acc = img if acc is None else entropy.join_refinement(acc, img)
            if len(acc) > 18:
                break
            oracle_checks += 1
            got = len(entropy.min_cover_indices(acc, full))
            if got != entropy.brute_force_min_cover(acc, full) or got != res["rows"][n - 1]["N"]:
                oracle_bad.append((f.name, n))
    dt = time.perf_counter() - t0
    ok = len(fixtures) >= 20 and not (bound_bad or trend_bad or oracle_bad) and dt < 300
    criterion(7, ok, f"{len(fixtures)} fixtures, bound failures {len(bound_bad)}, entropy cap failures "
                     f"{len(trend_bad)}, oracle mismatches {len(oracle_bad)}/{oracle_checks}, {dt:.1f}s (< 300s)")
    assert ok, (bound_bad, trend_bad, oracle_bad)


def test_c08_irreducible_cover_bound(criterion):
    bad = []
    n = 0
    for f in entropy.standard_fixtures(SEED):
        n += 1
        if not entropy.lemma1_check(f.cover).ok:
            bad.append(f.name)
    B = entropy.b_cover(entropy.path_complex(2))
    d = entropy.lemma1_check(B).records[0].detail
    tight = (d["members"], d["boundary_points"]) == (3, 3)
    ok = not bad and tight
    criterion(8, ok, f"{n} fixture covers, {len(bad)} failing; path example {d['members']} = {d['boundary_points']}")
    assert ok, bad


def test_c09_odometer(criterion):
    A = ztree.odometer()
    cycles_bad = [k for k in range(1, 13) if ztree.cylinder_dynamics(A, k)["cycle_lengths"] != [2**k]]
    zero = A.tree.end("", "0")
    om = ztree.omega_limit_approx(A, zero, 3, 8)
    omega_ok = om == {"".join(b) for b in __import__("itertools").product("01", repeat=3)}
    pairs = [(zero, A.tree.end("1", "0")), (zero, A.tree.end("", "1")), (A.tree.end("", "01"), A.tree.end("", "10"))]
    found = [str(x) for x, y in pairs if ztree.detect_proximal(A, x, y, 20, 20)]
    ok = not cycles_bad and omega_ok and not found
    criterion(9, ok, f"single 2^k cycle for k <= 12 ({'ok' if not cycles_bad else cycles_bad}); "
                     f"omega limit {len(om)}/8 cylinders; proximal pairs at depth 20: {len(found)}")
    assert ok


def test_c10_extreme_proximality(criterion):
    A = ztree.free_translations()
    words = [w for n in range(1, 5) for w in A.tree.words(n)]
    missing = []
    for w in words:
        for w2 in words:
            g = ztree.extreme_proximality_witness(A, w, w2, len(w) + len(w2) + 4)
            if not isinstance(g, str) or not ztree.maps_into(A.tree, g, w, w2):
                missing.append((w, w2))
    # literal depth-by-depth oracle and breadth-first search on the short words
    short = [w for w in words if len(w) <= 2]
    literal_bad = []
    for w in short:
        for w2 in short:
            g = ztree.extreme_proximality_witness(A, w, w2, len(w) + len(w2) + 4)
            s = ztree.extreme_proximality_witness(A, w, w2, len(w) + len(w2) + 4, method="search")
            if g != s or not ztree.maps_into_literal(A.tree, g, w, w2):
                literal_bad.append((w, w2))
    hand = (ztree.extreme_proximality_witness(A, "a", "b", 6), ztree.extreme_proximality_witness(A, "a", "a", 6))
    ok = not missing and not literal_bad and hand == ("bA", "abA")
    criterion(10, ok, f"{len(words) ** 2} cylinder pairs, {len(missing)} without witness; "
                      f"oracle mismatches {len(literal_bad)}/{len(short) ** 2}; hand witnesses {hand[0]}, {hand[1]}")
    assert ok


def _fragment_fixtures():
    B = ztree.RuleTree.kary(2)
    F = ztree.RuleTree.free_group()
    return [
        (ztree.AxisFunction(B.end("", "0"), B.end("", "1")), "ray::0"),
        (ztree.AxisFunction(B.end("", "0"), B.end("", "1")), "cyl:"),
        (ztree.AxisFunction(B.end("1", "0"), B.end("", "01")), "cyl:1,e:0:1"),
        (ztree.AxisFunction(B.end("", "01"), B.end("11", "0")), "cyl:01,cyl:11"),
        (ztree.AxisFunction(F.end("", "a"), F.end("", "A")), "cyl:"),
        (ztree.AxisFunction(F.end("", "a"), F.end("b", "a")), "ray:b:A,cyl:ab"),
        (ztree.AxisFunction(F.end("a", "b"), F.end("a", "B")), "cyl:a"),
        (ztree.AxisFunction(F.end("", "ab"), F.end("B", "a")), "cyl:B,ray::ab"),
    ]


def test_c11_closedness_and_fragment(criterion):
    reports = [ztree.closedness_test_RB(tree, 500, SEED)
               for tree in (ztree.RuleTree.free_group(), ztree.RuleTree.kary(2))]
    closed_ok = all(r.ok for r in reports)
    fx = _fragment_fixtures()
    frag_bad = [i for i, (f, spec) in enumerate(fx)
                if not ztree.fragment_scan(f, spec, Fraction(1, 8), 8, allow_vertices=False)]
    ok = closed_ok and not frag_bad
    criterion(11, ok, f"500 convergent triples on each of 2 trees: {'all limits between' if closed_ok else 'FAILED'}; "
                      f"fragment_scan at 1/8 on {len(fx)} fixtures, {len(frag_bad)} without continuity point")
    assert ok, frag_bad
