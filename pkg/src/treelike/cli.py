"""Command line front end.

Every command builds a :class:`Report`.  Exit status is 0 when the outcome
matches the expectation (by default: every check passes), 1 when it does not,
and 2 for usage or input errors.
"""
from __future__ import annotations

import argparse
import secrets
import sys
import time
from fractions import Fraction

import numpy as np

from . import entropy, formats, pretree, shadow, tameness, ztree
from .report import Report

DEFAULT_SEED = 20240611


class UsageError(Exception):
    pass


def _seed(args) -> int:
    if args.seed == "random":
        return secrets.randbelow(2**32)
    try:
        return int(args.seed)
    except ValueError as exc:
        raise UsageError(f"--seed must be an integer or 'random', got {args.seed!r}") from exc


def _need_in(args) -> str:
    if not args.input:
        raise UsageError(f"{args.command} needs --in <file>")
    return formats.read_text(args.input)


def _structure(args) -> pretree.BetweennessStructure:
    return formats.parse_structure(_need_in(args))


def _point(T, p):
    if p not in T.index:
        raise UsageError(f"unknown point {p!r}")
    return p


def _epsilon(args, default="1/8") -> Fraction:
    eps = formats.parse_rational(args.epsilon or default)
    if eps <= 0:
        raise UsageError("--epsilon must be positive")
    return eps


# ---------------------------------------------------------------- commands


def cmd_axioms(args, seed):
    T = _structure(args)
    rep = Report()
    for r in pretree.check_axioms(T).results.values():
        rep.add(r.name, r.holds, witness=list(r.witnesses[0]) if r.witnesses else None)
    try:
        median_ok = pretree.is_median_pretree(T)
    except pretree.StructuralInconsistency as exc:
        rep.add("median_pretree", False, witness=str(exc))
        return rep
    rep.add("median_pretree", median_ok, witness=None if median_ok else "some median is empty")
    if median_ok:
        for r in pretree.check_median_algebra(T).results.values():
            rep.add(r.name, r.holds, witness=list(r.witnesses[0]) if r.witnesses else None)
    return rep


def cmd_median(args, seed):
    T = _structure(args)
    if len(args.points) != 3:
        raise UsageError("median needs three points")
    a, b, c = (_point(T, p) for p in args.points)
    m = pretree.median(T, a, b, c)
    rep = Report()
    rep.add("median", m is not None, witness=None if m else [a, b, c], detail={"median": m})
    return rep


def cmd_shadow(args, seed):
    T = _structure(args)
    if len(args.points) != 2:
        raise UsageError("shadow needs u and v")
    u, v = (_point(T, p) for p in args.points)
    if u == v:
        raise UsageError("shadow needs u != v")
    S = shadow.shadow(T, u, v)
    rep = Report()
    rep.add("shadow", True, detail={"base": u, "light": v, "members": sorted(S.members, key=T.idx)})
    return rep


def cmd_topology(args, seed):
    T = _structure(args)
    if len(T) > shadow.MAX_TOPOLOGY_POINTS:
        raise UsageError(f"topology is limited to {shadow.MAX_TOPOLOGY_POINTS} points")
    top = shadow.generate_topology(T)
    rep = Report()
    rep.add("closed_set_lattice", top.check_lattice(), witness="not closed under union/intersection",
            detail={"closed_sets": len(top.closed_sets)})
    rep.add("hausdorff", top.is_discrete, witness="topology is not discrete")
    st = shadow.stability_check(T, top)
    # finite trees are never stable (adjacent points have nothing between them),
    # so the verdict is reported rather than checked
    rep.add("stability", True, detail={"stable": st.stable, "unstable_pair": list(st.witness) if st.witness else None,
                                       "weak_stability": st.weak_note})
    return rep


def cmd_retract(args, seed):
    T = _structure(args)
    if len(args.points) not in (2, 3):
        raise UsageError("retract needs u v [x]")
    pts = [_point(T, p) for p in args.points]
    if pts[0] == pts[1]:
        raise UsageError("retract needs u != v")
    rep = shadow.retraction_report(T, pts[0], pts[1])
    if len(pts) == 3:
        rep.add("value", True, detail={"x": pts[2], "phi": shadow.retraction(T, *pts)})
    return rep


def cmd_separate(args, seed):
    return shadow.shadow_separation(_structure(args))


def cmd_independence(args, seed):
    F = formats.parse_family(_need_in(args))
    w = tameness.is_independent(F)
    rep = Report()
    if w:
        rep.add("independent", True, detail={"a": w.a, "b": w.b, "patterns": w.pattern_witnesses})
    else:
        rep.add("independent", True, detail={"result": "not independent"})
    return rep, ("independent" if w else "tame")


def cmd_tame(args, seed):
    F = formats.parse_family(_need_in(args))
    v = tameness.tame_check(F, args.nmax or 2)
    rep = Report()
    detail = None if v.tame else {"indices": list(v.indices), "a": v.witness.a, "b": v.witness.b}
    rep.add("tame", True, detail=detail or {"max_len": args.nmax or 2})
    return rep, ("tame" if v.tame else "independent")


def cmd_helly(args, seed):
    F = formats.parse_family(_need_in(args))
    eps = _epsilon(args, "1/100")
    target = args.target or 2
    r = tameness.helly_select(F, eps, target)
    rep = Report()
    if r:
        rep.add("selection", True, detail={"indices": r.indices, "oscillation": r.oscillation, "limit": r.limit})
        mono = tameness.limit_is_monotone(F.carrier, r.limit)
        rep.add("limit_monotone", mono, witness=None if mono else "limit not monotone")
    else:
        rep.add("selection", False, witness={"stopped_at": r.stopped_at, "kept": len(r.indices)})
    return rep


def _action(args, default):
    if args.input:
        return formats.parse_action(formats.read_text(args.input))
    return ztree.odometer() if default == "odometer" else ztree.free_translations()


def cmd_ztree(args, seed):
    op, rest = args.op, args.points
    odo_ops = ("cylinders", "omega")
    A = _action(args, "odometer" if op in odo_ops else "free")
    tree = A.tree
    P = lambda s: ztree.parse_point(tree, s)  # noqa: E731
    rep = Report()

    def need(k):
        if len(rest) != k:
            raise UsageError(f"ztree {op} takes {k} argument(s)")

    if op == "canonical":
        need(1)
        rep.add("canonical", True, detail={"point": str(P(rest[0]))})
    elif op == "confluence":
        need(2)
        c = ztree.confluence(P(rest[0]), P(rest[1]))
        rep.add("confluence", True, detail={"depth": "equal" if c == ztree.EQUAL else c})
    elif op == "between":
        need(3)
        b = ztree.between_ext(*(P(s) for s in rest))
        rep.add("between", b, witness=None if b else rest)
    elif op == "median":
        need(3)
        rep.add("median", True, detail={"median": str(ztree.median_ext(*(P(s) for s in rest)))})
    elif op == "act":
        need(2)
        rep.add("act", True, detail={"image": str(ztree.act(A, rest[0], P(rest[1])))})
    elif op == "monotone":
        rep = ztree.check_action_monotone(A, args.trials or 1000, seed)
    elif op == "proximal":
        need(2)
        r = ztree.detect_proximal(A, P(rest[0]), P(rest[1]), args.nmax or 8, args.radius or 8)
        if r:
            rep.add("proximal", True, detail={"words": r.words, "depths": [str(d) for d in r.depths]})
        else:
            rep.add("proximal", True, detail={"result": "not found", **r.bound})
        return rep, ("proximal" if r else "not-found")
    elif op == "cylinders":
        k = args.nmax if args.nmax is not None else 3
        d = ztree.cylinder_dynamics(A, k)
        single = d["cycle_lengths"] == [2**k]
        rep.add("single_cycle", single, witness=None if single else d["cycle_lengths"][:8],
                detail={"k": k, "cycle_lengths": d["cycle_lengths"][:8]})
    elif op == "omega":
        need(3)
        cyl = ztree.omega_limit_approx(A, P(rest[0]), int(rest[1]), int(rest[2]))
        rep.add("omega", True, detail={"cylinders": sorted(cyl)})
    elif op == "ep":
        need(2)
        radius = args.radius if args.radius is not None else len(rest[0]) + len(rest[1]) + 4
        g = ztree.extreme_proximality_witness(A, rest[0], rest[1], radius)
        ok = isinstance(g, str)
        rep.add("witness", ok, witness=None if ok else g.bound, detail={"g": g} if ok else None)
    elif op == "closedness":
        rep = ztree.closedness_test_RB(tree, args.trials or 500, seed)
    elif op == "fragment":
        need(3)
        f = ztree.AxisFunction(P(rest[0]), P(rest[1]))
        r = ztree.fragment_scan(f, rest[2], _epsilon(args), args.nmax or 8)
        rep.add("continuity_point", bool(r), witness=None if r else r.bound,
                detail={"point": str(r.point), "oscillation": r.oscillation} if r else None)
    else:
        raise UsageError(f"unknown ztree operation {op!r}")
    return rep


def cmd_entropy(args, seed):
    if not args.complex or not args.cover:
        raise UsageError("entropy needs --complex and --cover")
    K = formats.parse_complex(formats.read_text(args.complex))
    cover = formats.parse_cover(formats.read_text(args.cover), K)
    s = formats.parse_automorphism(args.autoseq or "identity", K)
    n_max = args.nmax or 12
    if n_max > 12:
        raise UsageError("--nmax is limited to 12 for entropy")
    rep = entropy.entropy_report(cover, s, n_max)
    res = entropy.sequence_entropy(cover, s, n_max)
    rep.add("table", True, detail=[{k: r[k] for k in ("n", "N", "bound", "violation")} | {"h": round(r["h"], 6)}
                                   for r in res["rows"]])
    return rep


# ---------------------------------------------------------------- suites


def _timed(rep: Report, name: str, fn):
    t0 = time.perf_counter()
    sub = fn()
    dt = time.perf_counter() - t0
    for r in sub.records:
        rep.add(f"{name}.{r.name}" if name else r.name, r.passed, r.witness, r.detail, dt)


def suite_axioms(trials, seed):
    rng = np.random.default_rng(seed)
    rep = Report()
    bad = None
    for k in range(trials):
        T = pretree.random_tree(int(rng.integers(1, 41)), rng)
        a, m = pretree.check_axioms(T), pretree.check_median_algebra(T)
        if not (a.ok and m.ok):
            bad = {"trial": k, "edges": [list(e) for e in T.edges], "failing": a.failing() + m.failing()}
            break
    rep.add("random_trees_pass_all_axioms", bad is None, witness=bad, detail={"trees": trials})
    return rep


def suite_retraction(trials, seed):
    rng = np.random.default_rng(seed)
    rep = Report()
    bad = None
    for _ in range(trials):
        T = pretree.random_tree(int(rng.integers(2, 13)), rng)
        for u in T.points:
            for v in T.points:
                if u != v and bad is None:
                    r = shadow.retraction_report(T, u, v)
                    if not r.ok:
                        bad = {"edges": [list(e) for e in T.edges], "u": u, "v": v, "check": r.failures()[0].name}
    rep.add("retraction_identities", bad is None, witness=bad, detail={"trees": trials})
    return rep


def suite_separation(trials, seed):
    rng = np.random.default_rng(seed)
    rep = Report()
    bad = None
    for _ in range(trials):
        T = pretree.random_tree(int(rng.integers(1, 16)), rng)
        r = shadow.shadow_separation(T)
        if not r.ok:
            bad = {"edges": [list(e) for e in T.edges], "triple": r.records[0].witness}
            break
    rep.add("shadow_separation", bad is None, witness=bad, detail={"trees": trials})
    return rep


def suite_convfun(trials, seed):
    rng = np.random.default_rng(seed)
    rep = Report()
    per_tree = 10
    bad = None
    for t in range(max(1, trials // per_tree)):
        T = pretree.random_tree(int(rng.integers(2, 16)), rng)
        r = tameness.convfun_property_test(T, per_tree, int(rng.integers(2**31)), control=False)
        if not r.ok:
            bad = {"edges": [list(e) for e in T.edges], "witness": r.records[0].witness}
            break
    rep.add("monotone_pairs_not_independent", bad is None, witness=bad, detail={"pairs": trials})
    w = tameness.is_independent(tameness.rademacher_family())
    ok = bool(w) and (w.a, w.b) == (Fraction(1, 4), Fraction(3, 4))
    rep.add("rademacher_control", ok, witness=None if ok else "control not independent")
    return rep


def suite_helly(trials, seed):
    rng = np.random.default_rng(seed)
    rep = Report()
    bad = None
    for k in range(trials):
        T = pretree.random_tree(20, rng)
        pool = [tameness.random_monotone_function(T, rng) for _ in range(4)]
        F = tameness.FunctionFamily(T, [pool[int(i)] for i in rng.integers(len(pool), size=256)])
        r = tameness.helly_select(F, Fraction(1, 10**6), 32)
        if not r or r.oscillation > Fraction(1, 10**6) or not tameness.limit_is_monotone(T, r.limit):
            bad = {"run": k}
            break
    rep.add("helly_selection", bad is None, witness=bad, detail={"runs": trials})
    return rep


def suite_equivalence(trials, seed):
    rep = Report()
    pairs = maps = 0
    bad = None
    # every ordered pair of trees where one side has at most 5 points and the other at most 6
    for n1 in range(1, 7):
        for n2 in range(1, 7):
            if n1 == 6 and n2 == 6:
                continue
            for S in pretree.nonisomorphic_trees(n1):
                for T in pretree.nonisomorphic_trees(n2):
                    e = pretree.monotone_equivalence(S, T)
                    pairs += 1
                    maps += e.n_maps
                    if not e.agree and bad is None:
                        bad = {"source": [list(x) for x in S.edges], "target": [list(x) for x in T.edges]}
    rep.add("b_and_c_monotone_agree", bad is None, witness=bad, detail={"tree_pairs": pairs, "maps": maps})
    return rep


def suite_lemma2(trials, seed):
    rep = Report()
    bad = []
    for f in entropy.standard_fixtures(seed):
        r = entropy.entropy_report(f.cover, f.seq, 12, f.name)
        if not r.ok:
            bad.append(f.name)
    rep.add("lemma2_bound_all_fixtures", not bad, witness=bad or None,
            detail={"fixtures": len(entropy.standard_fixtures(seed))})
    return rep


def suite_lemma1(trials, seed):
    rep = Report()
    bad = []
    n = 0
    for f in entropy.standard_fixtures(seed):
        if len(f.cover) >= 2:
            n += 1
            if not entropy.lemma1_check(f.cover).ok:
                bad.append(f.name)
    rep.add("irreducible_cover_at_most_boundary", not bad, witness=bad or None, detail={"covers": n})
    return rep


def suite_odometer(trials, seed):
    rep = Report()
    A = ztree.odometer()
    bad = [k for k in range(1, 13) if ztree.cylinder_dynamics(A, k)["cycle_lengths"] != [2**k]]
    rep.add("single_cycle_each_depth", not bad, witness=bad or None, detail={"depths": "1..12"})
    zero = A.tree.end("", "0")
    om = ztree.omega_limit_approx(A, zero, 3, 8)
    rep.add("omega_limit_all_cylinders", len(om) == 8, witness=sorted(om))
    r = ztree.detect_proximal(A, zero, A.tree.end("1", "0"), 20, 20)
    rep.add("no_proximal_pair_found", not r, witness=None if not r else r.words)
    return rep


def suite_ep(trials, seed):
    rep = Report()
    A = ztree.free_translations()
    words = [w for n in range(1, 5) for w in A.tree.words(n)]
    missing = None
    for w in words:
        for w2 in words:
            g = ztree.extreme_proximality_witness(A, w, w2, len(w) + len(w2) + 4)
            if not isinstance(g, str) and missing is None:
                missing = [w, w2]
    rep.add("witness_for_every_pair", missing is None, witness=missing, detail={"pairs": len(words) ** 2})
    hand = (ztree.extreme_proximality_witness(A, "a", "b", 6), ztree.extreme_proximality_witness(A, "a", "a", 6))
    rep.add("hand_witnesses", hand == ("bA", "abA"), witness=list(hand))
    return rep


def suite_closedness(trials, seed):
    rep = Report()
    for name, tree in (("free", ztree.RuleTree.free_group()), ("binary", ztree.RuleTree.kary(2))):
        rep.extend(ztree.closedness_test_RB(tree, trials, seed), prefix=f"{name}.")
    return rep


def suite_fragment(trials, seed):
    rep = Report()
    B = ztree.RuleTree.kary(2)
    F = ztree.RuleTree.free_group()
    cases = [
        (ztree.AxisFunction(B.end("", "0"), B.end("", "1")), "ray::0"),
        (ztree.AxisFunction(B.end("", "0"), B.end("", "1")), "cyl:"),
        (ztree.AxisFunction(B.end("1", "0"), B.end("", "01")), "cyl:1,e:0:1"),
        (ztree.AxisFunction(F.end("", "a"), F.end("", "A")), "cyl:"),
        (ztree.AxisFunction(F.end("", "a"), F.end("b", "a")), "ray:b:A,cyl:ab"),
        (ztree.AxisFunction(F.end("a", "b"), F.end("a", "B")), "cyl:a"),
    ]
    bad = []
    for i, (f, spec) in enumerate(cases):
        r = ztree.fragment_scan(f, spec, Fraction(1, 8), 8, allow_vertices=False)
        if not r:
            bad.append(i)
    rep.add("continuity_point_at_eighth", not bad, witness=bad or None, detail={"fixtures": len(cases)})
    return rep


SUITES = {
    "axioms": (suite_axioms, 1000, "pretree and median algebra axioms on random trees"),
    "retraction": (suite_retraction, 20, "median retraction onto an interval and its shadow preimages"),
    "shadow-separation": (suite_separation, 500, "complements of shadows separate the ends of a strict triple"),
    "convfun": (suite_convfun, 10000, "a pair of monotone functions on a median pretree is never independent"),
    "helly": (suite_helly, 100, "pointwise convergent subsequences of monotone functions"),
    "monotone-equivalence": (suite_equivalence, 1, "interval-preserving maps are exactly the connected-preimage maps"),
    "lemma1": (suite_lemma1, 1, "an irreducible cover has no more members than boundary points"),
    "lemma2-bound": (suite_lemma2, 1, "minimum subcovers of joined covers grow at most linearly"),
    "odometer-cycles": (suite_odometer, 1, "the dyadic adding machine permutes cylinders in one cycle"),
    "extreme-proximality": (suite_ep, 1, "free group boundary: the outside of a cylinder can be pushed into any cylinder"),
    "closedness": (suite_closedness, 500, "limits of between-triples are between"),
    "fragment": (suite_fragment, 1, "monotone functions on tree compactifications have continuity points"),
}


def cmd_suite(args, seed):
    if args.name not in SUITES:
        raise UsageError(f"unknown suite {args.name!r}; choose from {', '.join(SUITES)}")
    fn, default_trials, anchor = SUITES[args.name]
    trials = args.trials if args.trials is not None else default_trials
    rep = Report(anchor=anchor)
    _timed(rep, "", lambda: fn(trials, seed))
    return rep


COMMANDS = {
    "axioms": cmd_axioms,
    "median": cmd_median,
    "shadow": cmd_shadow,
    "topology": cmd_topology,
    "retract": cmd_retract,
    "separate": cmd_separate,
    "independence": cmd_independence,
    "tame": cmd_tame,
    "helly": cmd_helly,
    "ztree": cmd_ztree,
    "entropy": cmd_entropy,
    "suite": cmd_suite,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--in", dest="input", help="input file")
    common.add_argument("--seed", default=str(DEFAULT_SEED), help="integer seed or 'random'")
    common.add_argument("--trials", type=int)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--expect", choices=("pass", "fail", "independent", "tame", "proximal", "not-found"))
    common.add_argument("--nmax", type=int)
    common.add_argument("--radius", type=int)
    common.add_argument("--epsilon", help="positive rational p/q")
    common.add_argument("--target", type=int, help="target subsequence length for helly")
    common.add_argument("--timing", action="store_true", help="include per-check timings")
    common.add_argument("--complex")
    common.add_argument("--cover")
    common.add_argument("--autoseq", help="identity, reflect, rotate, swap:<r1>:<r2> or a file")

    p = _Parser(prog="treelike", description="Checks for pretrees, median algebras, tree actions and cover entropy.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "suite":
            sp.add_argument("name")
        elif name == "ztree":
            sp.add_argument("op")
            sp.add_argument("points", nargs="*")
        else:
            sp.add_argument("points", nargs="*")
    return p


def run(argv) -> tuple[Report | None, int, str]:
    """Parse argv, run the command and return (report, exit status, rendered output)."""
    parser = build_parser()
    try:
        # positionals may follow options ("shadow --in f u v"); argparse leaves those over
        args, extra = parser.parse_known_args(argv)
        bad = [x for x in extra if x.startswith("--")]
        if bad:
            raise UsageError(f"unrecognized arguments: {' '.join(bad)}")
        if extra:
            if args.command is None or args.command == "suite":
                raise UsageError(f"unrecognized arguments: {' '.join(extra)}")
            args.points = list(args.points) + extra
        if not args.command:
            raise UsageError("missing command; choose from " + ", ".join(COMMANDS))
        seed = _seed(args)
        out = COMMANDS[args.command](args, seed)
        rep, outcome = out if isinstance(out, tuple) else (out, None)
    except UsageError as exc:
        return None, 2, f"usage error: {exc}\n"
    except (ValueError, KeyError, OSError) as exc:
        return None, 2, f"input error: {exc}\n"
    if outcome is None:
        outcome = "pass" if rep.ok else "fail"
    expect = args.expect
    if expect is None:
        expect = {"independent": "tame", "tame": "tame", "proximal": "proximal", "not-found": "proximal"}.get(outcome, "pass")
    rep.command = " ".join(argv)
    rep.seed = seed
    met = outcome == expect
    rep.add("expectation", met, witness=None if met else {"expected": expect, "outcome": outcome},
            detail={"expected": expect, "outcome": outcome})
    text = rep.to_json(args.timing) + "\n" if args.format == "json" else rep.to_text(args.timing)
    return rep, 0 if met else 1, text


def main(argv=None) -> int:
    rep, status, text = run(sys.argv[1:] if argv is None else argv)
    stream = sys.stderr if status == 2 else sys.stdout
    stream.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
