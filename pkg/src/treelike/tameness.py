"""Independence of function families, tameness, Helly selection and monotone separators.

Functions are dicts from point ids to exact rationals (``fractions.Fraction``).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .pretree import BetweennessStructure, is_median_pretree, is_monotone_function, order_pretree
from .report import Report
from .shadow import chain_order, retraction_map

MAX_INDEPENDENCE_LEN = 16
MAX_TAME_LEN = 12


@dataclass
class FunctionFamily:
    carrier: BetweennessStructure
    functions: list[dict]
    bounds: tuple | None = None

    def __post_init__(self):
        pts = set(self.carrier.points)
        fs = []
        for f in self.functions:
            if set(f) != pts:
                raise ValueError("every function must be defined on exactly the carrier points")
            fs.append({p: Fraction(v) for p, v in f.items()})
        self.functions = fs
        vals = [v for f in fs for v in f.values()]
        if self.bounds is None:
            self.bounds = (min(vals), max(vals)) if vals else (Fraction(0), Fraction(0))
        c, d = (Fraction(b) for b in self.bounds)
        if vals and (min(vals) < c or max(vals) > d):
            raise ValueError("values outside declared bounds")
        self.bounds = (c, d)

    def __len__(self) -> int:
        return len(self.functions)

    def sub(self, indices) -> "FunctionFamily":
        return FunctionFamily(self.carrier, [self.functions[i] for i in indices], self.bounds)

    def matrix(self) -> np.ndarray:
        """Values as an object array, rows = functions, columns = carrier points."""
        pts = self.carrier.points
        return np.array([[f[p] for p in pts] for f in self.functions], dtype=object)


@dataclass
class IndependenceWitness:
    a: Fraction
    b: Fraction
    # pattern string like "PMP" (index i below a for P, above b for M) -> point
    pattern_witnesses: dict

    def __bool__(self) -> bool:
        return True


@dataclass
class NotIndependent:
    gaps_checked: int = 0

    def __bool__(self) -> bool:
        return False


def _rank_matrix(F: FunctionFamily):
    vals = sorted({v for f in F.functions for v in f.values()})
    rank = {v: k for k, v in enumerate(vals)}
    pts = F.carrier.points
    R = np.array([[rank[f[p]] for p in pts] for f in F.functions], dtype=np.int64).reshape(len(F), len(pts))
    return vals, R


def is_independent(F: FunctionFamily) -> IndependenceWitness | NotIndependent:
    """Decide whether some a < b realizes every full P/M pattern.

    Realizability only improves as a and b move closer together, so it is enough
    to place both thresholds inside one gap between consecutive distinct values.
    """
    n = len(F)
    if n > MAX_INDEPENDENCE_LEN:
        raise ValueError(f"at most {MAX_INDEPENDENCE_LEN} functions")
    if n == 0:
        raise ValueError("empty family")
    vals, R = _rank_matrix(F)
    if len(F.carrier) < 2**n:
        return NotIndependent(0)
    weights = np.int64(1) << np.arange(n, dtype=np.int64)
    for k in range(len(vals) - 1):
        codes = (R > k).astype(np.int64).T @ weights  # bit i set: f_i >= vals[k+1] (M)
        present, first = np.unique(codes, return_index=True)
        if len(present) == 2**n:
            lo, hi = vals[k], vals[k + 1]
            gap = hi - lo
            wit = {}
            for code, x in zip(present.tolist(), first.tolist()):
                pat = "".join("M" if code >> i & 1 else "P" for i in range(n))
                wit[pat] = F.carrier.points[x]
            return IndependenceWitness(lo + gap / 4, lo + 3 * gap / 4, wit)
    return NotIndependent(max(len(vals) - 1, 0))


def verify_witness(F: FunctionFamily, w: IndependenceWitness) -> bool:
    if not w.a < w.b:
        return False
    n = len(F)
    for pat in ("".join(p) for p in itertools.product("PM", repeat=n)):
        x = w.pattern_witnesses.get(pat)
        if x is None:
            return False
        for i, c in enumerate(pat):
            v = F.functions[i][x]
            if (c == "P" and not v < w.a) or (c == "M" and not v > w.b):
                return False
    return True


@dataclass
class TameVerdict:
    tame: bool
    indices: tuple | None = None
    witness: IndependenceWitness | None = None

    def __bool__(self) -> bool:
        return self.tame


def tame_check(F: FunctionFamily, max_len: int = 2) -> TameVerdict:
    """No order-preserving sub-family of length 2..max_len is independent.

    Any independent sub-family of length >= 2 restricts to an independent pair,
    so pairs are searched first and longer lengths only grow a found pair.
    Length-1 sub-families are skipped: one nonconstant function is independent
    on its own and says nothing about tameness.
    """
    if max_len > MAX_TAME_LEN:
        raise ValueError(f"max_len is limited to {MAX_TAME_LEN}")
    if max_len < 2:
        return TameVerdict(True)
    for i, j in itertools.combinations(range(len(F)), 2):
        w = is_independent(F.sub((i, j)))
        if w:
            return TameVerdict(False, (i, j), w)
    return TameVerdict(True)


def monotone_separator(T: BetweennessStructure, u, v) -> dict:
    """e . phi_{u,v} with the chain [u, v] spaced evenly over [0, 1]."""
    iu, iv = T.idx(u), T.idx(v)
    if iu == iv:
        raise ValueError("monotone_separator needs u != v")
    phi = retraction_map(T, iu, iv)
    chain = chain_order(T, iu, iv)
    step = Fraction(1, len(chain) - 1)
    e = {x: k * step for k, x in enumerate(chain)}
    return {p: e[int(phi[i])] for i, p in enumerate(T.points)}


def random_step_map(values, rng: np.random.Generator):
    """A random nondecreasing map on a finite set of rationals, into [0, 1]."""
    vs = sorted(set(values))
    jumps = rng.integers(0, 3, size=len(vs))
    levels = np.cumsum(jumps)
    top = max(int(levels[-1]), 1)
    return {v: Fraction(int(l), top) for v, l in zip(vs, levels)}


def random_monotone_function(T: BetweennessStructure, rng: np.random.Generator) -> dict:
    n = len(T)
    if n == 1:
        return {T.points[0]: Fraction(int(rng.integers(0, 2)))}
    u, v = rng.choice(n, size=2, replace=False)
    f = monotone_separator(T, T.points[u], T.points[v])
    if rng.random() < 0.5:
        # reversing the chain is also monotone
        f = {p: 1 - x for p, x in f.items()}
    s = random_step_map(f.values(), rng)
    return {p: s[x] for p, x in f.items()}


def rademacher_family() -> FunctionFamily:
    T = BetweennessStructure.from_order(["0", "1", "2", "3"])
    f1 = {"0": 0, "1": 0, "2": 1, "3": 1}
    f2 = {"0": 0, "1": 1, "2": 0, "3": 1}
    return FunctionFamily(T, [f1, f2])


def convfun_property_test(T: BetweennessStructure, trials: int = 1000, seed=0, control: bool = True) -> Report:
    """Random monotone pairs on T must never be independent."""
    if not is_median_pretree(T):
        raise ValueError("needs a median pretree")
    rep = Report(command="convfun", seed=seed)
    children = np.random.SeedSequence(seed).spawn(trials)
    found = None
    for k, ss in enumerate(children):
        rng = np.random.default_rng(ss)
        pair = FunctionFamily(T, [random_monotone_function(T, rng), random_monotone_function(T, rng)])
        w = is_independent(pair)
        if w:
            found = {"trial": k, "a": w.a, "b": w.b, "functions": pair.functions}
            break
    rep.add("monotone_pairs_not_independent", found is None, witness=found, detail={"trials": trials})
    if control:
        w = is_independent(rademacher_family())
        ok = bool(w) and w.a == Fraction(1, 4) and w.b == Fraction(3, 4)
        rep.add("rademacher_control_independent", ok, witness=None if ok else "no witness",
                detail={"a": w.a, "b": w.b} if w else None)
    return rep


@dataclass
class SelectionResult:
    indices: list[int]
    limit: dict
    oscillation: Fraction

    def __bool__(self) -> bool:
        return True


@dataclass
class Insufficient:
    indices: list[int]
    target_len: int
    stopped_at: str | None = None

    def __bool__(self) -> bool:
        return False


def helly_bound(F: FunctionFamily, epsilon, target_len: int) -> int:
    """Sequence length that guarantees helly_select reaches target_len."""
    c, d = F.bounds
    buckets = math.floor((d - c) / Fraction(epsilon)) + 1
    return target_len * buckets ** len(F.carrier)


def helly_select(F: FunctionFamily, epsilon, target_len: int) -> SelectionResult | Insufficient:
    """Pigeonhole refinement point by point with buckets of width epsilon."""
    eps = Fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    c, _ = F.bounds
    idx = list(range(len(F)))
    limit = {}
    for p in F.carrier.points:
        buckets: dict[int, list[int]] = {}
        for i in idx:
            k = math.floor((F.functions[i][p] - c) / eps)
            buckets.setdefault(k, []).append(i)
        # largest bucket; ties go to the lower bucket
        k = min(buckets, key=lambda b: (-len(buckets[b]), b))
        idx = buckets[k]
        limit[p] = c + (k + Fraction(1, 2)) * eps
        if len(idx) < target_len:
            return Insufficient(idx, target_len, p)
    osc = Fraction(0)
    for p in F.carrier.points:
        vs = [F.functions[i][p] for i in idx]
        osc = max(osc, max(vs) - min(vs))
    return SelectionResult(idx, limit, osc)


def separating_tame_family(T: BetweennessStructure, automorphisms=()) -> tuple[FunctionFamily, Report]:
    """Separators for every pair u < v, checked for separation, tameness and invariance."""
    if not is_median_pretree(T):
        raise ValueError("needs a median pretree")
    pts = T.points
    pairs = list(itertools.combinations(pts, 2))
    fam = FunctionFamily(T, [monotone_separator(T, u, v) for u, v in pairs] or [{p: Fraction(0) for p in pts}])
    rep = Report(command="separating-family")

    unsep = None
    for p, q in pairs:
        if all(f[p] == f[q] for f in fam.functions):
            unsep = (p, q)
            break
    rep.add("separates_points", unsep is None, witness=unsep)

    verdict = tame_check(fam, 2)
    rep.add("no_independent_pair", verdict.tame,
            witness=None if verdict.tame else [pairs[i] for i in verdict.indices])

    bad = None
    for gi, g in enumerate(automorphisms):
        for (u, v), f in zip(pairs, fam.functions):
            composed = {p: f[g[p]] for p in pts}
            if not is_monotone_function(T, composed).holds:
                bad = {"automorphism": gi, "separator": (u, v)}
                break
        if bad:
            break
    rep.add("automorphism_invariant", bad is None, witness=bad, detail={"automorphisms": len(automorphisms)})
    return fam, rep


def limit_is_monotone(T: BetweennessStructure, limit: dict) -> bool:
    return bool(is_monotone_function(T, limit).holds)


__all__ = [
    "FunctionFamily", "IndependenceWitness", "NotIndependent", "is_independent", "verify_witness",
    "TameVerdict", "tame_check", "monotone_separator", "random_monotone_function", "rademacher_family",
    "convfun_property_test", "SelectionResult", "Insufficient", "helly_select", "helly_bound",
    "separating_tame_family", "limit_is_monotone", "order_pretree",
]
