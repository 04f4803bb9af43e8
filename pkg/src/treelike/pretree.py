"""Finite betweenness structures: pretree axioms, intervals, medians and monotone maps.

A structure is a finite set of string point ids together with a ternary
relation ``<a, b, c>`` ("b lies between a and c").  Three backends are
supported: a finite graph-theoretic tree, a linear order, and an explicit
table of triples.  All bulk checks run on a dense boolean table
``btw[a, b, c]`` indexed by point position.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping as TMapping, Sequence

import numpy as np

TREE = "tree"
ORDER = "order"
EXPLICIT = "explicit"


class StructuralInconsistency(ValueError):
    """Raised when a median intersection has two or more points."""


def _normalize(a: str, b: str, c: str) -> tuple[str, str, str]:
    return (a, b, c) if a <= c else (c, b, a)


@dataclass(frozen=True, eq=False)
class BetweennessStructure:
    points: tuple[str, ...]
    backend: str
    edges: tuple[tuple[str, str], ...] = ()
    triples: frozenset = field(default_factory=frozenset)
    _memo: dict = field(default_factory=dict, repr=False, compare=False)

    # -- construction -------------------------------------------------
    @classmethod
    def from_tree(cls, edges: Iterable[tuple], points: Iterable | None = None) -> "BetweennessStructure":
        edges = tuple((str(u), str(v)) for u, v in edges)
        pts: list[str] = [str(p) for p in points] if points is not None else []
        for u, v in edges:
            for p in (u, v):
                if p not in pts:
                    pts.append(p)
        if not pts:
            raise ValueError("a tree needs at least one point")
        if len(set(pts)) != len(pts):
            raise ValueError("duplicate point ids")
        if len(edges) != len(pts) - 1:
            raise ValueError(f"a tree on {len(pts)} points has {len(pts) - 1} edges, got {len(edges)}")
        T = cls(tuple(pts), TREE, edges=edges)
        seen = T._bfs_parents(0)
        if any(p is None for p in seen[1:]) and len(pts) > 1:
            raise ValueError("edge list is not connected")
        return T

    @classmethod
    def from_order(cls, points: Iterable) -> "BetweennessStructure":
        pts = tuple(str(p) for p in points)
        if len(set(pts)) != len(pts):
            raise ValueError("duplicate point ids")
        return cls(pts, ORDER)

    @classmethod
    def from_triples(cls, points: Iterable, triples: Iterable[tuple], include_trivial: bool = True) -> "BetweennessStructure":
        """Explicit relation.  ``include_trivial`` adds the endpoint triples <a,a,c>, <a,c,c>."""
        pts = tuple(str(p) for p in points)
        known = set(pts)
        norm = set()
        for a, b, c in triples:
            a, b, c = str(a), str(b), str(c)
            for p in (a, b, c):
                if p not in known:
                    raise KeyError(f"unknown point {p!r}")
            norm.add(_normalize(a, b, c))
        if include_trivial:
            for a in pts:
                for c in pts:
                    norm.add(_normalize(a, a, c))
                    norm.add(_normalize(a, c, c))
        return cls(pts, EXPLICIT, triples=frozenset(norm))

    # -- indexing -----------------------------------------------------
    @cached_property
    def index(self) -> dict[str, int]:
        return {p: i for i, p in enumerate(self.points)}

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        return f"BetweennessStructure({self.backend}, {len(self.points)} points)"

    def idx(self, p) -> int:
        try:
            return self.index[str(p)]
        except KeyError:
            raise KeyError(f"unknown point {p!r}") from None

    @cached_property
    def adjacency(self) -> list[list[int]]:
        if self.backend != TREE:
            raise TypeError("adjacency is only defined for tree backends")
        adj: list[list[int]] = [[] for _ in self.points]
        for u, v in self.edges:
            i, j = self.index[u], self.index[v]
            adj[i].append(j)
            adj[j].append(i)
        return adj

    def _bfs_parents(self, src: int) -> list[int | None]:
        adj: list[list[int]] = [[] for _ in self.points]
        for u, v in self.edges:
            i, j = self.index[u], self.index[v]
            adj[i].append(j)
            adj[j].append(i)
        parent: list[int | None] = [None] * len(self.points)
        parent[src] = src
        queue = deque([src])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if parent[y] is None:
                    parent[y] = x
                    queue.append(y)
        return parent

    @cached_property
    def distances(self) -> np.ndarray:
        """All-pairs path length (tree backend only)."""
        n = len(self.points)
        adj = self.adjacency
        D = np.full((n, n), -1, dtype=np.int64)
        for s in range(n):
            D[s, s] = 0
            queue = deque([s])
            while queue:
                x = queue.popleft()
                for y in adj[x]:
                    if D[s, y] < 0:
                        D[s, y] = D[s, x] + 1
                        queue.append(y)
        return D

    @cached_property
    def table(self) -> np.ndarray:
        """Boolean array with ``table[a, b, c]`` true iff <a, b, c>."""
        n = len(self.points)
        if self.backend == TREE:
            D = self.distances
            return D[:, :, None] + D[None, :, :] == D[:, None, :]
        if self.backend == ORDER:
            r = np.arange(n)
            a, b, c = r[:, None, None], r[None, :, None], r[None, None, :]
            return ((a <= b) & (b <= c)) | ((c <= b) & (b <= a))
        t = np.zeros((n, n, n), dtype=bool)
        for a, b, c in self.triples:
            i, j, k = self.index[a], self.index[b], self.index[c]
            t[i, j, k] = True
            t[k, j, i] = True
        return t

    @cached_property
    def median_table(self) -> np.ndarray:
        """``median_table[a, b, c]`` = index of m(a,b,c), or -1 when empty."""
        T = self.table
        n = len(self.points)
        out = np.full((n, n, n), -1, dtype=np.int64)
        J = T.transpose(0, 2, 1)  # J[b, c, x] = <b, x, c>
        for a in range(n):
            Ia = T[a].T  # Ia[b, x] = <a, x, b>
            K = Ia[:, None, :] & Ia[None, :, :] & J
            counts = K.sum(axis=2)
            if (counts > 1).any():
                b, c = np.argwhere(counts > 1)[0]
                xs = [self.points[x] for x in np.flatnonzero(K[b, c])]
                raise StructuralInconsistency(
                    f"median of ({self.points[a]}, {self.points[b]}, {self.points[c]}) has {len(xs)} points {xs}"
                )
            single = counts == 1
            out[a][single] = K.argmax(axis=2)[single]
        return out

    def interval_mask(self, u: int, v: int) -> np.ndarray:
        return self.table[u, :, v]

    def restrict(self, points: Iterable) -> "BetweennessStructure":
        """Induced structure on a subset, as an explicit relation."""
        pts = [str(p) for p in points]
        idx = [self.idx(p) for p in pts]
        sub = self.table[np.ix_(idx, idx, idx)]
        triples = [(pts[a], pts[b], pts[c]) for a, b, c in np.argwhere(sub)]
        return BetweennessStructure.from_triples(pts, triples, include_trivial=False)


# -- point-level operations ----------------------------------------------

def between(T: BetweennessStructure, a, b, c) -> bool:
    ia, ib, ic = T.idx(a), T.idx(b), T.idx(c)
    if T.backend == TREE:
        # walk the unique a-c path back from c
        parent = T._bfs_parents(ia)
        x = ic
        while True:
            if x == ib:
                return True
            if x == ia:
                return False
            x = parent[x]
    if T.backend == ORDER:
        return ia <= ib <= ic or ic <= ib <= ia
    return _normalize(str(a), str(b), str(c)) in T.triples


@dataclass(frozen=True)
class Interval:
    u: str
    v: str
    members: frozenset


def interval(T: BetweennessStructure, u, v) -> Interval:
    iu, iv = T.idx(u), T.idx(v)
    members = frozenset(T.points[x] for x in np.flatnonzero(T.table[iu, :, iv]))
    return Interval(str(u), str(v), members)


def median(T: BetweennessStructure, a, b, c) -> str | None:
    """The median point of a, b, c, or ``None`` when the three intervals do not meet."""
    ia, ib, ic = T.idx(a), T.idx(b), T.idx(c)
    t = T.table
    common = np.flatnonzero(t[ia, :, ib] & t[ia, :, ic] & t[ib, :, ic])
    if len(common) > 1:
        raise StructuralInconsistency(
            f"median of ({a}, {b}, {c}) is {[T.points[x] for x in common]}; not a pretree"
        )
    return T.points[common[0]] if len(common) else None


def is_median_pretree(T: BetweennessStructure) -> bool:
    return bool((T.median_table >= 0).all())


def is_monotone_function(T: BetweennessStructure, values) -> MonotoneVerdict:
    """B-monotonicity of a real-valued function: f(w) lies between f(u) and f(v) whenever <u,w,v>."""
    if isinstance(values, dict):
        vals = [values[p] for p in T.points]
    else:
        vals = list(values)
    # compare through ranks so rationals stay exact
    order = sorted(set(vals))
    rank = {v: i for i, v in enumerate(order)}
    r = np.array([rank[v] for v in vals], dtype=np.int64)
    lo = np.minimum(r[:, None], r[None, :])
    hi = np.maximum(r[:, None], r[None, :])
    bad = T.table & ((r[None, :, None] < lo[:, None, :]) | (r[None, :, None] > hi[:, None, :]))
    if bad.any():
        u, w, v = np.argwhere(bad)[0]
        return MonotoneVerdict(False, (T.points[u], T.points[w], T.points[v]))
    return MonotoneVerdict(True)


def order_pretree(values: Iterable) -> BetweennessStructure:
    """Linear-order structure on distinct rationals, points named by ``str(value)``."""
    return BetweennessStructure.from_order(str(v) for v in sorted(set(values)))


def function_mapping(T: BetweennessStructure, values: dict) -> Mapping:
    """View a rational-valued function as a map into the order pretree of its values."""
    target = order_pretree(values.values())
    return Mapping(T, target, {p: str(values[p]) for p in T.points})


def is_convex(T: BetweennessStructure, S: Iterable) -> bool:
    idx = [T.idx(p) for p in S]
    if not idx:
        return True
    mask = np.zeros(len(T), dtype=bool)
    mask[idx] = True
    sub = T.table[np.ix_(idx, range(len(T)), idx)]  # sub[u, x, v]
    return bool(not (sub & ~mask[None, :, None]).any())


# -- axiom reports --------------------------------------------------------

@dataclass
class AxiomResult:
    name: str
    holds: bool
    witnesses: list[tuple[str, ...]] = field(default_factory=list)


@dataclass
class AxiomReport:
    results: dict[str, AxiomResult]

    @property
    def ok(self) -> bool:
        return all(r.holds for r in self.results.values())

    def __getitem__(self, name: str) -> AxiomResult:
        return self.results[name]

    def failing(self) -> list[str]:
        return [k for k, r in self.results.items() if not r.holds]


def _first(T: BetweennessStructure, viol: np.ndarray, prefix: tuple[int, ...] = (), limit: int = 3):
    hits = np.argwhere(viol)[:limit]
    return [tuple(T.points[i] for i in prefix + tuple(int(x) for x in h)) for h in hits]


class _Collector:
    def __init__(self, T, names):
        self.T = T
        self.results = {n: AxiomResult(n, True) for n in names}

    def add(self, name, viol, prefix=()):
        if viol.any():
            r = self.results[name]
            r.holds = False
            if len(r.witnesses) < 3:
                r.witnesses.extend(_first(self.T, viol, prefix, 3 - len(r.witnesses)))


def check_axioms(T: BetweennessStructure) -> AxiomReport:
    """Exhaustive B1-B3 and A0-A5 over all required tuples."""
    t = T.table
    n = len(T)
    col = _Collector(T, ["B1", "B2", "B3", "A0", "A1", "A2", "A3", "A4", "A5"])
    tr = t.transpose(0, 2, 1)  # tr[a, b, c] = <a, c, b>
    eye = np.eye(n, dtype=bool)

    col.add("B1", t & ~t.transpose(2, 1, 0))
    # B2 forward: <a,b,c> and <a,c,b> with b != c; backward: <a,b,b> must hold
    col.add("B2", (t & tr & ~eye[None, :, :]) | (~t & eye[None, :, :]))
    col.add("A0", ~t.diagonal(axis1=0, axis2=1).T | ~t.diagonal(axis1=1, axis2=2))
    col.add("A1", t != t.transpose(2, 1, 0))
    col.add("A2", t & tr & ~eye[None, :, :])

    btw_dbc = t.transpose(1, 2, 0)  # [b, c, d] = <d, b, c>
    mem = t.transpose(0, 2, 1)  # mem[a, b, x] = x in [a, b]
    for a in range(n):
        ta = t[a]  # ta[b, c] = <a, b, c>
        # B3: <a,b,c> and not <a,b,d> and not <d,b,c>
        col.add("B3", ta[:, :, None] & ~ta[:, None, :] & ~btw_dbc, (a,))
        ia = mem[a]  # ia[b, x] = x in [a, b]
        # A3: x in [a,b], x not in [a,c], x not in [c,b]   -> index [b, c, x]
        not_cb = ~mem.transpose(1, 0, 2)  # [b, c, x] = x not in [c, b]
        A3 = ia[:, None, :] & ~ia[None, :, :] & not_cb
        col.add("A3", A3, (a,))
        # A4: c in [a,b] and x in [a,c] or [c,b] but x not in [a,b]
        c_in = ia[:, :, None]  # [b, c, 1]
        A4 = c_in & (ia[None, :, :] | mem.transpose(1, 0, 2)) & ~ia[:, None, :]
        col.add("A4", A4, (a,))
        # A5: b in [a,c], c in [a,d], c not in [b,d]  -> index [b, c, d]
        A5 = ta[:, :, None] & ta[None, :, :] & ~t
        col.add("A5", A5, (a,))
    rep = AxiomReport(col.results)
    return rep


def check_median_algebra(T: BetweennessStructure) -> AxiomReport:
    """Exhaustive M1-M3 for the induced median operation (M3 over all quintuples)."""
    M = T.median_table
    if (M < 0).any():
        raise ValueError("not a median pretree: some median is empty")
    n = len(T)
    col = _Collector(T, ["M1", "M2", "M3"])
    r = np.arange(n)
    col.add("M1", M[r[:, None], r[:, None], r[None, :]] != r[:, None])
    perms = [M.transpose(p) for p in itertools.permutations(range(3))]
    col.add("M2", np.logical_or.reduce([P != M for P in perms]))
    hit = _m3_violation(M)
    if hit is not None:
        col.results["M3"].holds = False
        col.results["M3"].witnesses.append(tuple(T.points[i] for i in hit))
    return AxiomReport(col.results)


def _m3_violation(M: np.ndarray):
    """First (x, y, z, u, v) with m(m(x,y,z),u,v) != m(x, m(y,u,v), m(z,u,v)), or None.

    Both sides are symmetric in (u, v) and the right side is symmetric in
    (y, z), so only u <= v and y <= z need visiting.
    """
    from ._kernels import m3_first_violation

    hit = m3_first_violation(np.ascontiguousarray(M.transpose(1, 2, 0), dtype=np.int64))
    return None if hit[0] < 0 else tuple(int(h) for h in hit)


# -- maps -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Mapping:
    source: BetweennessStructure
    target: BetweennessStructure
    table: TMapping[str, str]

    def __post_init__(self):
        tab = {str(k): str(v) for k, v in self.table.items()}
        missing = [p for p in self.source.points if p not in tab]
        if missing:
            raise ValueError(f"map is not total; missing {missing}")
        for k, v in tab.items():
            self.source.idx(k)
            self.target.idx(v)
        object.__setattr__(self, "table", tab)

    def array(self) -> np.ndarray:
        return np.array([self.target.index[self.table[p]] for p in self.source.points], dtype=np.int64)


@dataclass
class MonotoneVerdict:
    holds: bool
    witness: tuple | frozenset | None = None

    def __bool__(self) -> bool:
        return self.holds


def _connected_subsets(T: BetweennessStructure) -> list[frozenset[int]]:
    """All nonempty connected subsets: subtrees (tree) or order-intervals (order)."""
    n = len(T)
    if T.backend == ORDER:
        return [frozenset(range(i, j + 1)) for i in range(n) for j in range(i, n)]
    if T.backend != TREE:
        raise TypeError("connected subsets need a tree or order backend")
    adj = T.adjacency
    found: set[frozenset[int]] = set()
    # grow subtrees whose smallest vertex is `root`
    for root in range(n):
        stack = [(frozenset([root]), frozenset(y for y in adj[root] if y > root))]
        while stack:
            cur, frontier = stack.pop()
            if cur in found:
                continue
            found.add(cur)
            for y in frontier:
                nxt = cur | {y}
                if nxt not in found:
                    stack.append((nxt, (frontier | {z for z in adj[y] if z > root}) - nxt))
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def _is_connected(T: BetweennessStructure, S: frozenset[int]) -> bool:
    if len(S) <= 1:
        return True
    if T.backend == ORDER:
        return max(S) - min(S) + 1 == len(S)
    adj = T.adjacency
    start = next(iter(S))
    seen = {start}
    queue = [start]
    while queue:
        x = queue.pop()
        for y in adj[x]:
            if y in S and y not in seen:
                seen.add(y)
                queue.append(y)
    return len(seen) == len(S)


def check_monotone(f: Mapping, mode: str = "B") -> MonotoneVerdict:
    """B: f[u,v] is inside [f(u), f(v)].  C: preimages of connected sets are connected."""
    S, Tg = f.source, f.target
    F = f.array()
    if mode == "B":
        ts, tt = S.table, Tg.table
        # bad[u, w, v] = <u,w,v> in source but not <f u, f w, f v> in target
        bad = ts & ~tt[np.ix_(F, F, F)]
        if bad.any():
            u, w, v = np.argwhere(bad)[0]
            return MonotoneVerdict(False, (S.points[u], S.points[w], S.points[v]))
        return MonotoneVerdict(True)
    if mode == "C":
        for B in (S, Tg):
            if B.backend not in (TREE, ORDER):
                raise TypeError("mode C needs tree- or order-backed structures")
        for A in _connected_subsets(Tg):
            pre = frozenset(int(i) for i in np.flatnonzero(np.isin(F, list(A))))
            if pre and not _is_connected(S, pre):
                return MonotoneVerdict(False, frozenset(Tg.points[a] for a in A))
        return MonotoneVerdict(True)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass
class EquivalenceReport:
    n_maps: int
    n_b_monotone: int
    n_c_monotone: int
    disagreements: int
    counterexample: dict | None = None

    @property
    def agree(self) -> bool:
        return self.disagreements == 0


def _all_maps(n_src: int, n_tgt: int) -> np.ndarray:
    if n_src == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((n_tgt,) * n_src).reshape(n_src, -1).T
    return grids.astype(np.int64)


def monotone_equivalence(source: BetweennessStructure, target: BetweennessStructure, limit: int = 6) -> EquivalenceReport:
    """Enumerate every total map and compare the B- and C-monotone verdicts."""
    for B in (source, target):
        if B.backend != TREE:
            raise TypeError("monotone_equivalence expects tree-backed structures")
        if len(B) > limit:
            raise ValueError(f"size limit exceeded: {len(B)} > {limit} points")
    ns, nt = len(source), len(target)
    F = _all_maps(ns, nt)
    ts, tt = source.table, target.table

    # B-monotone: every source triple maps to a target triple
    us, ws, vs = np.nonzero(ts)
    b_ok = tt[F[:, us], F[:, ws], F[:, vs]].all(axis=1)

    # C-monotone: every connected target set pulls back to a connected (or empty) set
    weights = 1 << np.arange(ns, dtype=np.int64)
    conn_lookup = np.zeros(1 << ns, dtype=bool)
    for m in range(1 << ns):
        S = frozenset(i for i in range(ns) if m >> i & 1)
        conn_lookup[m] = _is_connected(source, S)
    c_ok = np.ones(len(F), dtype=bool)
    for A in _connected_subsets(target):
        inA = np.zeros(nt, dtype=bool)
        inA[list(A)] = True
        codes = (inA[F] * weights).sum(axis=1)
        c_ok &= conn_lookup[codes]

    diff = np.flatnonzero(b_ok != c_ok)
    cex = None
    if len(diff):
        row = F[diff[0]]
        cex = {source.points[i]: target.points[row[i]] for i in range(ns)}
    return EquivalenceReport(len(F), int(b_ok.sum()), int(c_ok.sum()), len(diff), cex)


# -- generators -------------------------------------------------------------

def path(n: int, prefix: str = "") -> BetweennessStructure:
    pts = [f"{prefix}{i}" for i in range(n)]
    return BetweennessStructure.from_tree(zip(pts, pts[1:]), pts)


def star(leaves: Sequence[str] = ("x", "y", "z"), center: str = "c") -> BetweennessStructure:
    return BetweennessStructure.from_tree([(center, leaf) for leaf in leaves], [center, *leaves])


def random_tree(n: int, rng: np.random.Generator) -> BetweennessStructure:
    """Uniform random labelled tree on points "0".."n-1" (Pruefer decoding)."""
    if n <= 0:
        raise ValueError("n must be positive")
    pts = [str(i) for i in range(n)]
    if n == 1:
        return BetweennessStructure.from_tree([], pts)
    if n == 2:
        return BetweennessStructure.from_tree([("0", "1")], pts)
    seq = rng.integers(0, n, size=n - 2)
    degree = np.ones(n, dtype=np.int64)
    np.add.at(degree, seq, 1)
    edges = []
    for s in seq:
        leaf = int(np.flatnonzero(degree == 1)[0])
        edges.append((pts[leaf], pts[int(s)]))
        degree[leaf] -= 1
        degree[s] -= 1
    u, v = np.flatnonzero(degree == 1)
    edges.append((pts[u], pts[v]))
    return BetweennessStructure.from_tree(edges, pts)


def nonisomorphic_trees(n: int) -> list[BetweennessStructure]:
    """One representative tree per isomorphism class on n points."""
    import networkx as nx

    if n == 1:
        return [BetweennessStructure.from_tree([], ["0"])]
    out = []
    for g in nx.nonisomorphic_trees(n):
        out.append(BetweennessStructure.from_tree([(str(u), str(v)) for u, v in g.edges()], [str(i) for i in range(n)]))
    return out
