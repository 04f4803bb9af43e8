"""Cell complexes of subdivided trees, star-open covers, exact minimum subcovers and
sequence entropy of covers under complex automorphisms.

Cells are vertices and open edge segments.  An edge ``p|q`` of the underlying
tree split into m pieces has internal vertices ``p|q@1 .. p|q@(m-1)`` and
segments ``p|q/1 .. p|q/m`` counted from p (just ``p|q`` when m = 1).  Cell
sets are integer bitmasks over ``CellComplex.cells``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .pretree import BetweennessStructure
from .report import Report


@dataclass
class CellComplex:
    tree_points: tuple
    tree_edges: tuple
    m: int = 1
    cells: list = field(init=False)
    is_vertex: list = field(init=False)
    ends: dict = field(init=False)  # segment index -> (vertex index, vertex index)
    star: dict = field(init=False)  # vertex index -> incident segment indices

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("subdivision factor must be >= 1")
        T = BetweennessStructure.from_tree(self.tree_edges, self.tree_points)
        self.tree_points = T.points
        self.tree_edges = tuple(tuple(e) for e in T.edges)
        cells = list(T.points)
        vert = [True] * len(cells)
        segs = []
        for p, q in self.tree_edges:
            chain = [p] + [f"{p}|{q}@{k}" for k in range(1, self.m)] + [q]
            for name in chain[1:-1]:
                cells.append(name)
                vert.append(True)
            for k in range(1, self.m + 1):
                name = f"{p}|{q}" if self.m == 1 else f"{p}|{q}/{k}"
                segs.append((name, chain[k - 1], chain[k]))
        for name, _, _ in segs:
            cells.append(name)
            vert.append(False)
        self.cells = cells
        self.is_vertex = vert
        index = {c: i for i, c in enumerate(cells)}
        if len(index) != len(cells):
            raise ValueError("cell names collide; avoid '|', '@' and '/' in vertex names")
        self.index = index
        self.ends = {index[s]: (index[a], index[b]) for s, a, b in segs}
        self.star = {i: [] for i, v in enumerate(vert) if v}
        for s, (a, b) in self.ends.items():
            self.star[a].append(s)
            self.star[b].append(s)
        self.star_mask = {v: _bits(segs_) for v, segs_ in self.star.items()}
        self.end_mask = {s: (1 << a) | (1 << b) for s, (a, b) in self.ends.items()}
        self.vertex_mask = _bits(i for i, v in enumerate(vert) if v)

    @classmethod
    def from_structure(cls, T: BetweennessStructure, m: int = 1) -> "CellComplex":
        return cls(T.points, T.edges, m)

    @property
    def full(self) -> int:
        return (1 << len(self.cells)) - 1

    def mask(self, names) -> int:
        out = 0
        for c in names:
            if c not in self.index:
                raise ValueError(f"unknown cell {c!r}")
            out |= 1 << self.index[c]
        return out

    def names(self, mask: int) -> list[str]:
        return [c for i, c in enumerate(self.cells) if mask >> i & 1]

    def graph_vertices(self) -> list[int]:
        return [i for i, v in enumerate(self.is_vertex) if v]

    def vertex_adjacency(self) -> dict:
        adj = {v: [] for v in self.graph_vertices()}
        for s, (a, b) in self.ends.items():
            adj[a].append(b)
            adj[b].append(a)
        return adj


def _bits(idx) -> int:
    out = 0
    for i in idx:
        out |= 1 << i
    return out


def _iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def is_open(K: CellComplex, O) -> bool:
    """Every vertex of O has its whole star of segments in O."""
    mask = O if isinstance(O, int) else K.mask(O)
    for v in _iter_bits(mask & K.vertex_mask):
        if K.star_mask[v] & ~mask:
            return False
    return True


def boundary(K: CellComplex, O) -> int:
    """Vertices incident to a segment of O but not in O."""
    mask = O if isinstance(O, int) else K.mask(O)
    out = 0
    for s in _iter_bits(mask & ~K.vertex_mask):
        out |= K.end_mask[s]
    return out & ~mask


def open_star(K: CellComplex, vertices) -> int:
    out = 0
    for v in vertices:
        out |= 1 << v | K.star_mask[v]
    return out


@dataclass
class CellCover:
    complex: CellComplex
    members: list  # bitmasks
    labels: list | None = None

    def __post_init__(self):
        self.members = [int(m) for m in self.members]
        if self.labels is None:
            self.labels = [f"A{i + 1}" for i in range(len(self.members))]
        for lab, m in zip(self.labels, self.members):
            if not is_open(self.complex, m):
                raise ValueError(f"member {lab} is not open")
        union = 0
        for m in self.members:
            union |= m
        if union != self.complex.full:
            missing = self.complex.names(self.complex.full & ~union)
            raise ValueError(f"not a cover; uncovered cells {missing[:5]}")

    @classmethod
    def from_names(cls, K: CellComplex, named: dict) -> "CellCover":
        return cls(K, [K.mask(v) for v in named.values()], list(named))

    def __len__(self) -> int:
        return len(self.members)

    @property
    def L_A(self) -> int:
        return sum(bin(boundary(self.complex, m)).count("1") for m in self.members)

    def boundary_union(self) -> int:
        out = 0
        for m in self.members:
            out |= boundary(self.complex, m)
        return out

    def named(self) -> dict:
        return {lab: self.complex.names(m) for lab, m in zip(self.labels, self.members)}

    def sub(self, idx) -> "CellCover":
        idx = list(idx)
        return CellCover(self.complex, [self.members[i] for i in idx], [self.labels[i] for i in idx])


def _dedupe(cover: CellCover) -> list[int]:
    seen, keep = set(), []
    for i, m in enumerate(cover.members):
        if m not in seen:
            seen.add(m)
            keep.append(i)
    return keep


def irreducible_subcover(cover: CellCover) -> CellCover:
    """Drop duplicates, then members whose cells are covered by the rest, in index order."""
    keep = _dedupe(cover)
    full = cover.complex.full
    i = 0
    while i < len(keep):
        rest = 0
        for j in keep:
            if j != keep[i]:
                rest |= cover.members[j]
        if rest == full and len(keep) > 1:
            keep.pop(i)
        else:
            i += 1
    return cover.sub(keep)


def is_irreducible(cover: CellCover) -> bool:
    full = cover.complex.full
    for i in range(len(cover)):
        rest = 0
        for j, m in enumerate(cover.members):
            if j != i:
                rest |= m
        if rest == full:
            return False
    return True


def _maximal(masks: list[int]) -> list[int]:
    """Indices of members not contained in another (first copy kept among equals)."""
    keep = []
    for i, a in enumerate(masks):
        dominated = False
        for j, b in enumerate(masks):
            if i != j and a & b == a and (a != b or j < i):
                dominated = True
                break
        if not dominated:
            keep.append(i)
    return keep


def min_cover_indices(masks: list[int], universe: int) -> list[int]:
    """Exact minimum set cover by branch and bound; indices refer to ``masks``.

    Dominated sets are dropped first (a dominating set can always replace them).
    Branching picks the uncovered element with the fewest candidate sets and
    tries those sets in index order, so the answer is deterministic.
    """
    cand = _maximal(masks)
    covering = {}
    for e in _iter_bits(universe):
        covering[e] = [i for i in cand if masks[i] >> e & 1]
        if not covering[e]:
            raise ValueError("sets do not cover the universe")
    biggest = max(bin(masks[i]).count("1") for i in cand)
    best: list = [None]

    def lower(uncovered: int) -> int:
        return -(-bin(uncovered).count("1") // biggest)

    def rec(uncovered: int, chosen: list):
        if not uncovered:
            if best[0] is None or len(chosen) < len(best[0]):
                best[0] = list(chosen)
            return
        if best[0] is not None and len(chosen) + lower(uncovered) >= len(best[0]):
            return
        e = min(_iter_bits(uncovered), key=lambda x: (len(covering[x]), x))
        for i in covering[e]:
            chosen.append(i)
            rec(uncovered & ~masks[i], chosen)
            chosen.pop()

    # a greedy cover gives the first upper bound
    unc, greedy = universe, []
    while unc:
        i = max(cand, key=lambda k: (bin(masks[k] & unc).count("1"), -k))
        greedy.append(i)
        unc &= ~masks[i]
    best[0] = greedy
    rec(universe, [])
    return sorted(best[0])


def minimum_subcover(cover: CellCover) -> CellCover:
    return cover.sub(min_cover_indices(cover.members, cover.complex.full))


def brute_force_min_cover(masks: list[int], universe: int) -> int:
    """Oracle: smallest k such that some k-subset covers (all subsets, small inputs)."""
    for k in range(1, len(masks) + 1):
        for combo in itertools.combinations(masks, k):
            u = 0
            for m in combo:
                u |= m
            if u & universe == universe:
                return k
    raise ValueError("sets do not cover the universe")


def lemma1_check(cover: CellCover) -> Report:
    """|cover| <= |union of member boundaries| for an irreducible cover with >= 2 members."""
    if len(cover) < 2:
        raise ValueError("needs at least two members")
    if not is_irreducible(cover):
        raise ValueError("cover has a proper subcover")
    P = cover.boundary_union()
    nP = bin(P).count("1")
    rep = Report(command="lemma1")
    rep.add(
        "members_at_most_boundary_points",
        len(cover) <= nP,
        witness=None if len(cover) <= nP else {"members": len(cover), "boundary": cover.complex.names(P)},
        detail={"members": len(cover), "boundary_points": nP},
    )
    return rep


# ---------------------------------------------------------------- automorphisms


@dataclass
class Automorphism:
    complex: CellComplex
    vertex_map: dict  # tree point -> tree point
    cell_perm: np.ndarray = field(init=False)

    def __post_init__(self):
        K = self.complex
        g = {str(k): str(v) for k, v in self.vertex_map.items()}
        for p in K.tree_points:
            g.setdefault(p, p)
        if sorted(g.values()) != sorted(K.tree_points) or set(g) != set(K.tree_points):
            raise ValueError("vertex map is not a bijection of the tree points")
        edges = {frozenset(e): e for e in K.tree_edges}
        perm = {}
        for p in K.tree_points:
            perm[K.index[p]] = K.index[g[p]]
        for p, q in K.tree_edges:
            img = edges.get(frozenset((g[p], g[q])))
            if img is None:
                raise ValueError(f"edge {p}|{q} is not mapped to an edge")
            flip = img != (g[p], g[q])
            a, b = img
            for k in range(1, K.m):
                kk = K.m - k if flip else k
                perm[K.index[f"{p}|{q}@{k}"]] = K.index[f"{a}|{b}@{kk}"]
            for k in range(1, K.m + 1):
                kk = K.m + 1 - k if flip else k
                src = f"{p}|{q}" if K.m == 1 else f"{p}|{q}/{k}"
                dst = f"{a}|{b}" if K.m == 1 else f"{a}|{b}/{kk}"
                perm[K.index[src]] = K.index[dst]
        self.vertex_map = g
        self.cell_perm = np.array([perm[i] for i in range(len(K.cells))], dtype=np.int64)

    def apply(self, mask: int) -> int:
        out = 0
        for i in _iter_bits(mask):
            out |= 1 << int(self.cell_perm[i])
        return out

    def compose(self, other: "Automorphism") -> "Automorphism":
        """self after other."""
        return Automorphism(self.complex, {p: self.vertex_map[other.vertex_map[p]] for p in self.complex.tree_points})

    def power(self, k: int) -> "Automorphism":
        out = identity_automorphism(self.complex)
        for _ in range(k):
            out = self.compose(out)
        return out


def identity_automorphism(K: CellComplex) -> Automorphism:
    return Automorphism(K, {p: p for p in K.tree_points})


def path_order(K: CellComplex) -> list[str]:
    adj = {p: [] for p in K.tree_points}
    for p, q in K.tree_edges:
        adj[p].append(q)
        adj[q].append(p)
    if any(len(v) > 2 for v in adj.values()):
        raise ValueError("reflection needs a path")
    start = next((p for p, v in adj.items() if len(v) <= 1))
    order, prev = [start], None
    while len(order) < len(adj):
        nxt = [q for q in adj[order[-1]] if q != prev]
        prev = order[-1]
        order.append(nxt[0])
    return order


def reflection(K: CellComplex) -> Automorphism:
    order = path_order(K)
    return Automorphism(K, dict(zip(order, reversed(order))))


def _rooted_children(adj, root, parent):
    return [c for c in adj[root] if c != parent]


def _canon(adj, root, parent) -> str:
    return "(" + "".join(sorted(_canon(adj, c, root) for c in _rooted_children(adj, root, parent))) + ")"


def _iso(adj, r1, p1, r2, p2, out):
    out[r1] = r2
    k1 = sorted(_rooted_children(adj, r1, p1), key=lambda c: _canon(adj, c, r1))
    k2 = sorted(_rooted_children(adj, r2, p2), key=lambda c: _canon(adj, c, r2))
    for a, b in zip(k1, k2):
        _iso(adj, a, r1, b, r2, out)


def subtree_swap(K: CellComplex, r1: str, r2: str) -> Automorphism:
    """Exchange the branches hanging at r1 and r2 from a common neighbour."""
    adj = {p: [] for p in K.tree_points}
    for p, q in K.tree_edges:
        adj[p].append(q)
        adj[q].append(p)
    common = set(adj[r1]) & set(adj[r2])
    if not common:
        raise ValueError("swap needs two vertices with a common neighbour")
    parent = sorted(common)[0]
    if _canon(adj, r1, parent) != _canon(adj, r2, parent):
        raise ValueError("branches are not isomorphic")
    g = {}
    _iso(adj, r1, parent, r2, parent, g)
    back = {}
    _iso(adj, r2, parent, r1, parent, back)
    g.update(back)
    return Automorphism(K, g)


def pull_back(s: Automorphism, A: int) -> int:
    """Image of the cell set A under s."""
    return s.apply(A)


def join_refinement(A: list[int], B: list[int]) -> list[int]:
    seen, out = set(), []
    for a in A:
        for b in B:
            c = a & b
            if c and c not in seen:
                seen.add(c)
                out.append(c)
    return out


def cover_image(s: Automorphism, cover: CellCover) -> CellCover:
    return CellCover(cover.complex, [s.apply(m) for m in cover.members], list(cover.labels))


def join_members(cover: CellCover, seq: list[Automorphism]) -> list[int]:
    """Members of s_1(A) v ... v s_n(A), keeping only maximal ones.

    Removing a member contained in another member never changes the minimum
    subcover size of the final join, so it is done after every step.
    """
    acc = None
    for s in seq:
        img = [s.apply(m) for m in cover.members]
        acc = img if acc is None else join_refinement(acc, img)
        acc = [acc[i] for i in _maximal(acc)]
    return acc


def sequence_entropy(cover: CellCover, seq, n_max: int = 12) -> dict:
    """Rows (n, N_n, bound n L_A, flags, log N_n / n) for n = 1..n_max.

    ``seq`` is a list of automorphisms s_1, s_2, ... (at least n_max long) or a
    single automorphism g, read as s_i = g^i.  The bound is only promised for
    an irreducible cover with at least two members; ``hypotheses`` records
    whether the input is one.  Each row also checks that the boundary of every
    member of the minimum subcover lies among the boundary points of the
    translated covers.
    """
    if n_max > 12:
        raise ValueError("n_max is limited to 12")
    if isinstance(seq, Automorphism):
        g = seq
        seq = []
        cur = g
        for _ in range(n_max):
            seq.append(cur)
            cur = g.compose(cur)
    if len(seq) < n_max:
        raise ValueError("automorphism sequence shorter than n_max")
    K = cover.complex
    LA = cover.L_A
    rows = []
    acc = None
    P = 0
    for n in range(1, n_max + 1):
        img = [seq[n - 1].apply(m) for m in cover.members]
        for m in img:
            P |= boundary(K, m)
        acc = img if acc is None else join_refinement(acc, img)
        acc = [acc[i] for i in _maximal(acc)]
        chosen = min_cover_indices(acc, K.full)
        N = len(chosen)
        inside = all(boundary(K, acc[i]) & ~P == 0 for i in chosen)
        rows.append({
            "n": n, "N": N, "bound": n * LA, "violation": N > n * LA,
            "boundary_in_P": inside, "P": bin(P).count("1"), "h": math.log(N) / n,
        })
    return {"L_A": LA, "hypotheses": len(cover) >= 2 and is_irreducible(cover), "rows": rows}


def entropy_report(cover: CellCover, seq, n_max: int = 12, name: str = "") -> Report:
    res = sequence_entropy(cover, seq, n_max)
    rep = Report(command=f"entropy {name}".strip())
    rows = res["rows"]
    rep.add("hypotheses", res["hypotheses"], witness=None if res["hypotheses"] else "cover reducible or single member")
    bad = [r["n"] for r in rows if r["violation"]]
    rep.add("N_n_at_most_n_L_A", not bad, witness=bad or None, detail={"L_A": res["L_A"], "N": [r["N"] for r in rows]})
    bad = [r["n"] for r in rows if not r["boundary_in_P"]]
    rep.add("boundaries_in_P", not bad, witness=bad or None)
    last = rows[-1]
    cap = math.log(last["n"] * res["L_A"]) / last["n"] if res["L_A"] else -math.inf
    ok = last["h"] <= cap
    rep.add("entropy_trend", ok, witness=None if ok else {"h": last["h"], "cap": cap},
            detail={"h": [round(r["h"], 6) for r in rows]})
    return rep


# ---------------------------------------------------------------- fixture builders


def path_complex(k: int, m: int = 1) -> CellComplex:
    pts = [str(i) for i in range(k + 1)]
    return CellComplex(tuple(pts), tuple(zip(pts, pts[1:])), m)


def b_cover(K: CellComplex) -> CellCover:
    """On the two-edge path: B1 = {0, 0|1}, B2 = {0|1, 1, 1|2}, B3 = {1|2, 2}."""
    return CellCover.from_names(K, {"B1": ["0", "0|1"], "B2": ["0|1", "1", "1|2"], "B3": ["1|2", "2"]})


def window_cover(K: CellComplex) -> CellCover:
    """Open stars of every graph vertex (a vertex with its incident segments)."""
    vs = K.graph_vertices()
    return CellCover(K, [open_star(K, [v]) for v in vs], [f"W{K.cells[v]}" for v in vs])


def ball_cover(K: CellComplex, radius: int, rng: np.random.Generator) -> CellCover:
    """Open stars of graph balls around random centres until everything is covered,
    reduced to an irreducible subcover."""
    adj = K.vertex_adjacency()
    vs = K.graph_vertices()
    members, labels, union = [], [], 0
    order = list(rng.permutation(len(vs)))
    for i in order:
        c = vs[int(i)]
        dist = {c: 0}
        frontier = [c]
        for d in range(radius):
            nxt = []
            for x in frontier:
                for y in adj[x]:
                    if y not in dist:
                        dist[y] = d + 1
                        nxt.append(y)
            frontier = nxt
        m = open_star(K, dist)
        # a ball that is everything would make the cover trivial
        if m & ~union and m != K.full:
            members.append(m)
            labels.append(f"ball{K.cells[c]}")
            union |= m
        if union == K.full:
            break
    return irreducible_subcover(CellCover(K, members, labels))


def binary_tree_complex(depth: int, m: int = 1) -> CellComplex:
    pts = ["r"]
    edges = []
    frontier = ["r"]
    for _ in range(depth):
        nxt = []
        for p in frontier:
            for c in "LR":
                q = p + c
                pts.append(q)
                edges.append((p, q))
                nxt.append(q)
        frontier = nxt
    return CellComplex(tuple(pts), tuple(edges), m)


def star_complex(leaves: int, m: int = 1) -> CellComplex:
    pts = ["c"] + [f"l{i}" for i in range(leaves)]
    return CellComplex(tuple(pts), tuple(("c", p) for p in pts[1:]), m)


def rotation(K: CellComplex) -> Automorphism:
    """Cyclic shift of the leaves of a star complex."""
    leaves = [p for p in K.tree_points if p != "c"]
    return Automorphism(K, dict(zip(leaves, leaves[1:] + leaves[:1])))


@dataclass
class EntropyFixture:
    name: str
    cover: CellCover
    seq: object  # Automorphism (powers) or list of automorphisms


def standard_fixtures(seed: int = 0) -> list[EntropyFixture]:
    """Twenty-odd (complex, cover, sequence) triples on paths, stars and binary trees."""
    rng = np.random.default_rng(seed)
    fx = []
    K = path_complex(2)
    fx.append(EntropyFixture("path2-B-identity", b_cover(K), identity_automorphism(K)))
    fx.append(EntropyFixture("path2-B-reflect", b_cover(K), reflection(K)))
    for k, m in [(3, 1), (4, 2), (6, 1), (5, 3)]:
        K = path_complex(k, m)
        fx.append(EntropyFixture(f"path{k}x{m}-windows-reflect", window_cover(K), reflection(K)))
        fx.append(EntropyFixture(f"path{k}x{m}-balls-reflect", ball_cover(K, 1 if k * m <= 3 else 2, rng), reflection(K)))
    for leaves, m in [(3, 2), (4, 2), (5, 1)]:
        K = star_complex(leaves, m)
        fx.append(EntropyFixture(f"star{leaves}x{m}-windows-rotate", window_cover(K), rotation(K)))
        fx.append(EntropyFixture(f"star{leaves}x{m}-balls-rotate", ball_cover(K, 1, rng), rotation(K)))
    for depth, m in [(2, 1), (2, 2), (3, 1)]:
        K = binary_tree_complex(depth, m)
        swap = subtree_swap(K, "rL", "rR")
        inner = subtree_swap(K, "rLL", "rLR")
        fx.append(EntropyFixture(f"bintree{depth}x{m}-windows-swap", window_cover(K), swap))
        mixed = [swap if i % 3 == 0 else inner.compose(swap) if i % 3 == 1 else inner for i in range(12)]
        fx.append(EntropyFixture(f"bintree{depth}x{m}-balls-mixed", ball_cover(K, 2, rng), mixed))
    K = path_complex(8, 1)
    fx.append(EntropyFixture("path8-balls1-reflect", ball_cover(K, 1, rng), reflection(K)))
    return fx
