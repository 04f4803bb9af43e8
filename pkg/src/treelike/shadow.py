"""Shadow sets, the finite shadow topology, median retractions and shadow separation.

Subsets of a structure's points are handled as integer bitmasks (bit i is
point ``T.points[i]``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .pretree import BetweennessStructure, StructuralInconsistency
from .report import Report

MAX_TOPOLOGY_POINTS = 20


def to_mask(bools) -> int:
    m = 0
    for i in np.flatnonzero(bools):
        m |= 1 << int(i)
    return m


def masks_last_axis(arr: np.ndarray) -> np.ndarray:
    """Bitmask of every row along the last axis (object ints, so any width works)."""
    n = arr.shape[-1]
    if n <= 62:
        return arr.astype(np.int64) @ (np.int64(1) << np.arange(n, dtype=np.int64))
    w = np.array([1 << i for i in range(n)], dtype=object)
    return arr.astype(object) @ w


def mask_members(T: BetweennessStructure, mask: int) -> frozenset[str]:
    return frozenset(p for i, p in enumerate(T.points) if mask >> i & 1)


def members_mask(T: BetweennessStructure, members) -> int:
    m = 0
    for p in members:
        m |= 1 << T.idx(p)
    return m


@dataclass(frozen=True)
class ShadowSet:
    base: str
    light: str
    members: frozenset


def shadow(T: BetweennessStructure, u, v) -> ShadowSet:
    """S^v_u: the points x with u on [x, v] (the shadow of u lit from v)."""
    iu, iv = T.idx(u), T.idx(v)
    if iu == iv:
        raise ValueError("shadow needs u != v")
    return ShadowSet(str(u), str(v), mask_members(T, to_mask(T.table[:, iu, iv])))


def shadow_masks(T: BetweennessStructure) -> np.ndarray:
    """``out[u, v, x]`` true iff x is in S^v_u."""
    # x in S^v_u  <=>  <x, u, v>
    return T.table.transpose(1, 2, 0)


@dataclass
class FiniteTopology:
    n: int
    closed_sets: frozenset[int]
    subbase: frozenset[int] = field(default_factory=frozenset)

    @property
    def carrier(self) -> int:
        return (1 << self.n) - 1

    @property
    def is_discrete(self) -> bool:
        return len(self.closed_sets) == 1 << self.n

    def is_closed(self, mask: int) -> bool:
        return mask in self.closed_sets

    def is_open(self, mask: int) -> bool:
        return (self.carrier & ~mask) in self.closed_sets

    @property
    def open_sets(self) -> frozenset[int]:
        return frozenset(self.carrier & ~c for c in self.closed_sets)

    def closure(self, mask: int) -> int:
        return reduce(lambda a, b: a & b, (c for c in self.closed_sets if c & mask == mask), self.carrier)

    def interior(self, mask: int) -> int:
        return self.carrier & ~self.closure(self.carrier & ~mask)

    def boundary(self, mask: int) -> int:
        return self.closure(mask) & ~self.interior(mask)

    def minimal_neighborhood(self, i: int) -> int:
        """Smallest open set containing point i."""
        out = self.carrier
        for c in self.closed_sets:
            if not c >> i & 1:
                out &= ~c
        return out

    def check_lattice(self) -> bool:
        fam = self.closed_sets
        if 0 not in fam or self.carrier not in fam:
            return False
        return all((a | b) in fam and (a & b) in fam for a in fam for b in fam)


def _close_intersections(sets: set[int], full: int) -> set[int]:
    fam = set(sets) | {full}
    frontier = set(fam)
    base = list(sets)
    while frontier:
        new = {a & s for a in frontier for s in base} - fam
        fam |= new
        frontier = new
    return fam


def topology_from_subbase(n: int, subbase) -> FiniteTopology:
    if n > MAX_TOPOLOGY_POINTS:
        raise ValueError(f"topology generation is limited to {MAX_TOPOLOGY_POINTS} points")
    full = (1 << n) - 1
    sub = frozenset(int(s) for s in subbase)
    inter = _close_intersections(set(sub), full)
    inter.add(0)
    if all(1 << i in inter for i in range(n)):
        # every singleton is closed, so unions give every subset
        return FiniteTopology(n, frozenset(range(full + 1)), sub)
    closed = {0}
    for b in sorted(inter):
        closed |= {c | b for c in closed}
    return FiniteTopology(n, frozenset(closed), sub)


def generate_topology(T: BetweennessStructure) -> FiniteTopology:
    """Closed sets generated by all shadows S^v_u, u != v."""
    memo = T._memo.get("topology")
    if memo is not None:
        return memo
    n = len(T)
    S = shadow_masks(T)
    m = masks_last_axis(S)
    off = ~np.eye(n, dtype=bool)
    top = topology_from_subbase(n, set(m[off].tolist()))
    T._memo["topology"] = top
    return top


def is_hausdorff(T: BetweennessStructure) -> bool:
    # a finite Hausdorff space is discrete
    return generate_topology(T).is_discrete


def retraction(T: BetweennessStructure, u, v, x) -> str:
    """phi_{u,v}(x) = m(u, x, v)."""
    i = T.median_table[T.idx(u), T.idx(x), T.idx(v)] if _median_ok(T) else _single_median(T, u, x, v)
    if i < 0:
        raise StructuralInconsistency(f"median of ({u}, {x}, {v}) is empty")
    return T.points[i]


def _median_ok(T) -> bool:
    try:
        T.median_table
        return True
    except StructuralInconsistency:
        return False


def _single_median(T, a, b, c) -> int:
    from .pretree import median

    m = median(T, a, b, c)
    return -1 if m is None else T.idx(m)


def retraction_map(T: BetweennessStructure, u: int, v: int) -> np.ndarray:
    phi = T.median_table[u, :, v]
    if (phi < 0).any():
        x = int(np.flatnonzero(phi < 0)[0])
        raise StructuralInconsistency(f"median of ({T.points[u]}, {T.points[x]}, {T.points[v]}) is empty")
    return phi


def chain_order(T: BetweennessStructure, u: int, v: int) -> list[int]:
    """Points of [u, v] listed from u to v (x <= y iff <x, y, v>)."""
    t = T.table
    members = np.flatnonzero(t[u, :, v])
    # the number of members y with <y, x, v> counts x's predecessors plus x itself
    below = {int(x): int(t[members, x, v].sum()) for x in members}
    return sorted(below, key=lambda x: below[x])


def _interval_topology(T: BetweennessStructure, chain: list[int]) -> frozenset[int]:
    """Shadow topology of the induced structure on a chain, in chain-position bits."""
    k = len(chain)
    sub = T.table[np.ix_(chain, chain, chain)]
    key = (k, sub.tobytes())
    cache = _INTERVAL_CACHE
    if key not in cache:
        S = sub.transpose(1, 2, 0)
        subbase = set(masks_last_axis(S)[~np.eye(k, dtype=bool)].tolist())
        if k == 1:
            cache[key] = frozenset({0, 1})
        else:
            cache[key] = topology_from_subbase(k, subbase).closed_sets
    return cache[key]


_INTERVAL_CACHE: dict = {}


def retraction_report(T: BetweennessStructure, u, v) -> Report:
    """Retraction, median preservation, shadow continuity and the exact preimage identities for phi_{u,v}."""
    iu, iv = T.idx(u), T.idx(v)
    if iu == iv:
        raise ValueError("retraction_report needs u != v")
    n = len(T)
    t = T.table
    M = T.median_table
    phi = retraction_map(T, iu, iv)
    seg = t[iu, :, iv]
    rep = Report(command=f"retract {u} {v}")
    pts = T.points

    # (i) lands in [u, v] and fixes it pointwise
    r = np.arange(n)
    bad = np.flatnonzero(~seg[phi] | (seg & (phi != r)))
    rep.add("retraction", not len(bad), witness=pts[bad[0]] if len(bad) else None)

    # (ii) m(phi x1, phi x2, phi x3) == phi(m(x1, x2, x3))
    lhs = M[np.ix_(phi, phi, phi)]
    rhs = phi[M]
    bad3 = np.argwhere(lhs != rhs)
    rep.add("median_preserving", not len(bad3), witness=tuple(pts[i] for i in bad3[0]) if len(bad3) else None)

    # (iii) continuity: preimages of the subspace closed subbase {S & [u,v]} are closed.
    # Preimage commutes with unions and intersections, so the subbase suffices.
    top = generate_topology(T)
    S = shadow_masks(T)
    off = ~np.eye(n, dtype=bool)
    pre = masks_last_axis((S & seg)[:, :, phi])
    cont_bad = None
    for a, b in np.argwhere(off):
        if not top.is_closed(int(pre[a, b])):
            cont_bad = (pts[a], pts[b])
            break
    rep.add("continuous", cont_bad is None, witness=cont_bad)

    # interval topology of [u, v] against the subspace topology
    chain = chain_order(T, iu, iv)
    # the trace of a generated topology is generated by the trace of its subbase
    traced = set(masks_last_axis(S[:, :, chain])[off].tolist())
    subspace = topology_from_subbase(len(chain), traced).closed_sets
    interval_top = _interval_topology(T, chain)
    rep.add(
        "subspace_matches_interval_topology",
        subspace == interval_top,
        witness=None if subspace == interval_top else sorted(subspace ^ interval_top)[:3],
    )

    # (iv) phi^{-1}[u, w] = S^v_w for w in [u, v), phi^{-1}[w, v] = S^u_w for w in (u, v]
    id_bad = None
    for w in chain:
        if w != iv:
            pre = seg_in(t[iu, :, w], phi)
            if not np.array_equal(pre, S[w, iv]):
                id_bad = ("lower", pts[w])
                break
        if w != iu:
            pre = seg_in(t[w, :, iv], phi)
            if not np.array_equal(pre, S[w, iu]):
                id_bad = ("upper", pts[w])
                break
    rep.add("preimage_identities", id_bad is None, witness=id_bad)
    return rep


def seg_in(members: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Preimage under phi of a set given as a boolean mask."""
    return members[phi]


def shadow_separation(T: BetweennessStructure) -> Report:
    """For every strict <u, w, v>: U = X - S^u_w and V = X - S^v_w are neighbourhoods
    of u and v with w in [x, y] for all x in U, y in V."""
    t = T.table
    n = len(T)
    rep = Report(command="shadow-separation")
    checked = 0
    bad = None
    for w in range(n):
        strict = t[:, w, :].copy()
        strict[w, :] = False
        strict[:, w] = False
        if not strict.any():
            continue
        A = (~t[:, w, :]).T  # A[u, x] = x not in S^u_w
        B = (~t[:, w, :]).astype(np.int64)  # B[x, y] = w not in [x, y]
        Ai = A.astype(np.int64)
        cnt = Ai @ B @ Ai.T  # cnt[u, v] = #{(x, y) in U x V with w not in [x, y]}
        member = np.diag(A)  # u in U
        viol = strict & ((cnt > 0) | ~member[:, None] | ~member[None, :])
        checked += int(strict.sum())
        if viol.any() and bad is None:
            u, v = np.argwhere(viol)[0]
            bad = (T.points[u], T.points[w], T.points[v])
    rep.add("shadow_separation", bad is None, witness=bad, detail={"strict_triples": checked})
    return rep


@dataclass
class StabilityResult:
    stable: bool
    witness: tuple | None
    pair_witness: dict
    weak_note: str = "weak stability quantifies over infinite subsets; vacuously true on a finite carrier"

    def __bool__(self) -> bool:
        return self.stable


def stability_check(T: BetweennessStructure, topology: FiniteTopology | None = None) -> StabilityResult:
    """Decide stability exactly: for each pair u != v, look for w strictly inside [u, v]
    separating every point of the smallest open neighbourhood of u from that of v."""
    top = topology or generate_topology(T)
    t = T.table
    n = len(T)
    nbhd = [top.minimal_neighborhood(i) for i in range(n)]
    nb = [np.array([m >> j & 1 for j in range(n)], dtype=bool) for m in nbhd]
    pairs = {}
    first_bad = None
    for u in range(n):
        for v in range(u + 1, n):
            found = None
            for w in np.flatnonzero(t[u, :, v]):
                if w in (u, v):
                    continue
                if t[np.ix_(nb[u], [w], nb[v])].all():
                    found = T.points[w]
                    break
            pairs[(T.points[u], T.points[v])] = found
            if found is None and first_bad is None:
                first_bad = (T.points[u], T.points[v])
    return StabilityResult(first_bad is None, first_bad, pairs)
