"""Z-trees of words with eventually periodic ends, group actions on them and dynamical checks.

Two rule trees are supported.  The rooted k-ary tree has the words over the
digits ``0..k-1`` as vertices, the empty word as root, and ``w`` adjacent to
``w + d``.  The free-group tree has reduced words over generator letters
(lowercase) and their inverses (uppercase) as vertices.  In both cases a vertex
word doubles as its own prefix expansion, and an end is an infinite word
``pre + per + per + ...``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .report import Report

FREE = "free-group"
KARY = "rooted-k-ary"
EQUAL = math.inf


@dataclass(frozen=True)
class RuleTree:
    kind: str
    letters: str

    @classmethod
    def free_group(cls, generators: str = "ab") -> "RuleTree":
        if not generators.isalpha() or not generators.islower() or len(set(generators)) != len(generators):
            raise ValueError("free-group generators are distinct lowercase letters")
        return cls(FREE, generators)

    @classmethod
    def kary(cls, k: int = 2) -> "RuleTree":
        if not 1 <= k <= 10:
            raise ValueError("arity must be between 1 and 10")
        return cls(KARY, "".join(str(d) for d in range(k)))

    @property
    def alphabet(self) -> str:
        if self.kind == FREE:
            return self.letters + self.letters.upper()
        return self.letters

    def inverse_letter(self, c: str) -> str:
        return c.swapcase()

    def is_word(self, w: str) -> bool:
        if any(c not in self.alphabet for c in w):
            return False
        if self.kind == FREE:
            return all(w[i] != w[i + 1].swapcase() for i in range(len(w) - 1))
        return True

    def check_word(self, w: str) -> str:
        if not self.is_word(w):
            raise ValueError(f"{w!r} is not a {'reduced ' if self.kind == FREE else ''}word of {self}")
        return w

    def successors(self, w: str) -> list[str]:
        """Letters that may follow w (children of vertex w)."""
        if self.kind == FREE and w:
            bad = w[-1].swapcase()
            return [c for c in self.alphabet if c != bad]
        return list(self.alphabet)

    def vertex(self, word: str = "") -> "Vertex":
        return Vertex(self, self.check_word(word))

    def end(self, pre: str, per: str) -> "End":
        return canonicalize_end(self, pre, per)

    def words(self, length: int, prefix: str = ""):
        """All words of the given length extending ``prefix``."""
        if len(prefix) >= length:
            if len(prefix) == length:
                yield prefix
            return
        for c in self.successors(prefix):
            yield from self.words(length, prefix + c)

    def random_word(self, rng: np.random.Generator, length: int, prefix: str = "") -> str:
        w = prefix
        while len(w) < length:
            s = self.successors(w)
            w += s[int(rng.integers(len(s)))]
        return w

    def random_end(self, rng: np.random.Generator, max_pre: int = 4, max_per: int = 3) -> "End":
        while True:
            pre = self.random_word(rng, int(rng.integers(0, max_pre + 1)))
            per = self.random_word(rng, int(rng.integers(1, max_per + 1)), pre)[len(pre):]
            try:
                return canonicalize_end(self, pre, per)
            except ValueError:
                continue

    def random_point(self, rng: np.random.Generator, max_depth: int = 5, p_end: float = 0.5):
        if rng.random() < p_end:
            return self.random_end(rng)
        return Vertex(self, self.random_word(rng, int(rng.integers(0, max_depth + 1))))

    def __str__(self) -> str:
        return f"{self.kind}({self.letters})"


@dataclass(frozen=True)
class Vertex:
    tree: RuleTree = field(repr=False)
    word: str

    def prefix(self, n: int) -> str:
        return self.word[:n]

    def __str__(self) -> str:
        return f"v:{self.word}"


@dataclass(frozen=True)
class End:
    tree: RuleTree = field(repr=False)
    pre: str
    per: str

    def prefix(self, n: int) -> str:
        if n <= len(self.pre):
            return self.pre[:n]
        k = n - len(self.pre)
        reps = -(-k // len(self.per))
        return self.pre + (self.per * reps)[:k]

    def __str__(self) -> str:
        return f"e:{self.pre}:{self.per}"


def _primitive_root(per: str) -> str:
    n = len(per)
    for d in range(1, n + 1):
        if n % d == 0 and per[:d] * (n // d) == per:
            return per[:d]
    return per


def canonicalize_end(tree: RuleTree, pre: str, per: str) -> End:
    """Shortest preperiod and primitive period describing the same infinite word."""
    if not per:
        raise ValueError("period must be nonempty")
    tree.check_word(pre)
    if any(c not in tree.alphabet for c in per):
        raise ValueError(f"{per!r} is not a word of {tree}")
    if tree.kind == FREE and not tree.is_word(pre + per + per):
        raise ValueError(f"end ({pre!r}, {per!r}) is not reduced")
    per = _primitive_root(per)
    while pre and pre[-1] == per[-1]:
        pre = pre[:-1]
        per = per[-1] + per[:-1]
    return End(tree, pre, per)


def parse_point(tree: RuleTree, text: str):
    """``v:<word>`` or ``e:<pre>:<per>``."""
    parts = text.strip().split(":")
    if parts[0] == "v" and len(parts) == 2:
        return tree.vertex(parts[1])
    if parts[0] == "e" and len(parts) == 3:
        return tree.end(parts[1], parts[2])
    raise ValueError(f"cannot parse point {text!r}")


def _same_tree(*pts):
    t = pts[0].tree
    if any(p.tree != t for p in pts[1:]):
        raise ValueError("points come from different trees")
    return t


def _lcp(a: str, b: str) -> int:
    n = min(len(a), len(b))
    i = 0
    while i < n and a[i] == b[i]:
        i += 1
    return i


def confluence(x, y):
    """Length of the common prefix of the expansions; EQUAL when x = y."""
    _same_tree(x, y)
    if x == y:
        return EQUAL
    if isinstance(x, Vertex) or isinstance(y, Vertex):
        n = min(len(x.word) if isinstance(x, Vertex) else math.inf, len(y.word) if isinstance(y, Vertex) else math.inf)
        return _lcp(x.prefix(n), y.prefix(n))
    # two distinct eventually periodic words differ before this bound
    n = max(len(x.pre), len(y.pre)) + math.lcm(len(x.per), len(y.per))
    return _lcp(x.prefix(n), y.prefix(n))


def _is_prefix_of(w: str, p) -> bool:
    return p.prefix(len(w)) == w and (isinstance(p, End) or len(p.word) >= len(w))


def between_ext(u, w, v) -> bool:
    """<u, w, v> on X-hat: w on the geodesic joining u and v."""
    _same_tree(u, w, v)
    if w == u or w == v:
        return True
    if isinstance(w, End):
        return False
    c = confluence(u, v)
    return len(w.word) >= c and (_is_prefix_of(w.word, u) or _is_prefix_of(w.word, v))


def median_ext(a, b, c):
    tree = _same_tree(a, b, c)
    if a == b or a == c:
        return a
    if b == c:
        return b
    pairs = [(confluence(a, b), a), (confluence(a, c), a), (confluence(b, c), b)]
    d, p = max(pairs, key=lambda t: t[0])
    return Vertex(tree, p.prefix(d))


# ---------------------------------------------------------------- actions


def reduce_word(w: str) -> str:
    out: list[str] = []
    for c in w:
        if out and out[-1] == c.swapcase() and out[-1] != c:
            out.pop()
        else:
            out.append(c)
    return "".join(out)


def invert_word(w: str) -> str:
    return w[::-1].swapcase()


class Generator:
    name = "?"

    def on_vertex(self, tree: RuleTree, w: str, inverse: bool) -> str:
        raise NotImplementedError

    def on_end(self, tree: RuleTree, x: End, inverse: bool) -> End:
        raise NotImplementedError


@dataclass
class Translate(Generator):
    word: str

    def _w(self, inverse):
        return invert_word(self.word) if inverse else self.word

    def on_vertex(self, tree, w, inverse):
        return reduce_word(self._w(inverse) + w)

    def on_end(self, tree, x, inverse):
        g = self._w(inverse)
        m = -(-(len(g) + len(x.pre)) // len(x.per)) + 1
        s = x.pre + x.per * m
        r = reduce_word(g + s)
        # cancellation eats a suffix of g and a prefix of s of equal length
        c = (len(g) + len(s) - len(r)) // 2
        return canonicalize_end(tree, r[: len(r) - (len(s) - c)] + s[c:], x.per)


@dataclass
class Odometer(Generator):
    """Add one with carry on least-significant-bit-first binary words."""

    def _digits(self, inverse):
        # adding flips leading 1s to 0 then a 0 to 1; subtracting swaps the roles
        return ("0", "1") if inverse else ("1", "0")

    def on_vertex(self, tree, w, inverse):
        carry, stop = self._digits(inverse)
        i = w.find(stop)
        if i < 0:
            return stop * len(w)
        return stop * i + carry + w[i + 1:]

    def on_end(self, tree, x, inverse):
        carry, stop = self._digits(inverse)
        i = x.pre.find(stop)
        if i >= 0:
            return canonicalize_end(tree, stop * i + carry + x.pre[i + 1:], x.per)
        j = x.per.find(stop)
        if j < 0:
            return canonicalize_end(tree, "", stop)
        return canonicalize_end(tree, stop * (len(x.pre) + j) + carry + x.per[j + 1:], x.per)


@dataclass
class Relabel(Generator):
    """Apply a letter permutation to every letter (inverses follow their generator)."""

    perm: dict

    def _map(self, tree, inverse):
        p = {v: k for k, v in self.perm.items()} if inverse else dict(self.perm)
        if tree.kind == FREE:
            p.update({k.upper(): v.upper() for k, v in list(p.items())})
        return p

    def on_vertex(self, tree, w, inverse):
        p = self._map(tree, inverse)
        return "".join(p.get(c, c) for c in w)

    def on_end(self, tree, x, inverse):
        p = self._map(tree, inverse)
        return canonicalize_end(tree, "".join(p.get(c, c) for c in x.pre), "".join(p.get(c, c) for c in x.per))


@dataclass
class SwapVertices(Generator):
    """Exchange two vertices and fix everything else; not an automorphism in general."""

    u: str
    v: str

    def on_vertex(self, tree, w, inverse):
        return self.v if w == self.u else self.u if w == self.v else w

    def on_end(self, tree, x, inverse):
        return x


@dataclass
class TreeAction:
    tree: RuleTree
    generators: dict  # name (lowercase letter) -> Generator

    def __post_init__(self):
        for name in self.generators:
            if len(name) != 1 or not name.islower():
                raise ValueError("generator names are single lowercase letters")

    @property
    def alphabet(self) -> str:
        names = "".join(self.generators)
        return names + names.upper()

    def apply_letter(self, c: str, x):
        gen = self.generators.get(c.lower())
        if gen is None:
            raise ValueError(f"unknown generator {c!r}")
        inverse = c.isupper()
        if isinstance(x, Vertex):
            return Vertex(self.tree, gen.on_vertex(self.tree, x.word, inverse))
        return gen.on_end(self.tree, x, inverse)


def act(action: TreeAction, g: str, x):
    """Apply the word g to x, rightmost letter first."""
    for c in reversed(g):
        x = action.apply_letter(c, x)
    return x


def free_translations(generators: str = "ab") -> TreeAction:
    tree = RuleTree.free_group(generators)
    return TreeAction(tree, {c: Translate(c) for c in generators})


def odometer() -> TreeAction:
    return TreeAction(RuleTree.kary(2), {"t": Odometer()})


def check_action_monotone(action: TreeAction, sample_size: int = 1000, seed=0) -> Report:
    """Sampled median preservation g m(a,b,c) = m(ga,gb,gc) for every generator and inverse."""
    rng = np.random.default_rng(seed)
    rep = Report(command="action-monotone", seed=seed)
    tree = action.tree
    for c in action.alphabet:
        bad = None
        for _ in range(sample_size):
            a, b, d = (tree.random_point(rng, max_depth=3) for _ in range(3))
            lhs = act(action, c, median_ext(a, b, d))
            rhs = median_ext(act(action, c, a), act(action, c, b), act(action, c, d))
            if lhs != rhs:
                bad = (str(a), str(b), str(d))
                break
        rep.add(f"median_preserved[{c}]", bad is None, witness=bad, detail={"samples": sample_size})
    return rep


def check_action_property(action: TreeAction, sample_size: int = 200, seed=0, max_len: int = 4) -> Report:
    """act(g, act(h, x)) = act(gh, x) and act(g^-1, act(g, x)) = x on samples."""
    rng = np.random.default_rng(seed)
    rep = Report(command="action-property", seed=seed)
    letters = action.alphabet
    bad = None
    for _ in range(sample_size):
        g = "".join(letters[i] for i in rng.integers(len(letters), size=int(rng.integers(0, max_len + 1))))
        h = "".join(letters[i] for i in rng.integers(len(letters), size=int(rng.integers(0, max_len + 1))))
        x = action.tree.random_point(rng)
        if act(action, g, act(action, h, x)) != act(action, g + h, x) or act(action, invert_word(g), act(action, g, x)) != x:
            bad = (g, h, str(x))
            break
    rep.add("composition", bad is None, witness=bad)
    return rep


# ---------------------------------------------------------------- proximality


@dataclass
class ProximalityCertificate:
    words: list[str]
    depths: list

    def __bool__(self) -> bool:
        return True


@dataclass
class NotFound:
    bound: dict

    def __bool__(self) -> bool:
        return False


def detect_proximal(action: TreeAction, x, y, target_depth: int = 8, search_len: int = 8, beam: int = 2000):
    """Search group words for images of (x, y) whose confluence keeps growing.

    Words are built by left multiplication, level by level.  Levels wider than
    ``beam`` keep only the words with the deepest confluence (stable order), so
    a NotFound verdict only covers the words actually visited.
    """
    if x == y:
        return ProximalityCertificate([""], [EQUAL])
    alphabet = action.alphabet
    level = [("", x, y, confluence(x, y))]
    words, depths = [], []
    best = -1
    visited = 1
    for d in level:
        if d[3] > best:
            best = d[3]
    if best >= target_depth:
        return ProximalityCertificate([""], [best])
    best = -1
    for _ in range(search_len):
        nxt = []
        for w, gx, gy, _d in level:
            for c in alphabet:
                if w and w[0] == c.swapcase():
                    continue
                nx, ny = action.apply_letter(c, gx), action.apply_letter(c, gy)
                dd = confluence(nx, ny)
                visited += 1
                nxt.append((c + w, nx, ny, dd))
                if dd > best:
                    best = dd
                    words.append(c + w)
                    depths.append(dd)
                    if dd >= target_depth:
                        return ProximalityCertificate(words, depths)
        if len(nxt) > beam:
            order = sorted(range(len(nxt)), key=lambda i: -nxt[i][3])[:beam]
            nxt = [nxt[i] for i in sorted(order)]
        level = nxt
    return NotFound({"search_len": search_len, "target_depth": target_depth, "beam": beam,
                     "visited": visited, "best_depth": max(best, 0)})


# ---------------------------------------------------------------- odometer cylinders


def _single_generator(action: TreeAction) -> str:
    if len(action.generators) != 1:
        raise ValueError("needs a single-generator action")
    return next(iter(action.generators))


def cylinder_dynamics(action: TreeAction, k: int) -> dict:
    """Permutation induced on depth-k cylinders by the odometer and its cycle lengths."""
    if action.tree.kind != KARY or action.tree.letters != "01" or not all(
        isinstance(g, Odometer) for g in action.generators.values()
    ):
        raise ValueError("cylinder_dynamics needs the binary odometer action")
    if not 0 <= k <= 16:
        raise ValueError("k must be between 0 and 16")
    g = _single_generator(action)
    words = ["".join(t) for t in _binary_words(k)]
    index = {w: i for i, w in enumerate(words)}
    perm = [index[act(action, g, Vertex(action.tree, w)).word] for w in words]
    seen = [False] * len(words)
    cycles = []
    for s in range(len(words)):
        if seen[s]:
            continue
        n, i = 0, s
        while not seen[i]:
            seen[i] = True
            i = perm[i]
            n += 1
        cycles.append(n)
    return {"k": k, "cylinders": words, "permutation": perm, "cycle_lengths": sorted(cycles, reverse=True)}


def _binary_words(k: int):
    import itertools

    return itertools.product("01", repeat=k)


def omega_limit_approx(action: TreeAction, x, k: int, steps: int) -> set[str]:
    """Depth-k cylinders met by x, gx, ..., g^(steps-1) x."""
    g = _single_generator(action)
    out = set()
    for _ in range(steps):
        out.add(x.prefix(k))
        x = act(action, g, x)
    return out


def identity_action(tree: RuleTree | None = None) -> TreeAction:
    tree = tree or RuleTree.kary(2)
    return TreeAction(tree, {"i": Relabel({})})


# ---------------------------------------------------------------- extreme proximality


def complement_cylinders(tree: RuleTree, w: str) -> list[str]:
    """Cylinders partitioning Y minus [w] (Y = ends)."""
    out = []
    for j in range(len(w)):
        out.extend(w[:j] + c for c in tree.successors(w[:j]) if c != w[j])
    return out


def cylinder_image(tree: RuleTree, g: str, u: str) -> list[str]:
    """g [u] as a union of cylinders, exactly (u nonempty, free group)."""
    r = reduce_word(g + u)
    c = (len(g) + len(u) - len(r)) // 2
    if c < len(u):
        return [r]
    rest = g[: len(g) - len(u)]
    out = []
    # [u] = u [c2] over letters c2 that do not cancel the last letter of u
    for c2 in tree.successors(u):
        out.extend(cylinder_image(tree, rest, c2) if rest else [c2])
    return out


def maps_into(tree: RuleTree, g: str, w: str, w2: str) -> bool:
    for u in complement_cylinders(tree, w):
        for z in cylinder_image(tree, g, u):
            if not z.startswith(w2):
                return False
    return True


def maps_into_literal(tree: RuleTree, g: str, w: str, w2: str) -> bool:
    """Oracle: check every depth-(|w|+|g|) cylinder outside [w] one at a time."""
    depth = max(len(w) + len(g), 1)
    for z in tree.words(depth):
        if z.startswith(w):
            continue
        if not reduce_word(g + z).startswith(w2):
            return False
    return True


def _comparable_words(tree: RuleTree, w2: str, radius: int):
    """Words of length <= radius that are prefixes or extensions of w2, shortlex order.

    Only these can work: Y minus [w] contains a cylinder [c] whose letter c does
    not cancel against g, and g [c] = [gc] must lie inside [w2].
    """
    for n in range(min(len(w2), radius + 1)):
        yield w2[:n]
    for n in range(len(w2), radius + 1):
        yield from tree.words(n, w2)


def shortest_ep_word(tree: RuleTree, w: str, w2: str) -> str:
    """Shortlex-first g with g (Y minus [w]) inside [w2], in closed form.

    g (Y minus [w]) = Y minus g[w].  If g does not swallow all of w, g[w] is one
    proper cylinder and its complement is too big.  Otherwise g = h w^-1 as a
    reduced word, g[w] = Y minus h[t] with t the inverse of the last letter of
    w, and h[t] = [ht].  So g works iff w2 is a prefix of ht.
    """
    t = w[-1].swapcase()
    winv = invert_word(w)

    def ok(h):
        return tree.is_word(h + winv) and (h + t).startswith(w2)

    if not w2:
        return ""
    cands = [w2[:-1]] if w2[-1] == t else []
    cands.append(w2)
    cands.extend(w2 + c for c in tree.successors(w2))
    for h in cands:
        if ok(h):
            return h + winv
    raise AssertionError("unreachable: some one-letter extension of w2 always works")


def extreme_proximality_witness(action: TreeAction, w: str, w2: str, radius: int, method: str = "formula"):
    """First g in shortlex order (generators a, b, ..., then inverses) with
    g (Y minus [w]) inside [w2], of length at most radius.

    ``method="search"`` walks candidate words breadth first and tests each with
    the exact cylinder-image check; ``"formula"`` jumps to the answer and still
    confirms it with the same check.
    """
    tree = action.tree
    if tree.kind != FREE or not all(isinstance(g, Translate) and len(g.word) == 1 for g in action.generators.values()):
        raise ValueError("needs the free-group boundary action by generators")
    if not w:
        raise ValueError("w must be nonempty")
    tree.check_word(w)
    tree.check_word(w2)
    if not w2:
        return ""
    if method == "formula":
        g = shortest_ep_word(tree, w, w2)
        if len(g) <= radius and maps_into(tree, g, w, w2):
            return g
        return NotFound({"radius": radius, "shortest": len(g)})
    tested = 0
    for g in _comparable_words(tree, w2, radius):
        tested += 1
        if maps_into(tree, g, w, w2):
            return g
    return NotFound({"radius": radius, "tested": tested})


# ---------------------------------------------------------------- closedness of betweenness


def _truncations(p, n: int):
    """A sequence converging to p: itself for vertices, prefixes for ends."""
    if isinstance(p, Vertex):
        return p
    return Vertex(p.tree, p.prefix(n))


def convergent_triple(tree: RuleTree, rng: np.random.Generator, length: int = 24):
    """Random (u_n, w_n, v_n) with <u_n, w_n, v_n> for every n and a limit triple."""
    u = tree.random_point(rng, p_end=0.7)
    v = tree.random_point(rng, p_end=0.7)
    while v == u:
        v = tree.random_point(rng, p_end=0.7)
    mode = int(rng.integers(3))
    k = int(rng.integers(0, 4))
    seq = []
    for n in range(1, length + 1):
        un, vn = _truncations(u, n), _truncations(v, n)
        c = confluence(un, vn)
        if c == EQUAL:
            # the truncations may coincide early on
            c = len(un.word)
        if mode == 0:
            # a fixed vertex of the limit geodesic, once it shows up
            wn = Vertex(tree, un.prefix(min(c + k, len(un.word))))
        elif mode == 1:
            wn = Vertex(tree, un.prefix(max(c, len(un.word) - k)))
        else:
            wn = vn
        seq.append((un, wn, vn))
    if mode == 0:
        c = confluence(u, v)
        lim_w = Vertex(tree, u.prefix(c + k if isinstance(u, End) else min(c + k, len(u.word))))
    elif mode == 1:
        lim_w = u if isinstance(u, End) else Vertex(tree, u.prefix(max(confluence(u, v), len(u.word) - k)))
    else:
        lim_w = v
    return seq, (u, lim_w, v)


def converges(seq, limit) -> bool:
    """Confluence with the limit tends to infinity (or is eventually EQUAL)."""
    tail = [confluence(s, limit) for s in seq[len(seq) // 2:]]
    return all(b >= a for a, b in zip(tail, tail[1:])) and (tail[-1] == EQUAL or tail[-1] >= len(seq) // 2)


def closedness_test_RB(tree: RuleTree, sample_size: int = 500, seed=0, length: int = 24) -> Report:
    rng = np.random.default_rng(seed)
    rep = Report(command="closedness", seed=seed)
    bad_seq = bad_lim = bad_conv = None
    for _ in range(sample_size):
        seq, (u, w, v) = convergent_triple(tree, rng, length)
        if bad_seq is None and not all(between_ext(*t) for t in seq):
            bad_seq = tuple(str(p) for p in seq[0])
        if bad_conv is None and not all(converges([t[i] for t in seq], lim) for i, lim in enumerate((u, w, v))):
            bad_conv = (str(u), str(w), str(v))
        if bad_lim is None and not between_ext(u, w, v):
            bad_lim = (str(u), str(w), str(v))
    rep.add("sequence_between", bad_seq is None, witness=bad_seq, detail={"samples": sample_size})
    rep.add("sequence_converges", bad_conv is None, witness=bad_conv)
    rep.add("limit_between", bad_lim is None, witness=bad_lim)
    return rep


# ---------------------------------------------------------------- fragmentation scan


def default_embed(j) -> Fraction:
    """Strictly increasing map of the signed axis positions onto (0, 1), ends to 0 and 1."""
    if j == -math.inf:
        return Fraction(0)
    if j == math.inf:
        return Fraction(1)
    j = Fraction(j)
    return (1 + j / (1 + abs(j))) / 2


@dataclass
class AxisFunction:
    """f = e . phi_{xi,eta}: project to the axis between two ends, then embed positions.

    Axis positions count edges from the divergence vertex, negative toward xi.
    """

    xi: End
    eta: End
    embed: Callable = default_embed

    def __post_init__(self):
        _same_tree(self.xi, self.eta)
        if self.xi == self.eta:
            raise ValueError("axis needs two distinct ends")
        self.c = confluence(self.xi, self.eta)

    def position(self, x):
        p = median_ext(self.xi, x, self.eta)
        if p == self.xi:
            return -math.inf
        if p == self.eta:
            return math.inf
        n = len(p.word) - self.c
        return -n if n and _is_prefix_of(p.word, self.xi) else n

    def __call__(self, x) -> Fraction:
        return Fraction(self.embed(self.position(x)))

    def positions_of_cylinder(self, z: str):
        """Range of axis positions over the cylinder [z] (vertices and ends below z)."""
        on_xi, on_eta = _is_prefix_of(z, self.xi), _is_prefix_of(z, self.eta)
        if on_xi and on_eta:
            return (-math.inf, math.inf)
        if on_xi:
            return (-math.inf, -(len(z) - self.c))
        if on_eta:
            return (len(z) - self.c, math.inf)
        q = self.position(Vertex(self.xi.tree, z))
        return (q, q)


@dataclass(frozen=True)
class ClosedPiece:
    kind: str  # cyl, ray, v, e
    word: str = ""
    pre: str = ""
    per: str = ""


def parse_closed_set(tree: RuleTree, spec) -> list[ClosedPiece]:
    """Components ``cyl:<word>``, ``ray:<pre>:<per>`` (root-to-end ray with its end),
    ``v:<word>`` and ``e:<pre>:<per>``, given as a list or a comma separated string."""
    if isinstance(spec, str):
        spec = [s for s in spec.split(",") if s.strip()]
    out = []
    for s in spec:
        parts = s.strip().split(":")
        if parts[0] in ("cyl", "v") and len(parts) == 2:
            tree.check_word(parts[1])
            out.append(ClosedPiece(parts[0], parts[1]))
        elif parts[0] in ("ray", "e") and len(parts) == 3:
            e = tree.end(parts[1], parts[2])
            out.append(ClosedPiece(parts[0], pre=e.pre, per=e.per))
        else:
            raise ValueError(f"malformed closed-set component {s!r}")
    if not out:
        raise ValueError("empty closed set")
    return out


def _piece_range(f: AxisFunction, tree: RuleTree, piece: ClosedPiece, nb: str):
    """Min and max of f over piece meet [nb] (nb a word prefix); None if empty."""
    if piece.kind == "v":
        if not piece.word.startswith(nb):
            return None
        y = f(Vertex(tree, piece.word))
        return (y, y)
    if piece.kind == "e":
        e = End(tree, piece.pre, piece.per)
        if not _is_prefix_of(nb, e):
            return None
        y = f(e)
        return (y, y)
    if piece.kind == "cyl":
        if piece.word.startswith(nb):
            z = piece.word
        elif nb.startswith(piece.word):
            z = nb
        else:
            return None
        lo, hi = f.positions_of_cylinder(z)
        a, b = Fraction(f.embed(lo)), Fraction(f.embed(hi))
        return (min(a, b), max(a, b))
    # ray: vertices end.prefix(k) for k >= |nb| plus the end; f is monotone along it
    e = End(tree, piece.pre, piece.per)
    if not _is_prefix_of(nb, e):
        return None
    a, b = f(Vertex(tree, nb)), f(e)
    return (min(a, b), max(a, b))


def _candidates(tree: RuleTree, f: AxisFunction, pieces, allow_vertices: bool):
    ends, verts = [], []
    for p in pieces:
        if p.kind in ("e", "ray"):
            ends.append(End(tree, p.pre, p.per))
        if p.kind == "cyl":
            for e in (f.xi, f.eta):
                if _is_prefix_of(p.word, e):
                    ends.append(e)
            # some end inside the cylinder, continuing along the first letters
            s = tree.successors(p.word)
            ends.append(canonicalize_end(tree, p.word, s[0] if tree.kind != FREE or not p.word else p.word[-1]))
            verts.append(Vertex(tree, p.word))
        if p.kind == "v":
            verts.append(Vertex(tree, p.word))
        if p.kind == "ray":
            verts.append(Vertex(tree, ""))
    seen, out = set(), []
    for x in ends + (verts if allow_vertices else []):
        if x not in seen:
            seen.add(x)
            out.append(x)
    return out


@dataclass
class ContinuityPoint:
    point: object
    oscillation: Fraction
    depth: int

    def __bool__(self) -> bool:
        return True


def _in_closed(tree, pieces, x) -> bool:
    for p in pieces:
        if p.kind == "v" and isinstance(x, Vertex) and x.word == p.word:
            return True
        if p.kind == "e" and x == End(tree, p.pre, p.per):
            return True
        if p.kind == "cyl" and _is_prefix_of(p.word, x):
            return True
        if p.kind == "ray":
            e = End(tree, p.pre, p.per)
            if x == e or (isinstance(x, Vertex) and _is_prefix_of(x.word, e)):
                return True
    return False


def fragment_scan(f: AxisFunction, closed_set_spec, epsilon, depth: int = 8, allow_vertices: bool = True):
    """Find p in K with oscillation of f on K meet N(p) below epsilon, where
    N(p) = {x : confluence(x, p) >= depth}.  Ends are tried before vertices;
    a vertex shallower than ``depth`` has N(p) = {p}."""
    tree = f.xi.tree
    pieces = parse_closed_set(tree, closed_set_spec)
    eps = Fraction(epsilon)
    for p in _candidates(tree, f, pieces, allow_vertices):
        if not _in_closed(tree, pieces, p):
            continue
        if isinstance(p, Vertex) and len(p.word) < depth:
            return ContinuityPoint(p, Fraction(0), depth)
        nb = p.prefix(depth)
        ranges = [r for r in (_piece_range(f, tree, q, nb) for q in pieces) if r is not None]
        osc = max(r[1] for r in ranges) - min(r[0] for r in ranges)
        if osc < eps:
            return ContinuityPoint(p, osc, depth)
    return NotFound({"depth": depth, "epsilon": eps})


def induced_structure(points):
    """Explicit betweenness structure on a finite set of extended points."""
    from .pretree import BetweennessStructure

    names = [str(p) for p in points]
    triples = [
        (names[i], names[j], names[k])
        for i in range(len(points))
        for j in range(len(points))
        for k in range(len(points))
        if between_ext(points[i], points[j], points[k])
    ]
    return BetweennessStructure.from_triples(names, triples, include_trivial=False)


def median_closure(points, limit: int = 60):
    pts = list(dict.fromkeys(points))
    changed = True
    while changed:
        changed = False
        n = len(pts)
        have = set(pts)
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    m = median_ext(pts[i], pts[j], pts[k])
                    if m not in have:
                        have.add(m)
                        pts.append(m)
                        changed = True
                        if len(pts) > limit:
                            raise ValueError("median closure too large")
    return pts
