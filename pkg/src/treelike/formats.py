"""Line-oriented text formats for structures, maps, function families, actions,
complexes, covers and automorphisms.  Blank lines and ``#`` comments are ignored."""
from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from .pretree import BetweennessStructure
from .tameness import FunctionFamily


class FormatError(ValueError):
    pass


def _lines(text: str) -> list[tuple[int, list[str]]]:
    out = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((no, line.split()))
    return out


def read_text(path) -> str:
    return Path(path).read_text()


def _structure_from(lines) -> tuple[BetweennessStructure | None, list]:
    """Consume a structure section from the front of ``lines``; return the rest."""
    if not lines:
        return None, lines
    no, head = lines[0]
    if head[0] == "tree":
        if len(head) != 2 or not head[1].isdigit():
            raise FormatError(f"line {no}: expected 'tree <n>'")
        n = int(head[1])
        edges, pts, i = [], [], 1
        while i < len(lines) and lines[i][1][0] in ("edge", "point"):
            eno, parts = lines[i]
            if parts[0] == "edge":
                if len(parts) != 3:
                    raise FormatError(f"line {eno}: expected 'edge <u> <v>'")
                edges.append((parts[1], parts[2]))
            else:
                pts.extend(parts[1:])
            i += 1
        for u, v in edges:
            for p in (u, v):
                if p not in pts:
                    pts.append(p)
        if len(pts) != n:
            raise FormatError(f"line {no}: header says {n} points, found {len(pts)}")
        return BetweennessStructure.from_tree(edges, pts), lines[i:]
    if head[0] == "order":
        return BetweennessStructure.from_order(head[1:]), lines[1:]
    if head[0] == "triples":
        pts, triples, i = [], [], 1
        while i < len(lines) and len(lines[i][1]) == 3 and lines[i][1][0] not in ("map", "family"):
            t = tuple(lines[i][1])
            triples.append(t)
            for p in t:
                if p not in pts:
                    pts.append(p)
            i += 1
        while i < len(lines) and lines[i][1][0] == "points":
            for p in lines[i][1][1:]:
                if p not in pts:
                    pts.append(p)
            i += 1
        return BetweennessStructure.from_triples(pts, triples), lines[i:]
    return None, lines


def parse_structure(text: str) -> BetweennessStructure:
    """``tree <n>`` + ``edge u v`` lines, ``order p1 p2 ...``, or ``triples`` + ``a b c`` lines."""
    T, rest = _structure_from(_lines(text))
    if T is None:
        raise FormatError("expected a 'tree', 'order' or 'triples' header")
    if rest:
        raise FormatError(f"line {rest[0][0]}: unexpected content after structure")
    return T


def parse_mapping(text: str) -> dict:
    lines = _lines(text)
    if not lines or lines[0][1] != ["map"]:
        raise FormatError("expected a 'map' header")
    out = {}
    for no, parts in lines[1:]:
        if len(parts) != 2:
            raise FormatError(f"line {no}: expected '<src> <dst>'")
        out[parts[0]] = parts[1]
    return out


def parse_rational(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"bad rational {s!r}") from exc


def parse_family(text: str) -> FunctionFamily:
    """Optional structure section, then ``family <n>`` and one line of
    ``<point>=<rational>`` pairs per function.  Without a structure the carrier
    is the linear order of points in order of appearance."""
    lines = _lines(text)
    T, rest = _structure_from(lines)
    if not rest or rest[0][1][0] != "family" or len(rest[0][1]) != 2:
        raise FormatError("expected a 'family <n>' header")
    no, head = rest[0]
    n = int(head[1])
    funcs, pts = [], []
    for lno, parts in rest[1:]:
        f = {}
        for item in parts:
            if "=" not in item:
                raise FormatError(f"line {lno}: expected '<point>=<rational>'")
            p, v = item.split("=", 1)
            f[p] = parse_rational(v)
            if p not in pts:
                pts.append(p)
        funcs.append(f)
    if len(funcs) != n:
        raise FormatError(f"line {no}: header says {n} functions, found {len(funcs)}")
    if T is None:
        T = BetweennessStructure.from_order(pts)
    return FunctionFamily(T, funcs)


def parse_action(text: str):
    """``ruletree <kind> <arity-or-generators>`` then ``gen <name> <spec>`` lines with
    spec ``translate <word>``, ``odometer``, ``relabel <images>`` or ``swap <u> <v>``.

    ``relabel`` lists the images of the tree's letters in order (``10`` swaps the
    binary digits; ``ba`` swaps generators a and b)."""
    from . import ztree

    lines = _lines(text)
    if not lines or lines[0][1][0] != "ruletree" or len(lines[0][1]) != 3:
        raise FormatError("expected 'ruletree <kind> <arity-or-generators>'")
    _, kind, arg = lines[0][1]
    if kind == ztree.FREE:
        tree = ztree.RuleTree.free_group(arg)
    elif kind == ztree.KARY:
        if not arg.isdigit():
            raise FormatError("rooted-k-ary needs an arity")
        tree = ztree.RuleTree.kary(int(arg))
    else:
        raise FormatError(f"unknown tree kind {kind!r}")
    gens = {}
    for no, parts in lines[1:]:
        if parts[0] != "gen" or len(parts) < 3:
            raise FormatError(f"line {no}: expected 'gen <name> <spec>'")
        name, spec, args = parts[1], parts[2], parts[3:]
        if spec == "translate" and len(args) == 1:
            if tree.kind != ztree.FREE:
                raise FormatError(f"line {no}: translations need the free-group tree")
            gens[name] = ztree.Translate(tree.check_word(args[0]))
        elif spec == "odometer" and not args:
            if tree.kind != ztree.KARY or tree.letters != "01":
                raise FormatError(f"line {no}: the odometer needs the binary tree")
            gens[name] = ztree.Odometer()
        elif spec == "relabel" and len(args) == 1:
            if sorted(args[0]) != sorted(tree.letters):
                raise FormatError(f"line {no}: relabel needs a permutation of {tree.letters}")
            gens[name] = ztree.Relabel(dict(zip(tree.letters, args[0])))
        elif spec == "swap" and len(args) == 2:
            gens[name] = ztree.SwapVertices(tree.check_word(args[0]), tree.check_word(args[1]))
        else:
            raise FormatError(f"line {no}: bad generator spec {' '.join(parts[2:])!r}")
    return ztree.TreeAction(tree, gens)


def parse_complex(text: str):
    from .entropy import CellComplex

    lines = _lines(text)
    m = 1
    keep = []
    for no, parts in lines:
        if parts[0] == "subdivide":
            if len(parts) != 2 or not parts[1].isdigit():
                raise FormatError(f"line {no}: expected 'subdivide <m>'")
            m = int(parts[1])
        else:
            keep.append((no, parts))
    T, rest = _structure_from(keep)
    if T is None or T.backend != "tree" or rest:
        raise FormatError("a complex needs a 'tree' section and optional 'subdivide <m>'")
    return CellComplex.from_structure(T, m)


def parse_cover(text: str, K):
    from .entropy import CellCover

    named = {}
    for no, parts in _lines(text):
        if parts[0] != "set" or len(parts) < 3:
            raise FormatError(f"line {no}: expected 'set <name> <cell> ...'")
        named[parts[1]] = parts[2:]
    if not named:
        raise FormatError("empty cover")
    return CellCover.from_names(K, named)


def parse_automorphism(spec: str, K):
    """``identity``, ``reflect``, ``rotate``, ``swap:<r1>:<r2>`` or a file of ``<p> <q>``
    vertex-map lines (``reflect`` / ``swap <r1> <r2>`` lines also work in files)."""
    from . import entropy

    if spec == "identity":
        return entropy.identity_automorphism(K)
    if spec == "reflect":
        return entropy.reflection(K)
    if spec == "rotate":
        return entropy.rotation(K)
    if spec.startswith("swap:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise FormatError("expected swap:<r1>:<r2>")
        return entropy.subtree_swap(K, parts[1], parts[2])
    path = Path(spec)
    if not path.exists():
        raise FormatError(f"unknown automorphism {spec!r}")
    lines = _lines(path.read_text())
    if len(lines) == 1 and lines[0][1][0] in ("reflect", "swap", "identity", "rotate"):
        parts = lines[0][1]
        return parse_automorphism(":".join(parts) if parts[0] == "swap" else parts[0], K)
    vmap = {}
    for no, parts in lines:
        if len(parts) != 2:
            raise FormatError(f"line {no}: expected '<p> <q>'")
        vmap[parts[0]] = parts[1]
    return entropy.Automorphism(K, vmap)
