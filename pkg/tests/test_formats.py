from fractions import Fraction

import pytest

from treelike import formats, pretree, ztree
from treelike.formats import FormatError


def test_tree_order_triples():
    T = formats.parse_structure("# comment\ntree 3\nedge a b\nedge b c\n")
    assert T.points == ("a", "b", "c") and pretree.between(T, "a", "b", "c")
    O = formats.parse_structure("order x y z")
    assert pretree.between(O, "x", "y", "z")
    E = formats.parse_structure("triples\np q r\npoints s\n")
    assert set(E.points) == {"p", "q", "r", "s"} and pretree.between(E, "p", "q", "r")


@pytest.mark.parametrize("text", [
    "tree 3\nedge a b\n",
    "tree x\n",
    "tree 2\nedge a\n",
    "graph 3\n",
    "tree 2\nedge a b\nfamily 1\n",
])
def test_structure_errors(text):
    with pytest.raises(FormatError):
        formats.parse_structure(text)


def test_mapping():
    assert formats.parse_mapping("map\n0 a\n1 b\n") == {"0": "a", "1": "b"}
    with pytest.raises(FormatError):
        formats.parse_mapping("0 a\n")
    with pytest.raises(FormatError):
        formats.parse_mapping("map\n0 a b\n")


def test_family():
    F = formats.parse_family("family 2\n0=0 1=1/2\n0=1 1=-1/3\n")
    assert F.functions[1]["1"] == Fraction(-1, 3)
    assert F.carrier.points == ("0", "1")
    with pytest.raises(FormatError):
        formats.parse_family("family 3\n0=0 1=1\n")
    with pytest.raises(FormatError):
        formats.parse_family("family 1\n0=zz\n")
    with pytest.raises(FormatError):
        formats.parse_family("family 1\n0:1\n")


def test_action():
    A = formats.parse_action("ruletree free-group ab\ngen a translate a\ngen r relabel ba\n")
    assert isinstance(A.generators["r"], ztree.Relabel)
    O = formats.parse_action("ruletree rooted-k-ary 2\ngen t odometer\n")
    assert ztree.act(O, "t", O.tree.end("", "0")) == O.tree.end("1", "0")
    for bad in ("ruletree weird 2\n", "ruletree rooted-k-ary 2\ngen t translate 0\n",
                "ruletree free-group ab\ngen t odometer\n", "ruletree free-group ab\ngen r relabel aa\n",
                "gen a translate a\n"):
        with pytest.raises(FormatError):
            formats.parse_action(bad)


def test_complex_cover_automorphism(tmp_path):
    K = formats.parse_complex("subdivide 2\ntree 2\nedge 0 1\n")
    assert K.m == 2 and "0|1@1" in K.cells
    C = formats.parse_cover("set L 0 0|1/1\nset R 0|1/1 0|1@1 0|1/2 1\n", K)
    assert C.labels == ["L", "R"]
    with pytest.raises(FormatError):
        formats.parse_cover("", K)
    with pytest.raises(FormatError):
        formats.parse_complex("order a b\n")
    f = tmp_path / "auto.txt"
    f.write_text("0 1\n1 0\n")
    s = formats.parse_automorphism(str(f), K)
    assert s.vertex_map == {"0": "1", "1": "0"}
    f.write_text("reflect\n")
    assert formats.parse_automorphism(str(f), K).vertex_map == {"0": "1", "1": "0"}
    with pytest.raises(FormatError):
        formats.parse_automorphism("nonsense", K)
