"""Betweenness on small trees, the shadow topology and the median retraction."""
from treelike import pretree, shadow

T = pretree.path(4)
S = pretree.star()

print("<0,1,3> on the path:", pretree.between(T, "0", "1", "3"))
print("[x,z] in the star:", sorted(pretree.interval(S, "x", "z").members))
print("median(x,y,z) in the star:", pretree.median(S, "x", "y", "z"))
print("axioms on the path:", "pass" if pretree.check_axioms(T).ok else "fail")

antichain = pretree.BetweennessStructure.from_triples(["u", "v", "w"], [])
print("antichain is a pretree:", pretree.check_axioms(antichain).ok,
      "but median pretree:", pretree.is_median_pretree(antichain))

print("shadow S^3_1 on the path:", sorted(shadow.shadow(T, "1", "3").members))
top = shadow.generate_topology(T)
print("closed sets generated by shadows:", len(top.closed_sets), "discrete:", top.is_discrete)

rep = shadow.retraction_report(T, "0", "2")
print(rep.to_text(timing=False), end="")
st = shadow.stability_check(pretree.path(3))
print("stable:", st.stable, "first unstable pair:", st.witness, "pair (0,2) separated by:", st.pair_witness[("0", "2")])
