"""The dyadic odometer and the free group acting on ends of trees."""
from fractions import Fraction

from treelike import ztree

A = ztree.odometer()
B = A.tree
for k in (1, 3, 8):
    print(f"depth {k}: cycle lengths {ztree.cylinder_dynamics(A, k)['cycle_lengths']}")
zero = B.end("", "0")
print("orbit of 0^w meets", sorted(ztree.omega_limit_approx(A, zero, 3, 8)))
print("proximal search on (0^w, 10^w):", ztree.detect_proximal(A, zero, B.end("1", "0"), 20, 20))

F = ztree.free_translations()
for w, w2 in (("a", "b"), ("a", "a"), ("ab", "Ba")):
    g = ztree.extreme_proximality_witness(F, w, w2, len(w) + len(w2) + 4)
    print(f"outside [{w}] pushed into [{w2}] by g = {g}")

cert = ztree.detect_proximal(F, F.tree.end("", "b"), F.tree.end("", "B"), 6, 8)
print("free group proximal certificate depths:", cert.depths)

print(ztree.closedness_test_RB(F.tree, 200, 1).to_text(timing=False), end="")
f = ztree.AxisFunction(B.end("", "0"), B.end("", "1"))
print("continuity point on the ray to 0^w:", ztree.fragment_scan(f, "ray::0", Fraction(1, 8)))
