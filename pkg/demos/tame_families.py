"""Independence, tameness of monotone families and Helly selection."""
from fractions import Fraction

import numpy as np

from treelike import pretree, tameness

R = tameness.rademacher_family()
w = tameness.is_independent(R)
print(f"rademacher pair independent with a={w.a}, b={w.b}; patterns {w.pattern_witnesses}")

T = pretree.random_tree(12, np.random.default_rng(3))
print(tameness.convfun_property_test(T, trials=500, seed=3).to_text(timing=False), end="")

fam, rep = tameness.separating_tame_family(pretree.path(4))
print(f"{len(fam)} separators on the 4-path;", "all checks pass" if rep.ok else rep.failures())

rng = np.random.default_rng(11)
T20 = pretree.random_tree(20, rng)
pool = [tameness.random_monotone_function(T20, rng) for _ in range(4)]
F = tameness.FunctionFamily(T20, [pool[int(i)] for i in rng.integers(4, size=256)])
r = tameness.helly_select(F, Fraction(1, 10**6), 32)
print(f"helly: kept {len(r.indices)} of 256, oscillation {r.oscillation}, "
      f"limit monotone {tameness.limit_is_monotone(T20, r.limit)}")
