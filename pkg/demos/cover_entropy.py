"""Minimum subcovers of joined covers under automorphisms of subdivided trees."""
from treelike import entropy

K = entropy.path_complex(2)
B = entropy.b_cover(K)
print("B cover:", B.named())
print(entropy.lemma1_check(B).to_text(timing=False), end="")
res = entropy.sequence_entropy(B, entropy.reflection(K), 12)
print("L_A =", res["L_A"])
for row in res["rows"][:4]:
    print(f"  n={row['n']:2d} N={row['N']} bound={row['bound']} h={row['h']:.4f}")

for f in entropy.standard_fixtures(0)[:6]:
    rep = entropy.entropy_report(f.cover, f.seq, 12, f.name)
    print(f"{f.name:32s} {'pass' if rep.ok else 'FAIL'}  N: {rep['N_n_at_most_n_L_A'].detail['N']}")
