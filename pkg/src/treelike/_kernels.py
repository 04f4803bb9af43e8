"""Compiled inner loop for the exhaustive median-algebra check."""
import numpy as np
from numba import njit


@njit(cache=True)
def m3_first_violation(Mx):
    # Mx[y, z, x] = m(x, y, z); x innermost keeps both lookups contiguous
    n = Mx.shape[0]
    out = np.full(5, -1, dtype=np.int64)
    phi = np.empty(n, dtype=np.int64)
    for u in range(n):
        for v in range(u, n):
            for t in range(n):
                phi[t] = Mx[u, v, t]
            for y in range(n):
                py = phi[y]
                for z in range(y, n):
                    pz = phi[z]
                    bad = False
                    for x in range(n):
                        bad |= phi[Mx[y, z, x]] != Mx[py, pz, x]
                    if bad:
                        for x in range(n):
                            if phi[Mx[y, z, x]] != Mx[py, pz, x]:
                                out[0] = x
                                break
                        out[1] = y
                        out[2] = z
                        out[3] = u
                        out[4] = v
                        return out
    return out
