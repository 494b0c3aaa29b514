"""Stuff a demand matrix and split it into circuit configurations."""
# %%
import numpy as np

from kcore_ocs import bvn

d = np.array([[4.0, 0.0, 1.0],
              [0.0, 2.0, 0.0],
              [1.0, 1.0, 3.0]])
stuffed, pad = bvn.stuff_matrix(d)
print("row sums", stuffed.sum(1), "col sums", stuffed.sum(0))
print("stuffing\n", pad)

# %% every term is a permutation held for weight / rate after one reconfiguration
dec = bvn.decompose(d)
for perm, w in dec.terms:
    print("perm", perm, "weight", round(w, 3))
print("exact:", np.allclose(dec.reconstruct(), stuffed), "terms:", len(dec.terms), "<=", 3 * 3 - 2 * 3 + 2)
