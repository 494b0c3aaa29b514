"""Exhaustive search on a tiny instance brackets the optimum from above."""
# %%
import numpy as np

from kcore_ocs import harness as h, make_instance
from kcore_ocs.oracle import brute_force_best

a = np.array([[0.0, 10.0], [0.0, 0.0]])
b = np.array([[3.0, 0.0], [0.0, 2.0]])
c = np.array([[0.0, 0.0], [4.0, 0.0]])
inst = make_instance([a, b, c], rates=[1, 2], delay=1, weights=[1, 2, 1], releases=[0, 0, 2])

best = brute_force_best(inst)
out = h.compare(inst)
print("LP bound  ", round(out[h.OURS][1].lp_bound, 3))
print("oracle    ", round(best.objective, 3), f"({best.explored} assignment/order pairs)")
for s, (_, rec) in out.items():
    print(f"{s:<10}", round(rec.total_weighted_cct, 3))
