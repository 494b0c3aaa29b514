"""Run every scheme on one FB-like sample at the default setting."""
# %%
from kcore_ocs import harness as h

plan = h.default_plan(num_coflows=30)
inst = h.cell_instance(plan, None, rep=0)
print(inst.num_coflows, "coflows on", inst.config.num_ports, "ports, rates", inst.config.core_rates)

# %%
out = h.compare(inst, seed=0)
print(f"{'scheme':<11} {'weighted CCT':>14} {'NormW':>7} {'p95':>9}")
for s, (res, rec) in out.items():
    print(f"{s:<11} {rec.total_weighted_cct:>14.1f} {rec.normalized_weighted_cct:>7.3f} {rec.p95_cct:>9.1f}")
print("OURS / LP bound:", round(out[h.OURS][1].approx_ratio, 2))
