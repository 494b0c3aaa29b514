"""A small reconfiguration-delay sweep, written as CSV."""
# %%
from kcore_ocs import harness as h
from kcore_ocs.metrics import records_to_csv

plan = h.ExperimentPlan(source={"kind": "fb-like"}, sweep_axis="delay", sweep_values=(2, 8, 12),
                        repetitions=2, num_ports=6, num_coflows=20)
records = h.run_sweep(plan)
print(records_to_csv(records).splitlines()[0])

# %% mean NormW per delay
for delay in plan.sweep_values:
    cell = [r for r in records if r.delay == delay]
    means = h.mean_by_scheme(cell)
    print(delay, {s: round(v, 3) for s, v in means.items()})
