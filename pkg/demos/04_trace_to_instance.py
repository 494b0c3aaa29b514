"""From a coflow benchmark trace to a canonical instance file.

Set KCORE_OCS_FB_TRACE to the public trace to use it; otherwise an FB-like
synthetic trace stands in.
"""
# %%
import numpy as np

from kcore_ocs import harness as h, trace_io

path = h.trace_path_from_env()
if path:
    with open(path) as fh:
        records = trace_io.ingest_fb_trace(fh.read())
else:
    records = trace_io.synth_fb_like_trace(seed=2010)
print(len(records), "coflows; first:", records[0])

# %% short/long by 5 MB per flow, narrow/wide by 50 flows
flows = np.array([r.num_flows for r in records])
mb = np.array([r.total_volume for r in records])
print("median flows", np.median(flows), "share of bytes in the top 10%:",
      round(np.sort(mb)[-len(mb) // 10:].sum() / mb.sum(), 3))

# %% sample 10 coflows on 6 ports and write the canonical JSON
inst = trace_io.sample_instance(records, 6, 10, seed=1, release_policy="trace", time_unit=1e-3)
text = trace_io.write_canonical(inst)
print(text[:300], "...")
assert trace_io.write_canonical(trace_io.parse_canonical(text)) == text
