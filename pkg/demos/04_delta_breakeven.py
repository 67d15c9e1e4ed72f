"""Where do delta frames stop paying off?

A delta frame carries a 2-byte index per changed field, so with change
fraction c and field size s it beats a key frame while c * (s + 2) < s.
This script sweeps c and measures both encodings on the pipeline.

Run: python demos/04_delta_breakeven.py
"""

from __future__ import annotations

import numpy as np

from pubsubconf import DataSetDefinition, Publisher, SynthesisOptions, builtin_spec, delta_beneficial, synthesize
from pubsubconf.pipeline import Bernoulli

FIELDS, SIZE, TICKS = 64, 4, 5_000
spec = builtin_spec("Command-Cycle")
key_cfg = synthesize(spec, SynthesisOptions(expected_change_fraction=1.0))
# a very long key-frame period isolates the delta cost
delta_cfg = synthesize(spec, SynthesisOptions(expected_change_fraction=0.1,
                                              key_frame_count_if_delta=10**9)).replace(keepalive_enabled=False)


def payload_per_tick(cfg, c: float) -> float:
    ds = DataSetDefinition("d", 1, (SIZE,) * FIELDS, Bernoulli(c))
    payload = [d.payload_bytes for t, nms in Publisher([ds], cfg, seed=1).run(TICKS) if t
               for nm in nms for d in nm.dsm_list]
    return float(np.sum(payload)) / (TICKS - 1)


print(f"analytic breakeven for s={SIZE}: c* = {SIZE / (SIZE + 2):.4f}\n")
print("   c     key B/tick  delta B/tick  delta wins  rule says")
for c in np.round(np.linspace(0.1, 0.9, 9), 2):
    key = payload_per_tick(key_cfg, c)
    delta = payload_per_tick(delta_cfg, c)
    print(f"{c:5.2f}  {key:11.1f}  {delta:12.1f}  {delta < key!s:>10}  {delta_beneficial(c, SIZE)!s:>9}")
