"""Run the built-in production-cell flows, then watch a delta stream lose frames.

Run: python demos/05_usecase_and_loss.py
"""

from __future__ import annotations

import numpy as np

from pubsubconf import DataSetDefinition, FlowScenario, LinkModel, SynthesisOptions, builtin_spec, builtin_usecase, run_scenario, synthesize
from pubsubconf.pipeline import Always

# %% Nine flows, one config each, all synthesized from their traffic type.
print(f"{'flow':<7} {'traffic':<14} {'dsm':<10} {'bytes':>8} {'NMs':>6} {'mean lat us':>11} {'desync':>6} detect")
for flow in builtin_usecase():
    m = run_scenario(flow)
    print(f"{flow.flow_id:<7} {flow.traffic.label:<14} {flow.config.dsm_type.value:<10} "
          f"{m.bytes_on_wire:>8} {m.nm_count:>6} {m.mean_update_latency:>11.1f} {m.desync_ticks:>6} "
          f"{m.failure_detection_time}")

# %% One lost delta frame leaves the observer stale until the next key frame.
spec = builtin_spec("Diagnostic-Cycle")
cfg = synthesize(spec, SynthesisOptions(expected_change_fraction=0.2))
ds = (DataSetDefinition("d", 1, (4,) * 8, Always()),)
print(f"\nkey_frame_count={cfg.key_frame_count}; dropping one NetworkMessage at each cycle position (0 is the key frame)")
for k in range(cfg.key_frame_count):
    flow = FlowScenario("drop", ds, cfg, spec.type, LinkModel(forced_drops={16 + k}), duration_ticks=48)
    print(f"  position {k}: {run_scenario(flow).desync_ticks} desync ticks")

# %% Desync grows with the loss rate.
print("\nloss p   desync ticks per 10^4 ticks (mean of 5 seeds)")
for p in (0.01, 0.05, 0.1, 0.2):
    runs = [run_scenario(FlowScenario("p", ds, cfg, spec.type, LinkModel(loss_probability=p, seed=s),
                                      duration_ticks=10_000)).desync_ticks for s in range(5)]
    print(f"  {p:4.2f}   {np.mean(runs):8.1f}")
