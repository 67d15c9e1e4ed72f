"""Follow datasets through the publisher pipeline and look at message sizes.

Run: python demos/03_message_pipeline.py
"""

from __future__ import annotations

import numpy as np

from pubsubconf import (
    DataSetDefinition,
    DatasetOrdering,
    Publisher,
    SizeModel,
    SynthesisOptions,
    builtin_spec,
    synthesize,
)
from pubsubconf.pipeline import Bernoulli, Never

model = SizeModel()
print(f"size model: NetworkMessage fixed {model.nm_fixed} B, per DataSetMessage {model.dsm_header + model.payload_header_per_dsm} B + payload")

# %% Three writers on one Diagnostic-Cycle publisher with delta frames.
datasets = [
    DataSetDefinition("temps", 1, (4,) * 16, Bernoulli(0.1)),
    DataSetDefinition("counters", 2, (8,) * 4, Bernoulli(0.3)),
    DataSetDefinition("serial", 3, (32,), Never()),
]
cfg = synthesize(builtin_spec("Diagnostic-Cycle"),
                 SynthesisOptions(expected_change_fraction=0.1, key_frame_count_if_delta=4,
                                  publishing_interval=10_000, keepalive_intervals=2))
pub = Publisher(datasets, cfg, seed=7)
for t, nms in pub.run(8):
    parts = [" + ".join(f"w{d.writer_id}:{d.kind.value}({d.payload_bytes})" for d in nm.dsm_list)
             for nm in nms]
    print(f"t={t // 1000:>3} ms  " + (" | ".join(f"[{p}] {nm.wire_bytes} B" for p, nm in zip(parts, nms)) or "-"))

# %% Ordering decides how DataSetMessages share NetworkMessages.
sizes = {}
for ordering in DatasetOrdering:
    pub = Publisher(datasets, cfg.replace(dataset_ordering=ordering), seed=7)
    wire = np.array([nm.wire_bytes for _, nms in pub.run(1000) for nm in nms])
    sizes[ordering] = wire
    print(f"{ordering.label:<26} {wire.size:>5} NMs  {wire.sum():>7} B  mean {wire.mean():6.1f}  var {wire.var():8.1f}")
