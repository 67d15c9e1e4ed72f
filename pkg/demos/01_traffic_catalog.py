"""Walk through the built-in traffic catalog and flow classification.

Run: python demos/01_traffic_catalog.py
"""

from __future__ import annotations

from pubsubconf import CommLevel, FlowAttributes, builtin_catalog, classify_flow
from pubsubconf.traffic import Criticality, LengthConsistency

# %% Eleven traffic types, each a tuple of five attributes.
for spec in builtin_catalog():
    levels = ";".join(sorted(level.value for level in spec.comm_levels))
    print(f"{int(spec.type):>2} {spec.name:<18} periodic={spec.periodic!s:<5} "
          f"crit={spec.criticality.value:<6} loss_tolerant={spec.loss_tolerant!s:<5} "
          f"{spec.length_consistency.value:<8} {levels}")

# %% A flow's attributes pick out the matching type(s).
# A periodic, loss-intolerant, fixed-length controller-to-controller stream:
flow = FlowAttributes(
    periodic=True,
    criticality=Criticality.HIGH,
    loss_tolerant=False,
    length_consistency=LengthConsistency.FIXED,
    comm_levels=frozenset({CommLevel.C2C}),
)
print("\nperiodic high-criticality C2C flow ->", [t.label for t in classify_flow(flow)])

# A change-driven low-priority stream to a computing unit:
flow = FlowAttributes(
    periodic=False,
    criticality=Criticality.LOW,
    loss_tolerant=True,
    length_consistency=LengthConsistency.VARIABLE,
    comm_levels=frozenset({CommLevel.D2CMP}),
)
print("aperiodic low-criticality D2Cmp flow ->", [t.label for t in classify_flow(flow)])
