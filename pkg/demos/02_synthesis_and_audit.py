"""Synthesize a publisher config per traffic type, then audit a few broken ones.

Run: python demos/02_synthesis_and_audit.py
"""

from __future__ import annotations

from pubsubconf import (
    DatasetOrdering,
    DeltaPreference,
    GuidelineError,
    SynthesisOptions,
    audit,
    builtin_catalog,
    builtin_spec,
    synthesize,
    validate_structural,
)

# %% Defaults for every type.
print(f"{'type':<18} {'dsm':<10} kfc delta ka   enc  ordering")
for spec in builtin_catalog():
    cfg = synthesize(spec)
    print(f"{spec.name:<18} {cfg.dsm_type.value:<10} {cfg.key_frame_count:>3} "
          f"{cfg.enable_delta_frames!s:<5} {cfg.keepalive_enabled!s:<4} "
          f"{cfg.encoding.value:<4} {cfg.dataset_ordering.label}")

# %% Dependent choices follow the inputs.
spec = builtin_spec("Diagnostic-Cycle")
print()
for c in (0.1, 0.5, 0.7):
    cfg = synthesize(spec, SynthesisOptions(expected_change_fraction=c))
    print(f"Diagnostic-Cycle at change fraction {c}: {cfg.dsm_type.value}, keepalive={cfg.keepalive_enabled}")
cfg = synthesize(spec, SynthesisOptions(endpoint_supports_pubsub=False))
print("subscriber without a PubSub endpoint ->", cfg.encoding.value, cfg.transport_profile.value)

# %% Asking for something the guidelines forbid fails loudly.
try:
    synthesize(builtin_spec("Control-Iso"), SynthesisOptions(delta_preference=DeltaPreference.ON))
except GuidelineError as exc:
    print("\nrefused:", exc)

# %% The audit flags hand-edited configs.
sync = builtin_spec("Control-Sync")
good = synthesize(sync)
print("\nclean Control-Sync config findings:", audit(good, sync))
bad = good.replace(dataset_ordering=DatasetOrdering.UNDEFINED, enable_delta_frames=True)
print("structural:")
for d in validate_structural(bad):
    print("  ", d.severity.value, d.rule_id)
fixed = bad.replace(enable_delta_frames=False)
print("guideline:")
for d in audit(fixed, sync):
    print("  ", d.severity.value, d.rule_id, "-", d.message)
