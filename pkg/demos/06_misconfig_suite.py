"""Break each use-case config the way a careless integrator might and measure the cost.

Every case pairs a guideline-clean baseline with a mutated config. The audit
must name the broken rule and the simulation must move the claimed metric in
the claimed direction.

Run: python demos/06_misconfig_suite.py
"""

from __future__ import annotations

from collections import Counter

from pubsubconf import run_misconfiguration_suite
from pubsubconf.usecase import format_value

results = run_misconfiguration_suite()
for r in results:
    c = r.case
    verdict = "PASS" if r.passed else "FAIL"
    print(f"{verdict}  {c.name}")
    print(f"      topic: {c.topic}; flow: {c.scenario.flow_id} ({c.scenario.traffic.label})")
    print(f"      audit raised: {', '.join(r.raised_rules) or '-'}")
    print(f"      {c.metric}: {format_value(r.baseline_value)} -> {format_value(r.bad_value)} "
          f"(expected {c.direction})")

print("\ncases per topic:", dict(Counter(r.case.topic.split(":")[0] for r in results)))
