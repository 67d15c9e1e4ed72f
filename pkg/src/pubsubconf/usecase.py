"""Built-in production-cell use case and the paired misconfiguration experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from importlib import resources
from typing import Callable

from .config import TRANSPORT_FOR, DatasetOrdering, DsmKind, Encoding, PublisherConfig
from .mapping import SynthesisOptions, guideline_findings, synthesize
from .pipeline import Always, DataSetDefinition
from .scenario import load_scenarios
from .sim import FlowScenario, SimMetrics, detection_value, run_scenario
from .traffic import builtin_spec


def usecase_text() -> str:
    return resources.files("pubsubconf").joinpath("data/usecase.json").read_text(encoding="utf-8")


def builtin_usecase(seed: int | None = None) -> list[FlowScenario]:
    """The nine flows of the production-cell use case, configs synthesized from their traffic types."""
    return load_scenarios(usecase_text(), seed=seed)


def _flow(flows: list[FlowScenario], n: int) -> FlowScenario:
    return next(f for f in flows if f.flow_id == f"Flow {n}")


@dataclass(frozen=True)
class MisconfigCase:
    name: str
    topic: str
    scenario: FlowScenario
    bad_config: PublisherConfig
    expected_rules: tuple[str, ...]
    metric: str
    direction: str  # "up": bad run must exceed baseline
    audit_options: SynthesisOptions | None = None

    @property
    def baseline_config(self) -> PublisherConfig:
        return self.scenario.config


@dataclass(frozen=True)
class MisconfigResult:
    case: MisconfigCase
    raised_rules: tuple[str, ...]
    baseline: SimMetrics
    bad: SimMetrics
    baseline_value: float
    bad_value: float

    @property
    def rules_ok(self) -> bool:
        return set(self.case.expected_rules) <= set(self.raised_rules)

    @property
    def direction_ok(self) -> bool:
        if self.case.direction == "up":
            return self.bad_value > self.baseline_value
        return self.bad_value < self.baseline_value

    @property
    def passed(self) -> bool:
        return self.rules_ok and self.direction_ok


METRIC_GETTERS: dict[str, Callable[[SimMetrics], float]] = {
    "bytes_on_wire": lambda m: float(m.bytes_on_wire),
    "nm_count": lambda m: float(m.nm_count),
    "desync_ticks": lambda m: float(m.desync_ticks),
    "update_latency_std": lambda m: m.update_latency_std,
    "failure_detection_time": detection_value,
    "nm_bytes_var": lambda m: m.nm_bytes_var,
}


def _co_published(flow7: FlowScenario) -> FlowScenario:
    """Flow 7 plus a variable-length diagnostic dataset on a slower interval from the same motor."""
    extra = DataSetDefinition(
        dataset_id="arm_motor_status",
        writer_id=2,
        field_sizes=(4,) * 6,
        change_model=Always(),
        publishing_interval=3 * flow7.config.publishing_interval,
        variable_size=32,
    )
    return replace(flow7, datasets=flow7.datasets + (extra,))


def misconfiguration_suite(seed: int | None = None) -> list[MisconfigCase]:
    flows = builtin_usecase(seed)
    f1, f3, f4, f5, f7 = (_flow(flows, n) for n in (1, 3, 4, 5, 7))
    f7_mixed = _co_published(f7)
    json_enc = {"encoding": Encoding.JSON, "transport_profile": TRANSPORT_FOR[Encoding.JSON]}
    return [
        MisconfigCase(
            "keyframes-for-events",
            "DSM type: event data published as cyclic key frames",
            f4,
            f4.config.replace(dsm_type=DsmKind.KEY_FRAME, cyclic_dataset=True),
            ("KEYFRAME_FOR_EVENT",),
            "bytes_on_wire",
            "up",
        ),
        MisconfigCase(
            "delta-on-control",
            "DSM type: delta frames on loss-intolerant control data",
            f1,
            f1.config.replace(
                dsm_type=DsmKind.DELTA_FRAME, enable_delta_frames=True, key_frame_count=8
            ),
            ("DELTA_ON_LOSS_INTOLERANT",),
            "desync_ticks",
            "up",
        ),
        MisconfigCase(
            "kfc-high-no-keepalive",
            "KeyFrameCount: very high count and no KeepAlive on delta diagnostics",
            f5,
            f5.config.replace(key_frame_count=100, keepalive_enabled=False),
            ("KFC_HIGH_NO_KEEPALIVE",),
            "failure_detection_time",
            "up",
        ),
        MisconfigCase(
            "acyclic-periodic",
            "CyclicDataset: periodic control data flagged non-cyclic",
            f7,
            f7.config.replace(cyclic_dataset=False),
            ("ACYCLIC_FLAG_FOR_PERIODIC",),
            "update_latency_std",
            "up",
        ),
        MisconfigCase(
            "event-without-keepalive",
            "KeepAliveTime: event stream with KeepAlive disabled",
            f4,
            f4.config.replace(keepalive_enabled=False),
            ("KEEPALIVE_MISSING_FOR_EVENT",),
            "failure_detection_time",
            "up",
        ),
        MisconfigCase(
            "json-on-control",
            "Encoding: JSON on deterministic control data",
            f1,
            f1.config.replace(**json_enc),
            ("JSON_FOR_DETERMINISTIC",),
            "bytes_on_wire",
            "up",
        ),
        MisconfigCase(
            "undefined-ordering-critical",
            "DatasetOrdering: Undefined on fixed-size control data with a co-published dataset",
            f7_mixed,
            f7_mixed.config.replace(dataset_ordering=DatasetOrdering.UNDEFINED),
            ("UNDEFINED_ORDERING_FOR_CRITICAL",),
            "nm_bytes_var",
            "up",
        ),
        MisconfigCase(
            "single-ordering-bulk",
            "DatasetOrdering: one NetworkMessage per dataset for bulk HMI data",
            f3,
            f3.config.replace(dataset_ordering=DatasetOrdering.ASCENDING_WRITER_ID_SINGLE),
            ("SINGLE_ORDERING_FOR_BULK",),
            "nm_count",
            "up",
            audit_options=f3.synthesis,
        ),
    ]


def run_case(case: MisconfigCase) -> MisconfigResult:
    spec = builtin_spec(case.scenario.traffic)
    raised = tuple(d.rule_id for d in guideline_findings(case.bad_config, spec, case.audit_options))
    base = run_scenario(case.scenario)
    bad = run_scenario(case.scenario.with_config(case.bad_config))
    get = METRIC_GETTERS[case.metric]
    return MisconfigResult(case, raised, base, bad, get(base), get(bad))


def run_misconfiguration_suite(seed: int | None = None) -> list[MisconfigResult]:
    return [run_case(c) for c in misconfiguration_suite(seed)]


def format_value(v: float) -> str:
    if math.isinf(v):
        return "undetected"
    return f"{v:.3f}"


def baseline_is_guideline_clean(case: MisconfigCase) -> bool:
    spec = builtin_spec(case.scenario.traffic)
    opts = case.scenario.synthesis or SynthesisOptions()
    return synthesize(spec, opts) == case.baseline_config
