"""Guideline table, configuration synthesis and guideline audit."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .config import (
    TRANSPORT_FOR,
    DatasetOrdering,
    Diagnostic,
    DsmKind,
    Encoding,
    PublisherConfig,
    make_diagnostic,
    validate_structural,
)
from .traffic import Criticality, LengthConsistency, TrafficSpec, TrafficType

DELTA_FIELD_INDEX_BYTES = 2


class DeltaPreference(enum.Enum):
    AUTO = "auto"
    ON = "on"
    OFF = "off"


class KfcRule(enum.Enum):
    EXACTLY_ONE = "ExactlyOne"
    ONE_OR_GREATER = "OneOrGreater"


class Tristate(enum.Enum):
    YES = "Yes"
    NO = "No"
    DEPENDENT = "Dependent"


@dataclass(frozen=True)
class GuidelineRow:
    traffic: tuple[TrafficType, ...]
    dsm_types: tuple[DsmKind, ...]
    kfc_rule: KfcRule
    cyclic: bool
    delta: Tristate
    keepalive: Tristate
    encoding_options: tuple[Encoding, ...]
    ordering_options: tuple[DatasetOrdering, ...]


class GuidelineError(ValueError):
    """Synthesis refused a request the guideline forbids."""

    def __init__(self, rule_id: str, message: str):
        self.rule_id = rule_id
        super().__init__(f"{rule_id}: {message}")


@dataclass(frozen=True)
class SynthesisOptions:
    """Inputs to synthesis beyond the traffic type.

    ``expected_change_fraction`` is the per-interval fraction of fields that
    change and ``mean_field_size`` the average field width in bytes; together
    they decide ``DeltaPreference.AUTO``. ``bulk_flow`` selects Undefined
    ordering for event traffic that has no latency requirement.
    """

    delta_preference: DeltaPreference = DeltaPreference.AUTO
    endpoint_supports_pubsub: bool = True
    publisher_has_multiple_cyclic_dsms: bool = False
    expected_change_fraction: float = 1.0
    key_frame_count_if_delta: int = 8
    mean_field_size: float = 4.0
    bulk_flow: bool = False
    publishing_interval: int = 10_000
    keepalive_intervals: int = 4
    max_network_message_size: int = 1472
    max_encapsulated_dsm_count: int = 32

    def __post_init__(self) -> None:
        if not 0.0 <= self.expected_change_fraction <= 1.0:
            raise ValueError("expected_change_fraction must lie in [0, 1]")
        if self.mean_field_size <= 0:
            raise ValueError("mean_field_size must be positive")
        if self.keepalive_intervals < 1:
            raise ValueError("keepalive_intervals must be >= 1")


def delta_beneficial(change_fraction: float, field_size: float) -> bool:
    """True when delta frames carry fewer payload bytes than key frames.

    A changed field costs ``s + 2`` bytes in a delta frame and every field
    costs ``s`` in a key frame, so delta wins iff ``c * (s + 2) < s``.
    """
    return change_fraction * (field_size + DELTA_FIELD_INDEX_BYTES) < field_size


def _split(raw: str) -> list[str]:
    return raw.split()


@lru_cache(maxsize=1)
def _table() -> tuple[GuidelineRow, ...]:
    text = resources.files("pubsubconf").joinpath("data/guideline_table.csv").read_text(
        encoding="utf-8"
    )
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append(
            GuidelineRow(
                traffic=tuple(TrafficType(int(t)) for t in _split(rec["traffic_ids"])),
                dsm_types=tuple(DsmKind(d) for d in _split(rec["dsm_type"])),
                kfc_rule=KfcRule(rec["key_frame_count"]),
                cyclic=rec["cyclic_dataset"] == "yes",
                delta=Tristate(rec["enable_delta_frames"]),
                keepalive=Tristate(rec["keepalive"]),
                encoding_options=tuple(Encoding(e) for e in _split(rec["encoding"])),
                ordering_options=tuple(
                    DatasetOrdering(int(o)) for o in _split(rec["dataset_ordering"])
                ),
            )
        )
    return tuple(rows)


def guideline_table() -> list[GuidelineRow]:
    return list(_table())


def guideline_row(traffic: TrafficType) -> GuidelineRow:
    for row in _table():
        if traffic in row.traffic:
            return row
    raise KeyError(traffic)


@dataclass(frozen=True)
class DependentResolution:
    delta: bool
    key_frame_count: int
    keepalive: bool


def resolve_dependent(spec: TrafficSpec, opts: SynthesisOptions) -> DependentResolution:
    """Resolve the delta/KeyFrameCount/KeepAlive triple for cyclic command and diagnostic traffic."""
    if guideline_row(spec.type).delta is not Tristate.DEPENDENT:
        raise ValueError(f"{spec.name} has no delta-dependent configuration")
    pref = opts.delta_preference
    if pref is DeltaPreference.AUTO:
        use_delta = delta_beneficial(opts.expected_change_fraction, opts.mean_field_size)
    else:
        use_delta = pref is DeltaPreference.ON
    if not use_delta:
        return DependentResolution(False, 1, False)
    if opts.key_frame_count_if_delta <= 1:
        raise ValueError("key_frame_count_if_delta must be greater than 1 when delta frames are used")
    return DependentResolution(True, opts.key_frame_count_if_delta, True)


def choose_ordering(spec: TrafficSpec, opts: SynthesisOptions) -> DatasetOrdering:
    options = guideline_row(spec.type).ordering_options
    if len(options) == 1:
        return options[0]
    if set(options) == {DatasetOrdering.ASCENDING_WRITER_ID, DatasetOrdering.ASCENDING_WRITER_ID_SINGLE}:
        # aggregation only pays off when several cyclic DSMs share the interval
        if opts.publisher_has_multiple_cyclic_dsms:
            return DatasetOrdering.ASCENDING_WRITER_ID
        return DatasetOrdering.ASCENDING_WRITER_ID_SINGLE
    if set(options) == {DatasetOrdering.ASCENDING_WRITER_ID_SINGLE, DatasetOrdering.UNDEFINED}:
        return DatasetOrdering.UNDEFINED if opts.bulk_flow else DatasetOrdering.ASCENDING_WRITER_ID_SINGLE
    return options[0]


def choose_encoding(spec: TrafficSpec, opts: SynthesisOptions) -> Encoding:
    options = guideline_row(spec.type).encoding_options
    if Encoding.JSON in options and not opts.endpoint_supports_pubsub:
        return Encoding.JSON
    return Encoding.UADP


def synthesize(spec: TrafficSpec, opts: SynthesisOptions | None = None) -> PublisherConfig:
    opts = opts or SynthesisOptions()
    row = guideline_row(spec.type)
    if row.delta is Tristate.NO and opts.delta_preference is DeltaPreference.ON:
        raise GuidelineError(
            "GUIDE_DELTA_FORBIDDEN",
            f"delta frames are not permitted for {spec.name} traffic",
        )

    if row.delta is Tristate.DEPENDENT:
        dep = resolve_dependent(spec, opts)
        dsm_type = DsmKind.DELTA_FRAME if dep.delta else DsmKind.KEY_FRAME
        delta, kfc, keepalive = dep.delta, dep.key_frame_count, dep.keepalive
    else:
        dsm_type = row.dsm_types[0]
        delta, kfc = False, 1
        keepalive = row.keepalive is Tristate.YES

    encoding = choose_encoding(spec, opts)
    return PublisherConfig(
        dsm_type=dsm_type,
        key_frame_count=kfc,
        cyclic_dataset=row.cyclic,
        enable_delta_frames=delta,
        keepalive_enabled=keepalive,
        keepalive_time=opts.keepalive_intervals * opts.publishing_interval,
        publishing_interval=opts.publishing_interval,
        encoding=encoding,
        transport_profile=TRANSPORT_FOR[encoding],
        dataset_ordering=choose_ordering(spec, opts),
        max_network_message_size=opts.max_network_message_size,
        max_encapsulated_dsm_count=opts.max_encapsulated_dsm_count,
    )


# -- audit ---------------------------------------------------------------------------


def _multiple_datasets(opts: SynthesisOptions | None) -> bool:
    # Without context, assume the publisher carries several datasets (the
    # common case for controllers and edge nodes).
    if opts is None:
        return True
    return opts.publisher_has_multiple_cyclic_dsms or opts.bulk_flow


def guideline_findings(
    cfg: PublisherConfig, spec: TrafficSpec, opts: SynthesisOptions | None = None
) -> list[Diagnostic]:
    """Guideline rules only, in registry order. ``opts`` supplies workload context."""
    out: list[Diagnostic] = []
    delta = cfg.delta_requested
    name = spec.name

    if delta and not spec.loss_tolerant:
        out.append(make_diagnostic("DELTA_ON_LOSS_INTOLERANT", f"{name} is loss-intolerant"))
    if cfg.dsm_type in (DsmKind.KEY_FRAME, DsmKind.DELTA_FRAME) and not spec.periodic:
        out.append(make_diagnostic("KEYFRAME_FOR_EVENT", f"{cfg.dsm_type.value} on aperiodic {name}"))
    if (
        delta
        and opts is not None
        and not delta_beneficial(opts.expected_change_fraction, opts.mean_field_size)
    ):
        out.append(
            make_diagnostic(
                "DELTA_HIGH_CHURN",
                f"change fraction {opts.expected_change_fraction:g} with {opts.mean_field_size:g}-byte fields",
            )
        )
    if delta and cfg.key_frame_count > 1 and not cfg.keepalive_enabled:
        out.append(
            make_diagnostic("KFC_HIGH_NO_KEEPALIVE", f"key_frame_count={cfg.key_frame_count}")
        )
    if cfg.key_frame_count > 1 and not delta:
        out.append(make_diagnostic("KFC_IRRELEVANT", f"key_frame_count={cfg.key_frame_count}"))
    if not cfg.cyclic_dataset and spec.periodic:
        out.append(make_diagnostic("ACYCLIC_FLAG_FOR_PERIODIC", f"{name} is periodic"))
    if (
        cfg.keepalive_enabled
        and cfg.cyclic_dataset
        and cfg.dsm_type in (DsmKind.KEY_FRAME, DsmKind.CHUNK)
        and not delta
    ):
        out.append(make_diagnostic("KEEPALIVE_ON_PURE_KEYFRAME"))
    if cfg.encoding is Encoding.JSON and (
        spec.criticality is Criticality.HIGH or not spec.loss_tolerant
    ):
        out.append(make_diagnostic("JSON_FOR_DETERMINISTIC", f"JSON on {name}"))
    if (
        cfg.dataset_ordering is DatasetOrdering.UNDEFINED
        and spec.criticality is Criticality.HIGH
        and spec.length_consistency is LengthConsistency.FIXED
    ):
        out.append(make_diagnostic("UNDEFINED_ORDERING_FOR_CRITICAL", f"Undefined ordering on {name}"))
    if (
        cfg.dataset_ordering is DatasetOrdering.ASCENDING_WRITER_ID_SINGLE
        and spec.criticality in (Criticality.LOW, Criticality.MEDIUM)
        and spec.length_consistency is LengthConsistency.VARIABLE
        and _multiple_datasets(opts)
    ):
        out.append(make_diagnostic("SINGLE_ORDERING_FOR_BULK", f"AscendingWriterIDSingle on {name}"))
    if not spec.periodic and not cfg.keepalive_enabled:
        out.append(make_diagnostic("KEEPALIVE_MISSING_FOR_EVENT", f"{name} without keepalive"))
    return out


def audit(
    cfg: PublisherConfig, spec: TrafficSpec, opts: SynthesisOptions | None = None
) -> list[Diagnostic]:
    """Structural findings first, then every triggered guideline rule."""
    return validate_structural(cfg) + guideline_findings(cfg, spec, opts)


# Documented one-field mutations of a synthesized configuration and the rule
# each must raise. Used by the mutation-matrix tests and the CLI docs.
@dataclass(frozen=True)
class Mutation:
    rule_id: str
    traffic: TrafficType
    base_options: SynthesisOptions
    changes: dict
    audit_options: SynthesisOptions | None = None


def documented_mutations() -> list[Mutation]:
    delta_on = SynthesisOptions(
        delta_preference=DeltaPreference.ON, expected_change_fraction=0.1, key_frame_count_if_delta=8
    )
    off = SynthesisOptions(delta_preference=DeltaPreference.OFF)
    default = SynthesisOptions()
    delta_flip = {"dsm_type": DsmKind.DELTA_FRAME, "enable_delta_frames": True}
    T = TrafficType
    return [
        Mutation("DELTA_ON_LOSS_INTOLERANT", T.CONTROL_SYNC, default, delta_flip),
        Mutation("KEYFRAME_FOR_EVENT", T.EVENT, default, {"dsm_type": DsmKind.KEY_FRAME}),
        Mutation(
            "DELTA_HIGH_CHURN",
            T.COMMAND_CYCLE,
            delta_on,
            {},
            audit_options=SynthesisOptions(
                delta_preference=DeltaPreference.ON, expected_change_fraction=0.9
            ),
        ),
        Mutation("KFC_HIGH_NO_KEEPALIVE", T.COMMAND_CYCLE, delta_on, {"keepalive_enabled": False}),
        Mutation("KFC_IRRELEVANT", T.CONTROL_SYNC, default, {"key_frame_count": 4}),
        Mutation("ACYCLIC_FLAG_FOR_PERIODIC", T.CONTROL_ISO, default, {"cyclic_dataset": False}),
        Mutation("KEEPALIVE_ON_PURE_KEYFRAME", T.CONTROL_SYNC, default, {"keepalive_enabled": True}),
        Mutation(
            "JSON_FOR_DETERMINISTIC",
            T.CONTROL_SYNC,
            default,
            {"encoding": Encoding.JSON, "transport_profile": TRANSPORT_FOR[Encoding.JSON]},
        ),
        Mutation(
            "UNDEFINED_ORDERING_FOR_CRITICAL",
            T.CONTROL_SYNC,
            default,
            {"dataset_ordering": DatasetOrdering.UNDEFINED},
        ),
        Mutation(
            "SINGLE_ORDERING_FOR_BULK",
            T.COMMAND_CYCLE,
            SynthesisOptions(delta_preference=DeltaPreference.OFF, publisher_has_multiple_cyclic_dsms=True),
            {"dataset_ordering": DatasetOrdering.ASCENDING_WRITER_ID_SINGLE},
        ),
        Mutation("KEEPALIVE_MISSING_FOR_EVENT", T.EVENT, off, {"keepalive_enabled": False}),
    ]
