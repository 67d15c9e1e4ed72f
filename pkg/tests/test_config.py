from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pubsubconf.config import (
    TRANSPORT_FOR,
    ConfigError,
    DatasetOrdering,
    DsmKind,
    Encoding,
    PublisherConfig,
    Severity,
    TransportProfile,
    config_to_dict,
    dump_config,
    effective_key_frame_period,
    load_config,
    rule_registry,
    validate_structural,
)

configs = st.builds(
    PublisherConfig,
    dsm_type=st.sampled_from(list(DsmKind)),
    key_frame_count=st.integers(-2, 20),
    cyclic_dataset=st.booleans(),
    enable_delta_frames=st.booleans(),
    keepalive_enabled=st.booleans(),
    keepalive_time=st.integers(0, 100_000),
    publishing_interval=st.integers(-10, 100_000),
    encoding=st.sampled_from(list(Encoding)),
    transport_profile=st.sampled_from(list(TransportProfile)),
    dataset_ordering=st.sampled_from(list(DatasetOrdering)),
    max_network_message_size=st.integers(-1, 9000),
    max_encapsulated_dsm_count=st.integers(-1, 64),
)


def expected_violations(c: PublisherConfig) -> set[str]:
    """Independent restatement of the structural invariants."""
    out = set()
    if c.key_frame_count < 1:
        out.add("STRUCT_KFC_MIN")
    if c.keepalive_enabled and c.keepalive_time < c.publishing_interval:
        out.add("STRUCT_KEEPALIVE_LT_INTERVAL")
    if c.publishing_interval <= 0:
        out.add("STRUCT_INTERVAL_POSITIVE")
    if c.enable_delta_frames and not c.cyclic_dataset:
        out.add("STRUCT_DELTA_REQUIRES_CYCLIC")
    if (c.dsm_type == DsmKind.DELTA_FRAME) != c.enable_delta_frames:
        out.add("STRUCT_DELTA_FLAG_MISMATCH")
    if c.dsm_type == DsmKind.EVENT and (c.cyclic_dataset or c.enable_delta_frames):
        out.add("STRUCT_EVENT_FLAGS")
    if c.dsm_type == DsmKind.KEEPALIVE:
        out.add("STRUCT_KEEPALIVE_AS_TYPE")
    uadp = c.encoding == Encoding.UADP
    if uadp != (c.transport_profile == TransportProfile.UDP_UADP):
        out.add("STRUCT_ENCODING_TRANSPORT")
    if c.max_network_message_size <= 0:
        out.add("STRUCT_MAX_NM_SIZE")
    if c.max_encapsulated_dsm_count < 1:
        out.add("STRUCT_MAX_DSM_COUNT")
    return out


def test_default_config_is_valid():
    assert validate_structural(PublisherConfig()) == []


def test_keepalive_shorter_than_interval():
    cfg = PublisherConfig(keepalive_enabled=True, keepalive_time=5_000, publishing_interval=10_000)
    diags = validate_structural(cfg)
    assert [d.rule_id for d in diags] == ["STRUCT_KEEPALIVE_LT_INTERVAL"]
    assert diags[0].severity is Severity.ERROR


def test_kfc_zero():
    assert [d.rule_id for d in validate_structural(PublisherConfig(key_frame_count=0))] == ["STRUCT_KFC_MIN"]


def test_keepalive_equal_to_interval_is_fine():
    cfg = PublisherConfig(keepalive_enabled=True, keepalive_time=10_000, publishing_interval=10_000)
    assert validate_structural(cfg) == []


@pytest.mark.parametrize(
    "kfc, interval, period", [(1, 10_000, 10_000), (8, 10_000, 80_000), (3, 500, 1_500)]
)
def test_effective_key_frame_period(kfc, interval, period):
    cfg = PublisherConfig(key_frame_count=kfc, publishing_interval=interval)
    assert effective_key_frame_period(cfg) == period


@given(configs)
def test_structural_matches_invariants(cfg):
    diags = validate_structural(cfg)
    assert {d.rule_id for d in diags} == expected_violations(cfg)
    assert len(diags) == len({d.rule_id for d in diags})
    assert all(d.severity is Severity.ERROR for d in diags)
    assert validate_structural(cfg) == diags
    if not diags:
        assert effective_key_frame_period(cfg) >= cfg.publishing_interval


@given(configs)
def test_document_round_trip(cfg):
    assert load_config(dump_config(cfg)) == cfg


def test_rule_ids_come_from_registry():
    registry = rule_registry()
    for rid in registry:
        assert registry[rid].rationale
    for cfg in (PublisherConfig(key_frame_count=0, dsm_type=DsmKind.KEEPALIVE),):
        for d in validate_structural(cfg):
            assert d.rule_id in registry


def test_ordering_codes():
    assert [int(o) for o in DatasetOrdering] == [1, 2, 3]
    assert DatasetOrdering.parse("AscendingWriterIDSingle") is DatasetOrdering.ASCENDING_WRITER_ID_SINGLE
    assert DatasetOrdering.parse(1) is DatasetOrdering.UNDEFINED
    with pytest.raises(ValueError):
        DatasetOrdering.parse("Descending")


def test_transport_for_each_encoding():
    assert TRANSPORT_FOR[Encoding.UADP] is TransportProfile.UDP_UADP
    assert TRANSPORT_FOR[Encoding.JSON] is TransportProfile.BROKER_JSON


def _doc(**changes) -> str:
    d = config_to_dict(PublisherConfig())
    d.update(changes)
    return json.dumps(d)


@pytest.mark.parametrize(
    "field, value",
    [
        ("dsm_type", "Urgent"),
        ("key_frame_count", "8"),
        ("cyclic_dataset", 1),
        ("dataset_ordering", "Random"),
        ("encoding", "XML"),
    ],
)
def test_bad_field_is_named(field, value):
    with pytest.raises(ConfigError) as info:
        load_config(_doc(**{field: value}))
    assert info.value.field == field


def test_missing_and_unknown_fields():
    d = config_to_dict(PublisherConfig())
    del d["keepalive_time"]
    with pytest.raises(ConfigError) as info:
        load_config(json.dumps(d))
    assert info.value.field == "keepalive_time"
    with pytest.raises(ConfigError) as info:
        load_config(_doc(message_receive_timeout=5))
    assert info.value.field == "message_receive_timeout"


def test_syntax_error_reports_line():
    text = dump_config(PublisherConfig()).replace('"cyclic_dataset": true', '"cyclic_dataset": tru')
    with pytest.raises(ConfigError) as info:
        load_config(text)
    assert info.value.line == 4


def test_delta_views():
    both = PublisherConfig(dsm_type=DsmKind.DELTA_FRAME, enable_delta_frames=True, key_frame_count=8)
    flag_only = PublisherConfig(enable_delta_frames=True)
    assert both.delta_active and both.delta_requested
    assert not flag_only.delta_active and flag_only.delta_requested
