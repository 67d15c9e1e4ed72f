from __future__ import annotations

import math
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import desync_of_pattern
from pubsubconf.config import TRANSPORT_FOR, DatasetOrdering, DsmKind, Encoding, PublisherConfig
from pubsubconf.pipeline import Always, Bernoulli, DataSetDefinition, EventArrivals, Never
from pubsubconf.sim import (
    METRIC_COLUMNS,
    UNDETECTED,
    FlowScenario,
    LinkModel,
    compare,
    detection_value,
    run_scenario,
)
from pubsubconf.traffic import TrafficType

KEY = PublisherConfig()
DELTA = PublisherConfig(dsm_type=DsmKind.DELTA_FRAME, enable_delta_frames=True, key_frame_count=8,
                        keepalive_enabled=True)
EVENT = PublisherConfig(dsm_type=DsmKind.EVENT, cyclic_dataset=False, keepalive_enabled=True,
                        dataset_ordering=DatasetOrdering.ASCENDING_WRITER_ID_SINGLE)
ALWAYS8 = DataSetDefinition("d", 1, (4,) * 8, Always())


def flow(cfg=KEY, datasets=(ALWAYS8,), link=LinkModel(), ticks=200, **kw) -> FlowScenario:
    return FlowScenario("f", tuple(datasets), cfg, TrafficType.COMMAND_CYCLE, link, ticks, **kw)


def test_lossless_keyframe_baseline():
    m = run_scenario(flow(link=LinkModel(latency=250)))
    assert m.desync_ticks == 0 and m.lost_nm_count == 0
    assert m.mean_update_latency == 250 and m.p99_update_latency == 250
    assert m.nm_count == m.dsm_count == 200
    assert m.bytes_on_wire == 200 * (26 + 10 + 32)
    assert m.failure_detection_time is None


def test_no_desync_without_delta_even_under_loss():
    m = run_scenario(flow(link=LinkModel(loss_probability=0.3, seed=4), ticks=2000))
    assert m.lost_nm_count > 0 and m.desync_ticks == 0


@pytest.mark.parametrize("k", range(1, 8))
def test_forced_delta_loss_position(k):
    drop = 16 + k
    m = run_scenario(flow(DELTA, link=LinkModel(forced_drops={drop}), ticks=40))
    assert m.desync_ticks == 7 - k
    assert m.desync_ticks == desync_of_pattern([i != drop for i in range(40)], 8)
    assert m.lost_delta_count == 1


def test_forced_keyframe_loss_costs_a_full_cycle():
    m = run_scenario(flow(DELTA, link=LinkModel(forced_drops={16}), ticks=40))
    assert m.desync_ticks == 7


@given(st.sets(st.integers(0, 63), max_size=12))
@settings(max_examples=60, deadline=None)
def test_desync_matches_state_machine_for_any_loss_set(drops):
    m = run_scenario(flow(DELTA, link=LinkModel(forced_drops=drops), ticks=64))
    assert m.desync_ticks == desync_of_pattern([i not in drops for i in range(64)], 8)


def test_open_desync_counts_to_end():
    m = run_scenario(flow(DELTA, link=LinkModel(forced_drops={33}), ticks=36))
    assert m.desync_ticks == 36 - 34


def test_loss_is_paired_and_monotone():
    lost = [
        run_scenario(flow(link=LinkModel(loss_probability=p, seed=3), ticks=3000)).lost_nm_count
        for p in (0.0, 0.01, 0.05, 0.2, 0.5)
    ]
    assert lost == sorted(lost) and lost[0] == 0


def test_same_seed_same_metrics():
    s = flow(DELTA, datasets=(DataSetDefinition("d", 1, (4,) * 8, Bernoulli(0.3)),),
             link=LinkModel(loss_probability=0.05, seed=8), ticks=3000, seed=8)
    assert run_scenario(s) == run_scenario(s)
    assert run_scenario(s) != run_scenario(s.with_seed(9))


def test_detection_by_cyclic_deadline():
    m = run_scenario(flow(link=LinkModel(latency=100), ticks=100, halt_at=505_000))
    # last frame at 500 ms arrives at 500.1 ms and the next is expected one interval later
    assert m.failure_detection_time == 500_100 + 10_000 - 505_000


def test_detection_by_keepalive_for_events():
    m = run_scenario(flow(EVENT, datasets=(DataSetDefinition("e", 1, (4,), Never()),),
                          ticks=100, halt_at=505_000))
    # keepalives at 40 ms steps; the last one before the halt is at 480 ms
    assert m.failure_detection_time == 480_100 + 40_000 - 505_000


def test_event_without_keepalive_is_undetected():
    cfg = EVENT.replace(keepalive_enabled=False)
    m = run_scenario(flow(cfg, datasets=(DataSetDefinition("e", 1, (4,), EventArrivals(50_000)),),
                          ticks=100, halt_at=505_000))
    assert m.failure_detection_time == UNDETECTED
    assert math.isinf(detection_value(m))


def test_keepalive_bytes_counted():
    m = run_scenario(flow(EVENT, datasets=(DataSetDefinition("e", 1, (4,), Never()),), ticks=100))
    assert m.keepalive_bytes == m.bytes_on_wire == 24 * 36


def test_update_latency_includes_event_slip():
    cfg = EVENT
    m = run_scenario(flow(cfg, datasets=(DataSetDefinition("e", 1, (4,), EventArrivals(30_000)),),
                          link=LinkModel(latency=100), ticks=3000))
    assert 100 < m.mean_update_latency < 100 + cfg.publishing_interval
    assert m.update_latency_std > 0


def test_json_costs_more_on_the_wire():
    base = flow(ticks=500)
    json = KEY.replace(encoding=Encoding.JSON, transport_profile=TRANSPORT_FOR[Encoding.JSON])
    cmp = compare(KEY, json, base)
    assert cmp.ratios["bytes_on_wire"] > 1
    assert cmp.ratios["nm_count"] == 1.0
    assert set(cmp.ratios) == set(METRIC_COLUMNS) - {"flow_id"}


def test_invalid_config_refused():
    with pytest.raises(ValueError):
        run_scenario(flow(KEY.replace(key_frame_count=0)))


def test_scenario_and_link_validation():
    with pytest.raises(ValueError):
        LinkModel(loss_probability=1.0)
    with pytest.raises(ValueError):
        flow(ticks=0)
    with pytest.raises(ValueError):
        flow(datasets=())


def test_with_seed_moves_both_streams():
    s = flow().with_seed(42)
    assert s.seed == 42 and s.link.seed == 42
    assert replace(s, seed=1).link.seed == 42


def test_metrics_row_formatting():
    row = run_scenario(flow(ticks=10)).as_row()
    assert row["mean_update_latency"] == "100.000"
    assert row["failure_detection_time"] == "n/a"
    assert list(row) == list(METRIC_COLUMNS)
