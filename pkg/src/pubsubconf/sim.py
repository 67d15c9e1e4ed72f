"""Drive a publisher over a lossy, delayed link and measure what an observer sees.

The observer is a measurement device that knows the publisher's
configuration. It is not a configured subscriber.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Any

import numpy as np

from .config import DsmKind, PublisherConfig, validate_structural
from .mapping import SynthesisOptions
from .pipeline import DEFAULT_SIZE_MODEL, DataSetDefinition, Publisher, SizeModel
from .traffic import TrafficType

UNDETECTED = "undetected"


@dataclass(frozen=True)
class LinkModel:
    """Single logical link: constant latency, independent per-NM loss.

    ``forced_drops`` lists NetworkMessage indices (0-based, emission order)
    that are always lost, for scripted loss experiments.
    """

    latency: int = 100
    loss_probability: float = 0.0
    seed: int = 0
    forced_drops: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "forced_drops", frozenset(self.forced_drops))
        if not 0.0 <= self.loss_probability < 1.0:
            raise ValueError("loss_probability must lie in [0, 1)")
        if self.latency < 0:
            raise ValueError("latency must be >= 0")


@dataclass(frozen=True)
class FlowScenario:
    flow_id: str
    datasets: tuple[DataSetDefinition, ...]
    config: PublisherConfig
    traffic: TrafficType
    link: LinkModel
    duration_ticks: int
    seed: int = 0
    halt_at: int | None = None
    publisher: str = ""
    subscriber: str = ""
    purpose: str = ""
    synthesis: SynthesisOptions | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "datasets", tuple(self.datasets))
        if self.duration_ticks < 1:
            raise ValueError("duration_ticks must be >= 1")
        if not self.datasets:
            raise ValueError("a flow needs at least one dataset")

    def with_seed(self, seed: int) -> FlowScenario:
        return replace(self, seed=seed, link=replace(self.link, seed=seed))

    def with_config(self, cfg: PublisherConfig) -> FlowScenario:
        return replace(self, config=cfg)


@dataclass(frozen=True)
class SimMetrics:
    flow_id: str
    bytes_on_wire: int
    nm_count: int
    dsm_count: int
    mean_update_latency: float
    p99_update_latency: float
    update_latency_std: float
    desync_ticks: int
    failure_detection_time: int | str | None
    keepalive_bytes: int
    lost_nm_count: int
    lost_delta_count: int
    nm_bytes_var: float

    def as_row(self) -> dict[str, Any]:
        row = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float):
                v = f"{v:.3f}"
            elif v is None:
                v = "n/a"
            row[f.name] = v
        return row


METRIC_COLUMNS = tuple(f.name for f in fields(SimMetrics))


@dataclass
class _Watch:
    """Observer-side view of one writer."""

    interval: int
    chain_ok: bool = False
    last_seq: int | None = None
    desync_since: int | None = None  # writer tick index where desync began
    desync_ticks: int = 0
    last_rx: int | None = None
    last_key_rx: int | None = None
    chunks: dict[int, int] = field(default_factory=dict)

    def data_received(self, seq: int) -> bool:
        """Record a data sequence number; return False when a gap was seen."""
        ok = self.last_seq is not None and seq == self.last_seq + 1
        self.last_seq = seq
        return ok


def _detection_deadline(base: int, timeout: int, halt: int) -> int:
    deadline = base + timeout
    if deadline < halt:
        # the timer already expired (loss); the observer re-arms every timeout
        deadline += math.ceil((halt - deadline) / timeout) * timeout
    return deadline


def run_scenario(s: FlowScenario, model: SizeModel = DEFAULT_SIZE_MODEL) -> SimMetrics:
    """Simulate one flow; a pure function of the scenario (seeds included)."""
    cfg = s.config
    errors = validate_structural(cfg)
    if errors:
        raise ValueError(f"scenario {s.flow_id!r} config is invalid: {errors[0]}")

    pub = Publisher(s.datasets, cfg, seed=s.seed, model=model)
    link_rng = np.random.default_rng(np.random.SeedSequence(entropy=s.link.seed, spawn_key=(2,)))
    latency = s.link.latency
    p = s.link.loss_probability
    watches = {d.writer_id: _Watch(d.interval(cfg)) for d in s.datasets}
    primary = s.datasets[0].writer_id

    bytes_on_wire = nm_count = dsm_count = 0
    keepalive_bytes = lost_nm = lost_delta = 0
    latencies: list[int] = []
    primary_sizes: list[int] = []
    ka_share = model.payload_header_per_dsm + model.dsm_header

    for t, nms in pub.run(s.duration_ticks, halt_at=s.halt_at):
        for nm in nms:
            idx = nm_count
            nm_count += 1
            dsm_count += len(nm.dsm_list)
            bytes_on_wire += nm.wire_bytes
            kinds = [d.kind for d in nm.dsm_list]
            if all(k is DsmKind.KEEPALIVE for k in kinds):
                keepalive_bytes += nm.wire_bytes
            else:
                keepalive_bytes += ka_share * kinds.count(DsmKind.KEEPALIVE)
            if primary in nm.writer_ids:
                primary_sizes.append(nm.wire_bytes)

            u = link_rng.random()
            if idx in s.link.forced_drops or u < p:
                lost_nm += 1
                lost_delta += kinds.count(DsmKind.DELTA_FRAME)
                continue

            rx = t + latency
            for d in nm.dsm_list:
                w = watches[d.writer_id]
                w.last_rx = rx
                tick_index = d.created_at // w.interval
                if d.kind is DsmKind.KEEPALIVE:
                    if w.last_seq is not None and d.sequence_number != w.last_seq + 1:
                        w.chain_ok = False
                    continue
                if d.kind is DsmKind.KEY_FRAME:
                    w.data_received(d.sequence_number)
                    w.chain_ok = True
                    w.last_key_rx = rx
                    if w.desync_since is not None:
                        w.desync_ticks += tick_index - w.desync_since
                        w.desync_since = None
                    latencies.append(rx - d.source_time)
                elif d.kind is DsmKind.DELTA_FRAME:
                    in_order = w.data_received(d.sequence_number)
                    if w.chain_ok and in_order:
                        latencies.append(rx - d.source_time)
                    else:
                        w.chain_ok = False
                        if w.desync_since is None:
                            w.desync_since = tick_index
                elif d.kind is DsmKind.CHUNK:
                    got = w.chunks.get(d.sequence_number, 0) + 1
                    w.chunks[d.sequence_number] = got
                    if d.chunk_index == d.chunk_count - 1:
                        if got == d.chunk_count:
                            latencies.append(rx - d.source_time)
                        w.chunks.clear()
                    w.last_seq = d.sequence_number
                else:
                    w.data_received(d.sequence_number)
                    latencies.append(rx - d.source_time)

    end_time = s.duration_ticks * cfg.publishing_interval
    if s.halt_at is not None:
        end_time = min(end_time, s.halt_at)
    desync = 0
    for w in watches.values():
        desync += w.desync_ticks
        if w.desync_since is not None:
            end_index = -(-end_time // w.interval)
            desync += max(0, end_index - w.desync_since)

    detection: int | str | None = None
    if s.halt_at is not None:
        detection = _failure_detection(cfg, watches, s.halt_at)

    lat = np.asarray(latencies, dtype=float)
    sizes = np.asarray(primary_sizes, dtype=float)
    return SimMetrics(
        flow_id=s.flow_id,
        bytes_on_wire=bytes_on_wire,
        nm_count=nm_count,
        dsm_count=dsm_count,
        mean_update_latency=float(lat.mean()) if lat.size else 0.0,
        p99_update_latency=float(np.percentile(lat, 99)) if lat.size else 0.0,
        update_latency_std=float(lat.std()) if lat.size else 0.0,
        desync_ticks=desync,
        failure_detection_time=detection,
        keepalive_bytes=keepalive_bytes,
        lost_nm_count=lost_nm,
        lost_delta_count=lost_delta,
        nm_bytes_var=float(sizes.var()) if sizes.size else 0.0,
    )


def _failure_detection(cfg: PublisherConfig, watches: dict[int, _Watch], halt: int) -> int | str:
    """Time from the halt until the observer's first missed expectation."""
    deadlines = []
    for w in watches.values():
        last_rx = w.last_rx if w.last_rx is not None else 0
        if cfg.keepalive_enabled:
            deadlines.append(_detection_deadline(last_rx, cfg.keepalive_time, halt))
        if cfg.cyclic_dataset and not cfg.delta_active:
            deadlines.append(_detection_deadline(last_rx, w.interval, halt))
        if cfg.cyclic_dataset and cfg.delta_active:
            last_key = w.last_key_rx if w.last_key_rx is not None else 0
            deadlines.append(_detection_deadline(last_key, cfg.key_frame_count * w.interval, halt))
    if not deadlines:
        return UNDETECTED
    return min(deadlines) - halt


def detection_value(m: SimMetrics) -> float:
    """Failure-detection time as a number; undetected is +inf."""
    v = m.failure_detection_time
    if v is None:
        return float("nan")
    return math.inf if v == UNDETECTED else float(v)


@dataclass(frozen=True)
class Comparison:
    a: SimMetrics
    b: SimMetrics
    ratios: dict[str, float | None]


def _ratio(x: float, y: float) -> float | None:
    if math.isnan(x) or math.isnan(y):
        return None
    if x == y:
        return 1.0
    if x == 0 or math.isinf(x):
        return math.inf if y > x else 0.0
    return y / x


def compare(a: PublisherConfig, b: PublisherConfig, base: FlowScenario) -> Comparison:
    """Run ``base`` under both configs with identical seeds; ratios are b / a."""
    ma = run_scenario(base.with_config(a))
    mb = run_scenario(base.with_config(b))
    ratios: dict[str, float | None] = {}
    for name in METRIC_COLUMNS:
        if name == "flow_id":
            continue
        if name == "failure_detection_time":
            ratios[name] = _ratio(detection_value(ma), detection_value(mb))
        else:
            ratios[name] = _ratio(float(getattr(ma, name)), float(getattr(mb, name)))
    return Comparison(ma, mb, ratios)
