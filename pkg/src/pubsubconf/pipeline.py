"""Publisher-side message generation: datasets -> DataSetMessages -> NetworkMessages.

Sizes come from a parametric :class:`SizeModel`, not a byte-exact UADP
encoder. Times are integer microseconds; a "tick" is the start of a
publishing interval.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator, Union

import numpy as np

from .config import DatasetOrdering, DsmKind, Encoding, PublisherConfig


class ContractViolation(RuntimeError):
    """A caller broke a documented precondition."""


class OversizeDsmError(ValueError):
    """A single DataSetMessage does not fit in MaxNetworkMessageSize."""

    rule_id = "OVERSIZE_DSM"


class SizeModelError(ValueError):
    pass


# -- change models -------------------------------------------------------------------


@dataclass(frozen=True)
class Always:
    """Every field changes every interval."""


@dataclass(frozen=True)
class Never:
    """Nothing ever changes."""


@dataclass(frozen=True)
class Bernoulli:
    """Each field changes independently with probability ``p`` per interval."""

    p: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")


@dataclass(frozen=True)
class EventArrivals:
    """Poisson state changes, ``mean_interarrival`` microseconds apart on average.

    Each arrival touches one uniformly chosen field.
    """

    mean_interarrival: float

    def __post_init__(self) -> None:
        if self.mean_interarrival <= 0:
            raise ValueError("mean_interarrival must be positive")


ChangeModel = Union[Always, Never, Bernoulli, EventArrivals]


@dataclass(frozen=True)
class DataSetDefinition:
    """A dataset published by one DataSetWriter.

    ``publishing_interval`` of ``None`` inherits the writer group's interval.
    ``source_jitter`` delays each periodic source update by a uniform offset
    in ``[0, source_jitter)`` us after its nominal instant; an update that
    lands after the tick becomes visible one tick later. ``variable_size``
    adds ``0..variable_size`` bytes to every full-frame sample (strings,
    variable arrays).
    """

    dataset_id: str
    writer_id: int
    field_sizes: tuple[int, ...]
    change_model: ChangeModel = Always()
    publishing_interval: int | None = None
    source_jitter: int = 0
    variable_size: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "field_sizes", tuple(self.field_sizes))
        if self.writer_id < 1:
            raise ValueError("writer_id must be positive")
        if not self.field_sizes:
            raise ValueError("a dataset needs at least one field")
        if any(s <= 0 for s in self.field_sizes):
            raise ValueError("field sizes must be positive")
        if self.publishing_interval is not None and self.publishing_interval <= 0:
            raise ValueError("publishing_interval must be positive")
        if self.source_jitter < 0 or self.variable_size < 0:
            raise ValueError("source_jitter and variable_size must be >= 0")

    @property
    def field_count(self) -> int:
        return len(self.field_sizes)

    def interval(self, cfg: PublisherConfig) -> int:
        return self.publishing_interval or cfg.publishing_interval


@dataclass(frozen=True)
class SizeModel:
    """Byte costs of each NetworkMessage component.

    Only ``delta_field_index`` has a normative basis (2 bytes per changed
    field); the rest are adjustable stand-ins for the header layouts.
    """

    nm_header: int = 16
    group_header: int = 8
    payload_header_base: int = 2
    payload_header_per_dsm: int = 2
    dsm_header: int = 8
    delta_field_index: int = 2
    json_per_field_overhead: int = 8
    json_field_name_len: int = 12
    chunk_header: int = 8
    chunk_max_payload: int = 1024

    def __post_init__(self) -> None:
        for name, value in self.__dict__.items():
            if value < 0:
                raise SizeModelError(f"{name} must be >= 0")

    @property
    def nm_fixed(self) -> int:
        return self.nm_header + self.group_header + self.payload_header_base


DEFAULT_SIZE_MODEL = SizeModel()


@dataclass(frozen=True)
class DataSetMessage:
    """One DataSetMessage.

    ``created_at`` is the tick (us) at which the writer produced it,
    ``ready_at`` the instant its content became available (drives Undefined
    ordering) and ``source_time`` the instant of the oldest source change it
    reports (update-latency origin).
    """

    kind: DsmKind
    writer_id: int
    sequence_number: int
    field_count: int
    value_bytes: int
    payload_bytes: int
    created_at: int
    ready_at: int
    source_time: int
    changed_field_indices: tuple[int, ...] = ()
    chunk_index: int = 0
    chunk_count: int = 1
    overhead_bytes: int = 0

    def json_payload_bytes(self, model: SizeModel) -> int:
        per_field = model.json_per_field_overhead + model.json_field_name_len
        return self.value_bytes + self.field_count * per_field


@dataclass(frozen=True)
class NetworkMessage:
    dsm_list: tuple[DataSetMessage, ...]
    encoding: Encoding
    wire_bytes: int
    emitted_at: int

    @property
    def payload_bytes(self) -> int:
        return sum(d.payload_bytes for d in self.dsm_list)

    @property
    def writer_ids(self) -> tuple[int, ...]:
        return tuple(d.writer_id for d in self.dsm_list)


def _dsm_cost(dsm: DataSetMessage, encoding: Encoding, model: SizeModel) -> int:
    payload = dsm.payload_bytes if encoding is Encoding.UADP else dsm.json_payload_bytes(model)
    return model.payload_header_per_dsm + model.dsm_header + dsm.overhead_bytes + payload


def _size_of(dsms: Iterable[DataSetMessage], encoding: Encoding, model: SizeModel) -> int:
    return model.nm_fixed + sum(_dsm_cost(d, encoding, model) for d in dsms)


def encoded_size(nm: NetworkMessage, model: SizeModel = DEFAULT_SIZE_MODEL) -> int:
    """Wire size of ``nm`` under ``model``.

    UADP: fixed NM headers + per-DSM payload-header entry + DSM header +
    payload. JSON replaces each DSM payload with its values plus a field
    name and structural overhead per field (no binary field index).
    """
    return _size_of(nm.dsm_list, nm.encoding, model)


def chunk_segment(dsm: DataSetMessage, model: SizeModel = DEFAULT_SIZE_MODEL) -> list[DataSetMessage]:
    if dsm.kind is not DsmKind.CHUNK:
        raise ContractViolation("only Chunk messages can be segmented")
    if model.chunk_max_payload <= 0:
        raise SizeModelError("chunk_max_payload must be positive to segment chunks")
    total = dsm.payload_bytes
    count = max(1, math.ceil(total / model.chunk_max_payload))
    out = []
    for i in range(count):
        size = min(model.chunk_max_payload, total - i * model.chunk_max_payload)
        out.append(
            replace(
                dsm,
                field_count=1 if size else 0,
                value_bytes=size,
                payload_bytes=size,
                chunk_index=i,
                chunk_count=count,
                overhead_bytes=model.chunk_header,
            )
        )
    return out


def assemble(
    dsms: Iterable[DataSetMessage],
    cfg: PublisherConfig,
    model: SizeModel = DEFAULT_SIZE_MODEL,
) -> list[NetworkMessage]:
    """Pack the DSMs ready at one writer-group tick into NetworkMessages.

    ``dsms`` must be in readiness order; Undefined ordering keeps that order
    (ties broken by writer id), the AscendingWriterID variants sort by writer.
    """
    items: list[DataSetMessage] = []
    for d in dsms:
        if d.kind is DsmKind.CHUNK and d.chunk_count == 1 and d.overhead_bytes == 0:
            items.extend(chunk_segment(d, model))
        else:
            items.append(d)
    if not items:
        return []

    if cfg.dataset_ordering is DatasetOrdering.UNDEFINED:
        items.sort(key=lambda d: (d.ready_at, d.writer_id))
    else:
        items.sort(key=lambda d: d.writer_id)

    enc = cfg.encoding
    limit = cfg.max_network_message_size
    for d in items:
        if _size_of((d,), enc, model) > limit:
            raise OversizeDsmError(
                f"DSM of writer {d.writer_id} needs {_size_of((d,), enc, model)} bytes "
                f"> max_network_message_size={limit}"
            )

    emitted = items[0].created_at
    if cfg.dataset_ordering is DatasetOrdering.ASCENDING_WRITER_ID_SINGLE:
        groups = [[d] for d in items]
    else:
        groups = []
        current: list[DataSetMessage] = []
        size = model.nm_fixed
        for d in items:
            cost = _dsm_cost(d, enc, model)
            if current and (len(current) >= cfg.max_encapsulated_dsm_count or size + cost > limit):
                groups.append(current)
                current, size = [], model.nm_fixed
            current.append(d)
            size += cost
        groups.append(current)
    return [NetworkMessage(tuple(g), enc, _size_of(g, enc, model), emitted) for g in groups]


# -- writers -------------------------------------------------------------------------


@dataclass
class WriterState:
    """Mutable per-writer state owned by one publisher."""

    writer_id: int
    sequence_number: int = 1  # next data sequence number
    last_emit_time: int = 0
    last_tick: int | None = None
    deferred: list[tuple[int, frozenset[int]]] = field(default_factory=list)
    next_arrival: float | None = None


def _visible_updates(
    defn: DataSetDefinition, state: WriterState, tick: int, interval: int, rng: np.random.Generator
) -> list[tuple[int, frozenset[int]]]:
    """Source updates that became visible in (previous tick, tick]."""
    model = defn.change_model
    F = defn.field_count
    if isinstance(model, Never):
        return []
    if isinstance(model, EventArrivals):
        if state.next_arrival is None:
            state.next_arrival = float(rng.exponential(model.mean_interarrival))
        out = []
        while state.next_arrival <= tick:
            out.append((int(math.ceil(state.next_arrival)), frozenset((int(rng.integers(F)),))))
            state.next_arrival += float(rng.exponential(model.mean_interarrival))
        return out

    if isinstance(model, Always):
        fields = frozenset(range(F))
    else:
        fields = frozenset(np.flatnonzero(rng.random(F) < model.p).tolist())
    offset = int(rng.integers(defn.source_jitter)) if defn.source_jitter > 0 else 0

    out = state.deferred
    state.deferred = []
    if fields:
        if offset == 0:
            out.append((tick, fields))
        else:
            state.deferred.append((tick + offset, fields))
    return out


@lru_cache(maxsize=256)
def _size_array(sizes: tuple[int, ...]) -> np.ndarray:
    return np.asarray(sizes, dtype=np.int64)


def _full_size(defn: DataSetDefinition, rng: np.random.Generator) -> int:
    extra = int(rng.integers(defn.variable_size + 1)) if defn.variable_size else 0
    return sum(defn.field_sizes) + extra


def step_writer(
    defn: DataSetDefinition,
    cfg: PublisherConfig,
    state: WriterState,
    tick: int,
    rng: np.random.Generator,
    model: SizeModel = DEFAULT_SIZE_MODEL,
) -> DataSetMessage | None:
    """Advance one writer to ``tick`` and return the DSM it emits, if any.

    Cyclic without delta: a full frame every interval. Cyclic with delta: a
    key frame when the interval index is a multiple of KeyFrameCount,
    otherwise a delta frame carrying only changed fields, or nothing. Non-
    cyclic: an Event DSM at the first tick after a change was observed.
    """
    interval = defn.interval(cfg)
    if cfg.cyclic_dataset and tick % interval:
        raise ContractViolation(
            f"tick {tick} is not aligned to writer {defn.writer_id}'s interval {interval}"
        )
    if state.last_tick is not None and tick <= state.last_tick:
        raise ContractViolation("ticks must strictly increase")
    state.last_tick = tick

    updates = _visible_updates(defn, state, tick, interval, rng)
    seq = state.sequence_number

    if cfg.cyclic_dataset:
        index = tick // interval
        if cfg.delta_active and index % cfg.key_frame_count:
            if len(updates) == 1:
                changed = sorted(updates[0][1])
            else:
                changed = sorted(set().union(*(f for _, f in updates)))
            if not changed:
                return None
            value = int(_size_array(defn.field_sizes)[changed].sum())
            if defn.variable_size and defn.field_count - 1 in changed:
                value += int(rng.integers(defn.variable_size + 1))
            dsm = DataSetMessage(
                kind=DsmKind.DELTA_FRAME,
                writer_id=defn.writer_id,
                sequence_number=seq,
                field_count=len(changed),
                value_bytes=value,
                payload_bytes=value + model.delta_field_index * len(changed),
                created_at=tick,
                ready_at=tick,
                source_time=tick,
                changed_field_indices=tuple(changed),
            )
        else:
            kind = DsmKind.CHUNK if cfg.dsm_type is DsmKind.CHUNK else DsmKind.KEY_FRAME
            value = _full_size(defn, rng)
            dsm = DataSetMessage(
                kind=kind,
                writer_id=defn.writer_id,
                sequence_number=seq,
                field_count=defn.field_count,
                value_bytes=value,
                payload_bytes=value,
                created_at=tick,
                ready_at=tick,
                source_time=tick,
            )
    else:
        if not updates:
            return None
        first = min(t for t, _ in updates)
        value = _full_size(defn, rng)
        dsm = DataSetMessage(
            kind=DsmKind.EVENT,
            writer_id=defn.writer_id,
            sequence_number=seq,
            field_count=defn.field_count,
            value_bytes=value,
            payload_bytes=value,
            created_at=tick,
            ready_at=first,
            source_time=first,
        )
    state.sequence_number += 1
    state.last_emit_time = tick
    return dsm


def emit_keepalive_if_due(
    cfg: PublisherConfig, state: WriterState, tick: int
) -> DataSetMessage | None:
    """KeepAlive when nothing was published for ``keepalive_time``.

    A KeepAlive carries the sequence number the next data message will use
    and does not consume it. Any emission, KeepAlive included, restarts the
    timer.
    """
    if not cfg.keepalive_enabled:
        raise ContractViolation("keepalive is not enabled")
    if tick - state.last_emit_time < cfg.keepalive_time:
        return None
    state.last_emit_time = tick
    return DataSetMessage(
        kind=DsmKind.KEEPALIVE,
        writer_id=state.writer_id,
        sequence_number=state.sequence_number,
        field_count=0,
        value_bytes=0,
        payload_bytes=0,
        created_at=tick,
        ready_at=tick,
        source_time=tick,
    )


def writer_rng(seed: int, writer_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(1, writer_id)))


class Publisher:
    """One writer group: its datasets, their writers and the assembly step."""

    def __init__(
        self,
        datasets: Iterable[DataSetDefinition],
        cfg: PublisherConfig,
        seed: int = 0,
        model: SizeModel = DEFAULT_SIZE_MODEL,
    ):
        self.datasets = sorted(datasets, key=lambda d: d.writer_id)
        ids = [d.writer_id for d in self.datasets]
        if len(set(ids)) != len(ids):
            raise ValueError("writer ids must be unique within a publisher")
        for d in self.datasets:
            if d.interval(cfg) % cfg.publishing_interval:
                raise ValueError(
                    f"dataset {d.dataset_id!r} interval must be a multiple of the writer group interval"
                )
        self.cfg = cfg
        self.model = model
        self.states = {d.writer_id: WriterState(d.writer_id) for d in self.datasets}
        self.rngs = {d.writer_id: writer_rng(seed, d.writer_id) for d in self.datasets}

    def tick(self, t: int) -> list[NetworkMessage]:
        ready = []
        for d in self.datasets:
            if t % d.interval(self.cfg):
                continue
            st = self.states[d.writer_id]
            dsm = step_writer(d, self.cfg, st, t, self.rngs[d.writer_id], self.model)
            if dsm is None and self.cfg.keepalive_enabled:
                dsm = emit_keepalive_if_due(self.cfg, st, t)
            if dsm is not None:
                ready.append(dsm)
        return assemble(ready, self.cfg, self.model)

    def run(self, n_ticks: int, halt_at: int | None = None) -> Iterator[tuple[int, list[NetworkMessage]]]:
        """Yield ``(tick_time, nms)`` for each writer-group tick before ``halt_at``."""
        step = self.cfg.publishing_interval
        for k in range(n_ticks):
            t = k * step
            if halt_at is not None and t >= halt_at:
                return
            yield t, self.tick(t)


TRACE_COLUMNS = ("tick", "writer_id", "kind", "payload_bytes", "wire_bytes", "nm_index")


def trace_rows(ticks: Iterable[tuple[int, list[NetworkMessage]]]) -> Iterator[tuple]:
    nm_index = 0
    for t, nms in ticks:
        for nm in nms:
            for d in nm.dsm_list:
                yield (t, d.writer_id, d.kind.value, d.payload_bytes, nm.wire_bytes, nm_index)
            nm_index += 1


def write_trace(path: str | Path, ticks: Iterable[tuple[int, list[NetworkMessage]]]) -> int:
    """Write the per-DSM trace CSV; returns the number of rows."""
    n = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for row in trace_rows(ticks):
            w.writerow(row)
            n += 1
    return n
