"""Scenario documents (JSON) and metrics export.

See ``docs/formats.md`` for the schema.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any

from .config import ConfigError, config_from_dict, load_config
from .mapping import DeltaPreference, SynthesisOptions, synthesize
from .pipeline import Always, Bernoulli, DataSetDefinition, EventArrivals, Never
from .sim import METRIC_COLUMNS, FlowScenario, LinkModel, SimMetrics
from .traffic import TrafficType, builtin_spec


class ScenarioError(ValueError):
    pass


def _change_model(doc: dict[str, Any]):
    kind = doc.get("kind")
    if kind == "always":
        return Always()
    if kind == "never":
        return Never()
    if kind == "bernoulli":
        return Bernoulli(float(doc["p"]))
    if kind == "event_arrivals":
        return EventArrivals(float(doc["mean_interarrival_us"]))
    raise ScenarioError(f"unknown change model {kind!r}")


def _change_model_doc(model) -> dict[str, Any]:
    if isinstance(model, Always):
        return {"kind": "always"}
    if isinstance(model, Never):
        return {"kind": "never"}
    if isinstance(model, Bernoulli):
        return {"kind": "bernoulli", "p": model.p}
    return {"kind": "event_arrivals", "mean_interarrival_us": model.mean_interarrival}


def _dataset(doc: dict[str, Any]) -> DataSetDefinition:
    sizes = doc.get("field_sizes")
    if sizes is None:
        sizes = [int(doc["field_size"])] * int(doc["field_count"])
    return DataSetDefinition(
        dataset_id=str(doc["dataset_id"]),
        writer_id=int(doc["writer_id"]),
        field_sizes=tuple(int(s) for s in sizes),
        change_model=_change_model(doc.get("change_model", {"kind": "always"})),
        publishing_interval=doc.get("publishing_interval_us"),
        source_jitter=int(doc.get("source_jitter_us", 0)),
        variable_size=int(doc.get("variable_size", 0)),
    )


def _options(doc: dict[str, Any]) -> SynthesisOptions:
    doc = dict(doc)
    if "delta_preference" in doc:
        doc["delta_preference"] = DeltaPreference(doc["delta_preference"])
    if "publishing_interval_us" in doc:
        doc["publishing_interval"] = doc.pop("publishing_interval_us")
    try:
        return SynthesisOptions(**doc)
    except TypeError as exc:
        raise ScenarioError(f"bad synthesis options: {exc}") from None


def flow_from_dict(doc: dict[str, Any], *, seed: int, base_dir: Path | None = None) -> FlowScenario:
    try:
        traffic = TrafficType.lookup(doc["traffic"])
        options = _options(doc["synthesize"]) if "synthesize" in doc else None
        if "config" in doc:
            cfg = config_from_dict(doc["config"])
        elif "config_ref" in doc:
            path = Path(doc["config_ref"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            cfg = load_config(path.read_text(encoding="utf-8"))
        elif options is not None:
            cfg = synthesize(builtin_spec(traffic), options)
        else:
            raise ScenarioError(f"flow {doc.get('flow_id')!r} has no config, config_ref or synthesize")
        link_doc = doc.get("link", {})
        link = LinkModel(
            latency=int(link_doc.get("latency_us", 100)),
            loss_probability=float(link_doc.get("loss_probability", 0.0)),
            seed=seed,
            forced_drops=frozenset(link_doc.get("forced_drops", ())),
        )
        return FlowScenario(
            flow_id=str(doc["flow_id"]),
            datasets=tuple(_dataset(d) for d in doc["datasets"]),
            config=cfg,
            traffic=traffic,
            link=link,
            duration_ticks=int(doc["duration_ticks"]),
            seed=seed,
            halt_at=doc.get("halt_at_us"),
            publisher=doc.get("publisher", ""),
            subscriber=doc.get("subscriber", ""),
            purpose=doc.get("purpose", ""),
            synthesis=options,
        )
    except KeyError as exc:
        raise ScenarioError(f"missing key {exc.args[0]!r}") from None
    except ConfigError as exc:
        raise ScenarioError(f"flow {doc.get('flow_id')!r}: {exc}") from None


def load_scenarios(
    text: str, *, seed: int | None = None, base_dir: Path | None = None
) -> list[FlowScenario]:
    """Parse a scenario document. ``seed`` overrides the document's seed."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno}: {exc.msg}") from None
    if "flows" not in doc:
        doc = {"flows": [doc], "seed": doc.get("seed", 0)}
    base_seed = int(doc.get("seed", 0)) if seed is None else seed
    return [flow_from_dict(f, seed=base_seed, base_dir=base_dir) for f in doc["flows"]]


def dataset_to_dict(d: DataSetDefinition) -> dict[str, Any]:
    return {
        "dataset_id": d.dataset_id,
        "writer_id": d.writer_id,
        "field_sizes": list(d.field_sizes),
        "change_model": _change_model_doc(d.change_model),
        "publishing_interval_us": d.publishing_interval,
        "source_jitter_us": d.source_jitter,
        "variable_size": d.variable_size,
    }


def metrics_csv(rows: list[SimMetrics], scenarios: list[FlowScenario] | None = None) -> str:
    out = io.StringIO()
    extra = ("publisher", "subscriber", "traffic") if scenarios else ()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(METRIC_COLUMNS[:1] + extra + METRIC_COLUMNS[1:])
    for i, m in enumerate(rows):
        r = m.as_row()
        head = [r["flow_id"]]
        if scenarios:
            s = scenarios[i]
            head += [s.publisher, s.subscriber, s.traffic.label]
        w.writerow(head + [r[c] for c in METRIC_COLUMNS[1:]])
    return out.getvalue()


def metrics_summary(rows: list[SimMetrics], seed: int) -> dict[str, Any]:
    return {
        "seed": seed,
        "flows": len(rows),
        "bytes_on_wire": sum(m.bytes_on_wire for m in rows),
        "nm_count": sum(m.nm_count for m in rows),
        "dsm_count": sum(m.dsm_count for m in rows),
        "desync_ticks": sum(m.desync_ticks for m in rows),
        "keepalive_bytes": sum(m.keepalive_bytes for m in rows),
        "per_flow": {m.flow_id: m.as_row() for m in rows},
    }
