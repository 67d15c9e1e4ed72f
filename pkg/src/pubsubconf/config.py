"""Publisher-side PubSub configuration model and structural validation.

Durations are integer microseconds throughout.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Any


class DsmKind(enum.Enum):
    KEY_FRAME = "KeyFrame"
    DELTA_FRAME = "DeltaFrame"
    EVENT = "Event"
    KEEPALIVE = "KeepAlive"
    CHUNK = "Chunk"


class DatasetOrdering(enum.IntEnum):
    UNDEFINED = 1
    ASCENDING_WRITER_ID = 2
    ASCENDING_WRITER_ID_SINGLE = 3

    @property
    def label(self) -> str:
        return {1: "Undefined", 2: "AscendingWriterID", 3: "AscendingWriterIDSingle"}[self.value]

    @classmethod
    def parse(cls, raw: Any) -> DatasetOrdering:
        if isinstance(raw, bool):
            raise ValueError(f"invalid dataset ordering {raw!r}")
        if isinstance(raw, int) or (isinstance(raw, str) and raw.strip().isdigit()):
            return cls(int(raw))
        for member in cls:
            if member.label == raw:
                return member
        raise ValueError(f"invalid dataset ordering {raw!r}")


class Encoding(enum.Enum):
    UADP = "UADP"
    JSON = "JSON"


class TransportProfile(enum.Enum):
    UDP_UADP = "UdpUadp"
    BROKER_JSON = "BrokerJson"


TRANSPORT_FOR = {Encoding.UADP: TransportProfile.UDP_UADP, Encoding.JSON: TransportProfile.BROKER_JSON}


class Severity(enum.Enum):
    ERROR = "Error"
    WARNING = "Warning"
    INFO = "Info"


@dataclass(frozen=True)
class Rule:
    rule_id: str
    severity: Severity
    subject: tuple[str, ...]
    trigger: str
    rationale: str


@lru_cache(maxsize=1)
def rule_registry() -> dict[str, Rule]:
    """All diagnostics this package can emit, keyed by rule id (``data/rules.csv``)."""
    text = resources.files("pubsubconf").joinpath("data/rules.csv").read_text(encoding="utf-8")
    rules = {}
    for row in csv.DictReader(io.StringIO(text)):
        rules[row["rule_id"]] = Rule(
            rule_id=row["rule_id"],
            severity=Severity(row["severity"]),
            subject=tuple(row["subject"].split()),
            trigger=row["trigger"],
            rationale=row["rationale"],
        )
    return rules


@dataclass(frozen=True)
class Diagnostic:
    rule_id: str
    severity: Severity
    subject: tuple[str, ...]
    message: str

    def __str__(self) -> str:
        return f"{self.severity.value:<7} {self.rule_id}: {self.message}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "rule_id": self.rule_id,
            "severity": self.severity.value,
            "subject": list(self.subject),
            "message": self.message,
        }


def make_diagnostic(rule_id: str, detail: str = "") -> Diagnostic:
    rule = rule_registry()[rule_id]
    message = f"{detail} -- {rule.rationale}" if detail else rule.rationale
    return Diagnostic(rule.rule_id, rule.severity, rule.subject, message)


@dataclass(frozen=True)
class PublisherConfig:
    """Writer-group level publisher configuration.

    ``enable_delta_frames`` is the stack-level switch and ``dsm_type`` the
    message-level view of the same choice; the writer only produces delta
    frames when both say so (see :attr:`delta_active`).
    """

    dsm_type: DsmKind = DsmKind.KEY_FRAME
    key_frame_count: int = 1
    cyclic_dataset: bool = True
    enable_delta_frames: bool = False
    keepalive_enabled: bool = False
    keepalive_time: int = 40_000
    publishing_interval: int = 10_000
    encoding: Encoding = Encoding.UADP
    transport_profile: TransportProfile = TransportProfile.UDP_UADP
    dataset_ordering: DatasetOrdering = DatasetOrdering.ASCENDING_WRITER_ID
    max_network_message_size: int = 1472
    max_encapsulated_dsm_count: int = 32

    @property
    def delta_active(self) -> bool:
        return self.dsm_type is DsmKind.DELTA_FRAME and self.enable_delta_frames

    @property
    def delta_requested(self) -> bool:
        """Either view asks for delta frames (used by the guideline audit)."""
        return self.dsm_type is DsmKind.DELTA_FRAME or self.enable_delta_frames

    def replace(self, **changes: Any) -> PublisherConfig:
        return dataclasses.replace(self, **changes)


def validate_structural(cfg: PublisherConfig) -> list[Diagnostic]:
    """Check the configuration's internal consistency, independent of traffic."""
    out: list[Diagnostic] = []
    if cfg.dsm_type is DsmKind.KEEPALIVE:
        out.append(make_diagnostic("STRUCT_KEEPALIVE_AS_TYPE"))
    if cfg.key_frame_count < 1:
        out.append(make_diagnostic("STRUCT_KFC_MIN", f"key_frame_count={cfg.key_frame_count}"))
    if cfg.publishing_interval <= 0:
        out.append(
            make_diagnostic("STRUCT_INTERVAL_POSITIVE", f"publishing_interval={cfg.publishing_interval}")
        )
    if cfg.keepalive_enabled and cfg.keepalive_time < cfg.publishing_interval:
        out.append(
            make_diagnostic(
                "STRUCT_KEEPALIVE_LT_INTERVAL",
                f"keepalive_time={cfg.keepalive_time}us < publishing_interval={cfg.publishing_interval}us",
            )
        )
    if (cfg.dsm_type is DsmKind.DELTA_FRAME) != cfg.enable_delta_frames:
        out.append(
            make_diagnostic(
                "STRUCT_DELTA_FLAG_MISMATCH",
                f"dsm_type={cfg.dsm_type.value}, enable_delta_frames={cfg.enable_delta_frames}",
            )
        )
    if cfg.enable_delta_frames and not cfg.cyclic_dataset:
        out.append(make_diagnostic("STRUCT_DELTA_REQUIRES_CYCLIC"))
    if cfg.dsm_type is DsmKind.EVENT and (cfg.cyclic_dataset or cfg.enable_delta_frames):
        out.append(
            make_diagnostic(
                "STRUCT_EVENT_FLAGS",
                f"cyclic_dataset={cfg.cyclic_dataset}, enable_delta_frames={cfg.enable_delta_frames}",
            )
        )
    if TRANSPORT_FOR[cfg.encoding] is not cfg.transport_profile:
        out.append(
            make_diagnostic(
                "STRUCT_ENCODING_TRANSPORT",
                f"encoding={cfg.encoding.value}, transport_profile={cfg.transport_profile.value}",
            )
        )
    if cfg.max_network_message_size <= 0:
        out.append(make_diagnostic("STRUCT_MAX_NM_SIZE"))
    if cfg.max_encapsulated_dsm_count < 1:
        out.append(make_diagnostic("STRUCT_MAX_DSM_COUNT"))
    return out


def effective_key_frame_period(cfg: PublisherConfig) -> int:
    return cfg.key_frame_count * cfg.publishing_interval


# -- document format -----------------------------------------------------------------


class ConfigError(ValueError):
    def __init__(self, message: str, *, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(PublisherConfig)}
_ENUM_FIELDS = {
    "dsm_type": DsmKind,
    "encoding": Encoding,
    "transport_profile": TransportProfile,
}
_BOOL_FIELDS = {"cyclic_dataset", "enable_delta_frames", "keepalive_enabled"}


def config_to_dict(cfg: PublisherConfig) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for name in _FIELD_TYPES:
        value = getattr(cfg, name)
        if name == "dataset_ordering":
            out[name] = value.label
        elif isinstance(value, enum.Enum):
            out[name] = value.value
        else:
            out[name] = value
    return out


def config_from_dict(doc: dict[str, Any]) -> PublisherConfig:
    """Build a config from a mapping; every field is required, unknown keys rejected."""
    if not isinstance(doc, dict):
        raise ConfigError("configuration document must be an object")
    unknown = sorted(set(doc) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError("unknown field", field=unknown[0])
    kwargs: dict[str, Any] = {}
    for name in _FIELD_TYPES:
        if name not in doc:
            raise ConfigError("missing field", field=name)
        raw = doc[name]
        try:
            if name in _ENUM_FIELDS:
                kwargs[name] = _ENUM_FIELDS[name](raw)
            elif name == "dataset_ordering":
                kwargs[name] = DatasetOrdering.parse(raw)
            elif name in _BOOL_FIELDS:
                if not isinstance(raw, bool):
                    raise ValueError(f"expected true/false, got {raw!r}")
                kwargs[name] = raw
            else:
                if isinstance(raw, bool) or not isinstance(raw, int):
                    raise ValueError(f"expected integer, got {raw!r}")
                kwargs[name] = raw
        except ValueError as exc:
            raise ConfigError(str(exc), field=name) from None
    return PublisherConfig(**kwargs)


def dump_config(cfg: PublisherConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2) + "\n"


def load_config(text: str) -> PublisherConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, line=exc.lineno) from None
    return config_from_dict(doc)
