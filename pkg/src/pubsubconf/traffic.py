"""Industrial automation traffic types and flow classification.

The built-in catalog is shipped as ``data/traffic_catalog.csv`` and is the
golden copy of the eleven traffic types. The CSV schema is documented in
``docs/formats.md``.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources


class TrafficType(enum.IntEnum):
    CONTROL_ISO = 1
    CONTROL_SYNC = 2
    CONTROL_ASYNC = 3
    EVENT = 4
    VOICE_VIDEO = 5
    COMMAND_CYCLE = 6
    COMMAND_ACYCLE = 7
    CONFIG = 8
    DIAGNOSTIC_CYCLE = 9
    DIAGNOSTIC_ACYCLE = 10
    BEST_EFFORT = 11

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def from_label(cls, label: str) -> TrafficType:
        try:
            return _BY_LABEL[label]
        except KeyError:
            raise ValueError(f"unknown traffic type name {label!r}") from None

    @classmethod
    def lookup(cls, key: str | int) -> TrafficType:
        """Resolve an id, a catalog name, or a loose CLI spelling.

        ``"event"``, ``"control-iso"``, ``"Command-Cycle"``, ``"4"`` and ``4``
        all work; ``"command-cyclic"`` is accepted as an alias for
        Command-Cycle since the use-case flow table spells it that way.
        """
        if isinstance(key, int):
            return cls(key)
        text = key.strip()
        if text.isdigit():
            return cls(int(text))
        norm = _normalise(text)
        for member, label in _LABELS.items():
            if _normalise(label) == norm or member.name.lower().replace("_", "") == norm:
                return member
        if norm.endswith("cyclic"):
            return cls.lookup(text[: -len("cyclic")] + "cycle")
        raise ValueError(f"unknown traffic type {key!r}")


def _normalise(text: str) -> str:
    return "".join(ch for ch in text.lower() if ch.isalnum())


_LABELS = {
    TrafficType.CONTROL_ISO: "Control-Iso",
    TrafficType.CONTROL_SYNC: "Control-Sync",
    TrafficType.CONTROL_ASYNC: "Control-Async",
    TrafficType.EVENT: "Event",
    TrafficType.VOICE_VIDEO: "Voice/Video",
    TrafficType.COMMAND_CYCLE: "Command-Cycle",
    TrafficType.COMMAND_ACYCLE: "Command-Acycle",
    TrafficType.CONFIG: "Config",
    TrafficType.DIAGNOSTIC_CYCLE: "Diagnostic-Cycle",
    TrafficType.DIAGNOSTIC_ACYCLE: "Diagnostic-Acycle",
    TrafficType.BEST_EFFORT: "Best-Effort",
}
_BY_LABEL = {label: member for member, label in _LABELS.items()}


class Criticality(enum.Enum):
    HIGH = "High"
    MEDIUM = "Medium"
    LOW = "Low"


class LengthConsistency(enum.Enum):
    FIXED = "Fixed"
    VARIABLE = "Variable"


class CommLevel(enum.Enum):
    C2C = "C2C"
    C2D = "C2D"
    D2CMP = "D2Cmp"


# canonical column order when serialising comm levels
_LEVEL_ORDER = (CommLevel.C2C, CommLevel.C2D, CommLevel.D2CMP)


@dataclass(frozen=True)
class FlowAttributes:
    """Observable properties of an application flow, used to classify it."""

    periodic: bool
    criticality: Criticality
    loss_tolerant: bool
    length_consistency: LengthConsistency
    comm_levels: frozenset[CommLevel]

    def __post_init__(self) -> None:
        object.__setattr__(self, "comm_levels", frozenset(self.comm_levels))
        if not self.comm_levels:
            raise ValueError("comm_levels must not be empty")


@dataclass(frozen=True)
class TrafficSpec:
    type: TrafficType
    periodic: bool
    criticality: Criticality
    loss_tolerant: bool
    length_consistency: LengthConsistency
    comm_levels: frozenset[CommLevel]

    def __post_init__(self) -> None:
        object.__setattr__(self, "comm_levels", frozenset(self.comm_levels))

    @property
    def name(self) -> str:
        return self.type.label

    def attributes(self) -> FlowAttributes:
        return FlowAttributes(
            periodic=self.periodic,
            criticality=self.criticality,
            loss_tolerant=self.loss_tolerant,
            length_consistency=self.length_consistency,
            comm_levels=self.comm_levels,
        )


class CatalogError(ValueError):
    """Raised when a catalog document violates the schema."""

    def __init__(self, message: str, *, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class DuplicateTrafficIdError(CatalogError):
    pass


CATALOG_COLUMNS = (
    "id",
    "name",
    "periodic",
    "criticality",
    "loss_tolerant",
    "length_consistency",
    "comm_levels",
)

_BOOLS = {"yes": True, "no": False}


def _parse_bool(raw: str, field: str, line: int) -> bool:
    try:
        return _BOOLS[raw.strip().lower()]
    except KeyError:
        raise CatalogError(f"expected yes/no, got {raw!r}", field=field, line=line) from None


def _parse_enum(enum_cls, raw: str, field: str, line: int):
    try:
        return enum_cls(raw.strip())
    except ValueError:
        allowed = ", ".join(m.value for m in enum_cls)
        raise CatalogError(
            f"invalid value {raw!r} (allowed: {allowed})", field=field, line=line
        ) from None


def parse_traffic_catalog(text: str) -> list[TrafficSpec]:
    """Parse a catalog CSV document into specs, in document order."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise CatalogError("empty document", line=1)
    missing = [c for c in CATALOG_COLUMNS if c not in reader.fieldnames]
    if missing:
        raise CatalogError(f"missing columns: {', '.join(missing)}", field=missing[0], line=1)
    extra = [c for c in reader.fieldnames if c not in CATALOG_COLUMNS]
    if extra:
        raise CatalogError(f"unknown columns: {', '.join(extra)}", field=extra[0], line=1)

    specs: list[TrafficSpec] = []
    seen: dict[int, int] = {}
    for row in reader:
        line = reader.line_num
        if any(v is None for v in row.values()):
            raise CatalogError("row has too few columns", line=line)
        try:
            tid = TrafficType(int(row["id"]))
        except ValueError:
            raise CatalogError(f"invalid id {row['id']!r} (1..11)", field="id", line=line) from None
        if row["name"].strip() != tid.label:
            raise CatalogError(
                f"name {row['name']!r} does not match id {int(tid)} ({tid.label})",
                field="name",
                line=line,
            )
        if int(tid) in seen:
            raise DuplicateTrafficIdError(
                f"id {int(tid)} already defined on line {seen[int(tid)]}", field="id", line=line
            )
        seen[int(tid)] = line
        levels_raw = [p for p in row["comm_levels"].split(";") if p.strip()]
        if not levels_raw:
            raise CatalogError("at least one level required", field="comm_levels", line=line)
        levels = frozenset(_parse_enum(CommLevel, p, "comm_levels", line) for p in levels_raw)
        specs.append(
            TrafficSpec(
                type=tid,
                periodic=_parse_bool(row["periodic"], "periodic", line),
                criticality=_parse_enum(Criticality, row["criticality"], "criticality", line),
                loss_tolerant=_parse_bool(row["loss_tolerant"], "loss_tolerant", line),
                length_consistency=_parse_enum(
                    LengthConsistency, row["length_consistency"], "length_consistency", line
                ),
                comm_levels=levels,
            )
        )
    return specs


def format_traffic_catalog(specs: list[TrafficSpec]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CATALOG_COLUMNS)
    for s in specs:
        writer.writerow(
            [
                int(s.type),
                s.type.label,
                "yes" if s.periodic else "no",
                s.criticality.value,
                "yes" if s.loss_tolerant else "no",
                s.length_consistency.value,
                ";".join(lv.value for lv in _LEVEL_ORDER if lv in s.comm_levels),
            ]
        )
    return out.getvalue()


def catalog_text() -> str:
    """Raw text of the shipped catalog file."""
    return resources.files("pubsubconf").joinpath("data/traffic_catalog.csv").read_text(
        encoding="utf-8"
    )


@lru_cache(maxsize=1)
def _builtin() -> tuple[TrafficSpec, ...]:
    return tuple(sorted(parse_traffic_catalog(catalog_text()), key=lambda s: s.type))


def builtin_catalog() -> list[TrafficSpec]:
    return list(_builtin())


def builtin_spec(traffic: TrafficType | str | int) -> TrafficSpec:
    tid = traffic if isinstance(traffic, TrafficType) else TrafficType.lookup(traffic)
    return _builtin()[int(tid) - 1]


def classify_flow(
    attrs: FlowAttributes, catalog: list[TrafficSpec] | None = None
) -> set[TrafficType]:
    """Return every catalog type whose characteristics match ``attrs``.

    Communication levels match on intersection: a flow declares the level it
    runs on, not every level its type can appear on. Control-Iso and
    Control-Sync share all listed characteristics, so both come back together.
    """
    specs = builtin_catalog() if catalog is None else catalog
    return {
        s.type
        for s in specs
        if s.periodic == attrs.periodic
        and s.criticality == attrs.criticality
        and s.loss_tolerant == attrs.loss_tolerant
        and s.length_consistency == attrs.length_consistency
        and s.comm_levels & attrs.comm_levels
    }
