"""Traffic-aware OPC UA PubSub publisher configuration: synthesis, audit and simulation."""

from .config import (
    DatasetOrdering,
    Diagnostic,
    DsmKind,
    Encoding,
    PublisherConfig,
    Severity,
    TransportProfile,
    dump_config,
    effective_key_frame_period,
    load_config,
    rule_registry,
    validate_structural,
)
from .mapping import (
    DeltaPreference,
    GuidelineError,
    SynthesisOptions,
    audit,
    choose_ordering,
    delta_beneficial,
    guideline_table,
    resolve_dependent,
    synthesize,
)
from .pipeline import (
    DataSetDefinition,
    DataSetMessage,
    NetworkMessage,
    Publisher,
    SizeModel,
    assemble,
    chunk_segment,
    emit_keepalive_if_due,
    encoded_size,
    step_writer,
)
from .sim import FlowScenario, LinkModel, SimMetrics, compare, run_scenario
from .traffic import (
    CommLevel,
    Criticality,
    FlowAttributes,
    LengthConsistency,
    TrafficSpec,
    TrafficType,
    builtin_catalog,
    builtin_spec,
    catalog_text,
    classify_flow,
    parse_traffic_catalog,
)
from .usecase import builtin_usecase, misconfiguration_suite, run_misconfiguration_suite

__version__ = "0.1.0"
