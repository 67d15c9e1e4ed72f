from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pubsubconf.traffic import (
    CatalogError,
    CommLevel,
    Criticality,
    DuplicateTrafficIdError,
    FlowAttributes,
    LengthConsistency,
    TrafficType,
    builtin_catalog,
    builtin_spec,
    catalog_text,
    classify_flow,
    format_traffic_catalog,
    parse_traffic_catalog,
)

C2C, C2D, CMP = CommLevel.C2C, CommLevel.C2D, CommLevel.D2CMP

# Hand transcription of the traffic-type table, kept apart from the shipped CSV.
GOLDEN = {
    1: ("Control-Iso", True, "High", False, "Fixed", {C2C, C2D}),
    2: ("Control-Sync", True, "High", False, "Fixed", {C2C, C2D}),
    3: ("Control-Async", True, "High", True, "Fixed", {C2C, C2D}),
    4: ("Event", False, "High", True, "Variable", {C2C, C2D, CMP}),
    5: ("Voice/Video", True, "Low", True, "Variable", {CMP}),
    6: ("Command-Cycle", True, "Medium", True, "Variable", {C2D, CMP}),
    7: ("Command-Acycle", False, "Medium", True, "Variable", {C2D, CMP}),
    8: ("Config", False, "Medium", True, "Variable", {C2C, C2D, CMP}),
    9: ("Diagnostic-Cycle", True, "Medium", True, "Variable", {C2C, C2D, CMP}),
    10: ("Diagnostic-Acycle", False, "Medium", True, "Variable", {C2C, C2D, CMP}),
    11: ("Best-Effort", False, "Low", True, "Variable", {CMP}),
}


def test_builtin_catalog_matches_golden():
    specs = builtin_catalog()
    assert len(specs) == 11
    for spec in specs:
        name, periodic, crit, tol, length, levels = GOLDEN[int(spec.type)]
        assert spec.name == name
        assert spec.periodic is periodic
        assert spec.criticality.value == crit
        assert spec.loss_tolerant is tol
        assert spec.length_consistency.value == length
        assert set(spec.comm_levels) == levels


def test_aperiodic_rows_are_variable_length():
    for spec in builtin_catalog():
        if not spec.periodic:
            assert spec.length_consistency is LengthConsistency.VARIABLE


def test_id_name_bijection():
    names = [t.label for t in TrafficType]
    assert len(set(names)) == 11
    for t in TrafficType:
        assert TrafficType.from_label(t.label) is t
        assert TrafficType.lookup(int(t)) is t
        assert TrafficType.lookup(t.label.lower()) is t


def test_lookup_aliases_and_unknown():
    assert TrafficType.lookup("Command-Cyclic") is TrafficType.COMMAND_CYCLE
    assert TrafficType.lookup("best effort") is TrafficType.BEST_EFFORT
    assert TrafficType.lookup("4") is TrafficType.EVENT
    with pytest.raises(ValueError):
        TrafficType.lookup("Network")
    with pytest.raises(ValueError):
        TrafficType.lookup(12)


def test_builtin_entries():
    first, last = builtin_catalog()[0], builtin_catalog()[-1]
    assert first.name == "Control-Iso" and not first.loss_tolerant
    assert last.name == "Best-Effort" and set(last.comm_levels) == {CMP}
    assert builtin_spec("event").criticality is Criticality.HIGH


def test_catalog_round_trip_is_byte_identical():
    text = catalog_text()
    assert format_traffic_catalog(parse_traffic_catalog(text)) == text


def test_classify_iso_and_sync_are_ambiguous():
    attrs = FlowAttributes(True, Criticality.HIGH, False, LengthConsistency.FIXED, frozenset({C2C}))
    assert classify_flow(attrs) == {TrafficType.CONTROL_ISO, TrafficType.CONTROL_SYNC}


def test_classify_event_and_unknown():
    attrs = FlowAttributes(False, Criticality.HIGH, True, LengthConsistency.VARIABLE, frozenset({CMP}))
    assert classify_flow(attrs) == {TrafficType.EVENT}
    nothing = FlowAttributes(False, Criticality.HIGH, False, LengthConsistency.FIXED, frozenset({C2C}))
    assert classify_flow(nothing) == set()


def test_empty_comm_levels_rejected():
    with pytest.raises(ValueError):
        FlowAttributes(True, Criticality.HIGH, False, LengthConsistency.FIXED, frozenset())


def _lines(text: str) -> list[str]:
    return text.splitlines()


def test_duplicate_id_reports_line():
    lines = _lines(catalog_text())
    text = "\n".join(lines + [lines[1]]) + "\n"
    with pytest.raises(DuplicateTrafficIdError) as info:
        parse_traffic_catalog(text)
    assert info.value.line == len(lines) + 1


@pytest.mark.parametrize(
    "column, bad",
    [(2, "maybe"), (3, "Extreme"), (4, "sometimes"), (5, "Elastic"), (6, "C2X")],
)
def test_bad_field_reports_field_and_line(column, bad):
    lines = _lines(catalog_text())
    cells = lines[3].split(",")
    cells[column] = bad
    lines[3] = ",".join(cells)
    with pytest.raises(CatalogError) as info:
        parse_traffic_catalog("\n".join(lines) + "\n")
    assert info.value.line == 4
    assert info.value.field == lines[0].split(",")[column]


def test_empty_levels_in_file_rejected():
    lines = _lines(catalog_text())
    cells = lines[2].split(",")
    cells[6] = ""
    lines[2] = ",".join(cells)
    with pytest.raises(CatalogError):
        parse_traffic_catalog("\n".join(lines) + "\n")


@given(st.permutations(list(range(11))))
def test_format_parse_is_order_insensitive(order):
    specs = builtin_catalog()
    shuffled = [specs[i] for i in order]
    parsed = parse_traffic_catalog(format_traffic_catalog(shuffled))
    assert sorted(parsed, key=lambda s: s.type) == specs


def test_each_builtin_classifies_to_itself():
    for spec in builtin_catalog():
        assert spec.type in classify_flow(spec.attributes())


@given(
    st.booleans(),
    st.sampled_from(list(Criticality)),
    st.booleans(),
    st.sampled_from(list(LengthConsistency)),
    st.sets(st.sampled_from(list(CommLevel)), min_size=1),
)
def test_classification_is_exact_match(periodic, crit, tol, length, levels):
    attrs = FlowAttributes(periodic, crit, tol, length, frozenset(levels))
    got = classify_flow(attrs)
    assert got == classify_flow(attrs)
    expected = {
        TrafficType(i)
        for i, (_, p, c, t, ln, lv) in GOLDEN.items()
        if p == periodic and c == crit.value and t == tol and ln == length.value and lv & levels
    }
    assert got == expected
