"""Independent reference computations used by the test suite.

Only enum and option types come from the package; everything else
restates the intended semantics from first principles so the
implementation can be checked against it.
"""

from __future__ import annotations

import itertools

import numpy as np

from pubsubconf.config import DatasetOrdering, DsmKind, Encoding
from pubsubconf.mapping import DeltaPreference, SynthesisOptions

KF, DF, EV, CH = DsmKind.KEY_FRAME, DsmKind.DELTA_FRAME, DsmKind.EVENT, DsmKind.CHUNK
U, J = Encoding.UADP, Encoding.JSON
O1, O2, O3 = DatasetOrdering.UNDEFINED, DatasetOrdering.ASCENDING_WRITER_ID, DatasetOrdering.ASCENDING_WRITER_ID_SINGLE

# Guideline table transcribed by hand:
# id -> (dsm types, kfc ">1 allowed", cyclic, delta, keepalive, encodings, orderings)
GUIDELINES = {
    1: ({KF}, False, True, "No", "No", {U}, {O2, O3}),
    2: ({KF}, False, True, "No", "No", {U}, {O2, O3}),
    3: ({KF}, False, True, "No", "No", {U}, {O2, O3}),
    4: ({EV}, False, False, "No", "Yes", {U}, {O3, O1}),
    5: ({CH}, False, True, "No", "No", {U}, {O1}),
    6: ({KF, DF}, True, True, "Dependent", "Dependent", {U, J}, {O1}),
    7: ({EV}, False, False, "No", "Yes", {U, J}, {O1}),
    8: ({EV}, False, False, "No", "Yes", {U, J}, {O1}),
    9: ({KF, DF}, True, True, "Dependent", "Dependent", {U, J}, {O1}),
    10: ({EV}, False, False, "No", "Yes", {U, J}, {O1}),
    11: ({EV}, False, False, "No", "Yes", {U, J}, {O1}),
}


def option_grid():
    for pref, endpoint, multiple, bulk, c, kfc in itertools.product(
        list(DeltaPreference), (True, False), (True, False), (True, False),
        (0.0, 0.1, 0.5, 0.666, 0.7, 0.9, 1.0), (2, 8),
    ):
        yield SynthesisOptions(
            delta_preference=pref,
            endpoint_supports_pubsub=endpoint,
            publisher_has_multiple_cyclic_dsms=multiple,
            bulk_flow=bulk,
            expected_change_fraction=c,
            key_frame_count_if_delta=kfc,
        )


def admissible(spec, opts: SynthesisOptions) -> bool:
    """Options a user may legitimately pass without expecting any finding."""
    row = GUIDELINES[int(spec.type)]
    if opts.delta_preference is DeltaPreference.ON:
        if row[3] != "Dependent":
            return False
        # forcing delta above the breakeven is allowed but warned about
        s = opts.mean_field_size
        return opts.expected_change_fraction * (s + 2) < s
    return True


SYNCED, BROKEN, DESYNC = 0, 1, 2


def desync_step(state: int, is_key: bool, delivered: bool) -> int:
    """Observer state after one writer tick that emitted one frame."""
    if not delivered:
        return BROKEN if state == SYNCED else state
    if is_key:
        return SYNCED
    return SYNCED if state == SYNCED else DESYNC


def desync_of_pattern(delivered: list[bool], kfc: int, start: int = BROKEN) -> int:
    """Desync ticks for a delta stream where every tick carries one frame."""
    state, ticks = start, 0
    for k, ok in enumerate(delivered):
        state = desync_step(state, k % kfc == 0, ok)
        ticks += state == DESYNC
    return ticks


def desync_cycle_tables(kfc: int, p: float) -> tuple[np.ndarray, np.ndarray]:
    """Enumerate all 2**kfc loss patterns of one key-frame cycle.

    Returns (P, r): P[i, j] is the probability of entering the next cycle in
    state j given state i, r[i] the expected desync ticks within the cycle.
    """
    P = np.zeros((3, 3))
    r = np.zeros(3)
    for pattern in itertools.product((True, False), repeat=kfc):
        prob = float(np.prod([1 - p if ok else p for ok in pattern]))
        for s0 in (SYNCED, BROKEN, DESYNC):
            state, ticks = s0, 0
            for k, ok in enumerate(pattern):
                state = desync_step(state, k == 0, ok)
                ticks += state == DESYNC
            P[s0, state] += prob
            r[s0] += prob * ticks
    return P, r


def expected_desync_per_tick(kfc: int, p: float) -> float:
    """Stationary expectation of desync ticks per writer tick."""
    P, r = desync_cycle_tables(kfc, p)
    w, v = np.linalg.eig(P.T)
    pi = np.real(v[:, np.argmin(np.abs(w - 1))])
    pi = pi / pi.sum()
    return float(pi @ r) / kfc


def expected_desync_per_lost_delta(kfc: int, p: float) -> float:
    return expected_desync_per_tick(kfc, p) * kfc / ((kfc - 1) * p)


def greedy_pack(sizes_by_writer: dict[int, int], fixed: int, per_dsm: int, max_size: int, max_count: int):
    """Writer-ascending first-fit into consecutive NetworkMessages."""
    packs: list[list[int]] = []
    used = 0
    for w in sorted(sizes_by_writer):
        cost = per_dsm + sizes_by_writer[w]
        if packs and len(packs[-1]) < max_count and used + cost <= max_size:
            packs[-1].append(w)
            used += cost
        else:
            packs.append([w])
            used = fixed + cost
    return packs


def keepalive_ticks(data_ticks: set[int], n: int, interval: int, ka_time: int) -> list[int]:
    last, out = 0, []
    for k in range(n):
        t = k * interval
        if t in data_ticks:
            last = t
        elif t - last >= ka_time:
            out.append(t)
            last = t
    return out
