import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ictgen.errors import AssemblyError, QueryError
from ictgen.trace import (
    ContactEvent,
    TraceMeta,
    active_pairs,
    all_intercontact_times,
    assemble_trace,
    contact_count,
    edge_active,
    intercontact_times,
)

META = TraceMeta(n_users=5, d_sim=1, d_day=86400, granularity=10)


def trace_of(*events, meta=META):
    per_pair = {}
    for ev in events:
        per_pair.setdefault(ev.pair, []).append(ev)
    return assemble_trace(meta, per_pair.values())


def test_empty_assembly():
    t = assemble_trace(META, [[], []])
    assert t.events == () and len(t) == 0


def test_assembly_sorts_by_start():
    t = assemble_trace(META, [[ContactEvent(0, 1, 600, 700)], [ContactEvent(2, 3, 300, 400)]])
    assert [ev.start for ev in t.events] == [300, 600]


@pytest.mark.parametrize("bad", [
    [ContactEvent(1, 1, 0, 10)],
    [ContactEvent(2, 1, 0, 10)],
    [ContactEvent(0, 5, 0, 10)],
    [ContactEvent(0, 1, 10, 10)],
    [ContactEvent(0, 1, 5, 20)],
    [ContactEvent(0, 1, 86400, 86410)],
    [ContactEvent(0, 1, 0, 20), ContactEvent(0, 1, 20, 30)],
    [ContactEvent(0, 1, 0, 20), ContactEvent(0, 2, 40, 50)],
])
def test_assembly_rejects_invalid_schedule(bad):
    with pytest.raises(AssemblyError, match="pair"):
        assemble_trace(META, [bad])


def test_assembly_rejects_duplicate_pair_schedules():
    with pytest.raises(AssemblyError):
        assemble_trace(META, [[ContactEvent(0, 1, 0, 10)], [ContactEvent(0, 1, 50, 60)]])


def test_edge_active_boundaries():
    t = trace_of(ContactEvent(0, 1, 100, 150))
    assert edge_active(t, 0, 1, 120)
    assert not edge_active(t, 0, 1, 100)
    assert edge_active(t, 1, 0, 150)
    assert not edge_active(t, 0, 1, 151)


def test_edge_without_events_is_never_active():
    t = trace_of(ContactEvent(0, 1, 100, 150))
    assert not any(edge_active(t, 2, 3, x) for x in range(0, 1000, 7))


@pytest.mark.parametrize("i, j", [(0, 7), (-1, 2), (3, 3)])
def test_unknown_users_raise(i, j):
    t = trace_of(ContactEvent(0, 1, 100, 150))
    with pytest.raises(QueryError):
        edge_active(t, i, j, 10)


def test_intercontact_examples():
    t = trace_of(ContactEvent(0, 1, 100, 150), ContactEvent(0, 1, 400, 430),
                 ContactEvent(2, 3, 0, 10), ContactEvent(1, 4, 0, 10),
                 ContactEvent(1, 4, 260, 300), ContactEvent(1, 4, 1300, 1310))
    assert intercontact_times(t, 0, 1) == [250]
    assert intercontact_times(t, 3, 2) == []
    assert intercontact_times(t, 1, 4) == [250, 1000]
    assert sorted(all_intercontact_times(t)) == [250, 250, 1000]


def test_counts_on_empty_and_single():
    empty = trace_of()
    assert contact_count(empty, 0, 1) == 0 and active_pairs(empty, 10) == set()
    single = trace_of(ContactEvent(0, 1, 100, 150))
    assert contact_count(single, 0, 1) == 1
    assert active_pairs(single, 120) == {(0, 1)}


def test_numpy_ids_accepted():
    t = trace_of(ContactEvent(0, 1, 100, 150))
    assert edge_active(t, np.int64(0), np.int32(1), 120)


@st.composite
def random_trace(draw):
    n = draw(st.integers(2, 6))
    meta = TraceMeta(n_users=n, d_sim=1, d_day=2000, granularity=10)
    schedules = []
    for i in range(n):
        for j in range(i + 1, n):
            ticks = sorted(draw(st.sets(st.integers(0, 199), max_size=8)))
            # consecutive (start, end) tick pairs leaving a gap between events
            evs, cursor = [], -2
            for a, b in zip(ticks[::2], ticks[1::2]):
                if a > cursor + 1 and b > a:
                    evs.append(ContactEvent(i, j, a * 10, b * 10))
                    cursor = b
            schedules.append(evs)
    return assemble_trace(meta, schedules)


@settings(max_examples=60, deadline=None)
@given(trace=random_trace(), data=st.data())
def test_queries_match_linear_scan(trace, data):
    t = data.draw(st.integers(0, 2000))
    n = trace.n_users
    for i in range(n):
        for j in range(i + 1, n):
            scan = [ev for ev in trace.events if ev.pair == (i, j)]
            assert contact_count(trace, i, j) == len(scan)
            assert edge_active(trace, i, j, t) == any(ev.start < t <= ev.end for ev in scan)
            assert intercontact_times(trace, i, j) == [b.start - a.end for a, b in zip(scan, scan[1:])]
    assert active_pairs(trace, t) == {ev.pair for ev in trace.events if ev.start < t <= ev.end}


@settings(max_examples=60, deadline=None)
@given(trace=random_trace())
def test_trace_invariants_hold(trace):
    keys = [(ev.start, ev.i, ev.j) for ev in trace.events]
    assert keys == sorted(keys)
    assert all(x >= trace.meta.granularity for x in all_intercontact_times(trace))
