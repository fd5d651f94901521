"""The time-varying contact graph built from per-pair schedules."""

from __future__ import annotations

import bisect
import operator
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple

from .errors import AssemblyError, QueryError


class ContactEvent(NamedTuple):
    """One contact between users ``i < j``, active on ``(start, end]`` (seconds)."""

    i: int
    j: int
    start: int
    end: int

    @property
    def pair(self) -> tuple[int, int]:
        return (self.i, self.j)

    @property
    def duration(self) -> int:
        return self.end - self.start


def sort_key(ev: ContactEvent):
    return (ev.start, ev.i, ev.j)


@dataclass(frozen=True)
class TraceMeta:
    n_users: int
    d_sim: int
    d_day: int
    granularity: int
    seed: int | None = None
    variant: str = "piecewise"
    version: str = ""

    @property
    def T_duration(self) -> int:
        return self.d_sim * self.d_day


@dataclass(frozen=True)
class Trace:
    events: tuple[ContactEvent, ...]
    meta: TraceMeta

    @cached_property
    def by_pair(self) -> dict[tuple[int, int], list[tuple[int, int]]]:
        out = defaultdict(list)
        for ev in self.events:
            out[(ev.i, ev.j)].append((ev.start, ev.end))
        return dict(out)

    @cached_property
    def _starts_by_pair(self) -> dict[tuple[int, int], list[int]]:
        return {p: [s for s, _ in spans] for p, spans in self.by_pair.items()}

    def __len__(self):
        return len(self.events)

    @property
    def n_users(self) -> int:
        return self.meta.n_users

    @property
    def T_duration(self) -> int:
        return self.meta.T_duration


def _check_schedule(pair, schedule, meta: TraceMeta):
    i, j = pair
    g = meta.granularity
    if not (0 <= i < j < meta.n_users):
        raise AssemblyError(f"pair {pair}: ids must satisfy 0 <= i < j < {meta.n_users}")
    prev_end = None
    for ev in schedule:
        if (ev.i, ev.j) != pair:
            raise AssemblyError(f"pair {pair}: schedule contains event for {(ev.i, ev.j)}")
        if not 0 <= ev.start < ev.end <= meta.T_duration:
            raise AssemblyError(f"pair {pair}: event ({ev.start}, {ev.end}] outside [0, {meta.T_duration}]")
        if ev.start % g or ev.end % g:
            raise AssemblyError(f"pair {pair}: event ({ev.start}, {ev.end}] off the {g}s grid")
        if prev_end is not None and ev.start <= prev_end:
            raise AssemblyError(f"pair {pair}: events overlap or are unsorted at start={ev.start}")
        prev_end = ev.end


def validate_events(events: Iterable[ContactEvent], meta: TraceMeta) -> None:
    """Raise AssemblyError unless ``events`` form a valid trace body (any order)."""
    per_pair = defaultdict(list)
    for ev in events:
        per_pair[(ev.i, ev.j)].append(ev)
    for pair, evs in per_pair.items():
        evs.sort(key=sort_key)
        _check_schedule(pair, evs, meta)


def assemble_trace(meta: TraceMeta, schedules: Iterable[list[ContactEvent]]) -> Trace:
    """Validate every pair schedule and merge them into one sorted trace."""
    merged: list[ContactEvent] = []
    seen = set()
    for schedule in schedules:
        if not schedule:
            continue
        pair = (schedule[0].i, schedule[0].j)
        if pair in seen:
            raise AssemblyError(f"pair {pair}: more than one schedule supplied")
        seen.add(pair)
        _check_schedule(pair, schedule, meta)
        merged.extend(schedule)
    merged.sort(key=sort_key)
    return Trace(tuple(merged), meta)


def _norm_pair(trace: Trace, i: int, j: int) -> tuple[int, int]:
    n = trace.meta.n_users
    try:
        i, j = operator.index(i), operator.index(j)
    except TypeError:
        raise QueryError(f"user ids must be integers, got {i!r}, {j!r}") from None
    for u in (i, j):
        if not 0 <= u < n:
            raise QueryError(f"unknown user {u} (n_users={n})")
    if i == j:
        raise QueryError(f"a user cannot contact itself ({i})")
    return (i, j) if i < j else (j, i)


def edge_active(trace: Trace, i: int, j: int, t: float) -> bool:
    """True iff the pair has a contact with ``start < t <= end``."""
    pair = _norm_pair(trace, i, j)
    starts = trace._starts_by_pair.get(pair)
    if not starts:
        return False
    k = bisect.bisect_left(starts, t) - 1  # last event with start < t
    return k >= 0 and t <= trace.by_pair[pair][k][1]


def intercontact_times(trace: Trace, i: int, j: int) -> list[int]:
    """Gaps between the end of one contact and the start of the next."""
    spans = trace.by_pair.get(_norm_pair(trace, i, j), ())
    return [s2 - e1 for (_, e1), (s2, _) in zip(spans, spans[1:])]


def all_intercontact_times(trace: Trace) -> list[int]:
    out: list[int] = []
    for spans in trace.by_pair.values():
        out.extend(s2 - e1 for (_, e1), (s2, _) in zip(spans, spans[1:]))
    return out


def contact_count(trace: Trace, i: int, j: int) -> int:
    return len(trace.by_pair.get(_norm_pair(trace, i, j), ()))


def active_pairs(trace: Trace, t: float) -> set[tuple[int, int]]:
    return {
        pair
        for pair, spans in trace.by_pair.items()
        if any(s < t <= e for s, e in spans)
    }
