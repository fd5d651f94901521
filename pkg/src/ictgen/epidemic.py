"""Epidemic (flooding) replay over a contact trace.

A node holding the message passes it to every partner it shares a contact
with, instantly, as soon as both the contact is up and the node itself is
infected. Nodes never recover. Blacklisted nodes never transmit; by default
they can still receive.
"""

from __future__ import annotations

import bisect
import heapq
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import QueryError
from .sampling import RandomStream
from .trace import Trace, intercontact_times

# Substream ids from here up are reserved for experiment runs; pair ids stay below.
EXPERIMENT_SUBSTREAM = 1 << 62

CENTRALITY = "centrality"
RANDOM = "random"


@dataclass(frozen=True)
class EpidemicRun:
    seed_node: int
    t0: int
    blacklist: frozenset = frozenset()
    infection_times: dict = field(default_factory=dict)  # user -> seconds; absent = never

    def infected_by(self, t: float) -> int:
        return sum(1 for v in self.infection_times.values() if v <= t)


@dataclass(frozen=True)
class InfectionCurve:
    t: np.ndarray  # seconds since start
    fraction: np.ndarray
    runs: int = 1

    def at(self, t: float) -> float:
        """Fraction infected ``t`` seconds after the start (step function)."""
        k = int(np.searchsorted(self.t, t, side="right")) - 1
        return float(self.fraction[max(k, 0)])


class _Adjacency:
    """Per-node incident contacts sorted by start, for forward scans."""

    def __init__(self, trace: Trace):
        n = trace.meta.n_users
        rows = [[] for _ in range(n)]
        for ev in trace.events:
            rows[ev.i].append((ev.start, ev.end, ev.j))
            rows[ev.j].append((ev.start, ev.end, ev.i))
        self.rows = rows  # events are globally sorted by start already
        self.starts = [[s for s, _, _ in r] for r in rows]
        self.max_dur = [max((e - s for s, e, _ in r), default=0) for r in rows]


def _adjacency(trace: Trace) -> _Adjacency:
    # memoised on the (immutable) trace instance
    adj = trace.__dict__.get("_adjacency")
    if adj is None:
        adj = trace.__dict__["_adjacency"] = _Adjacency(trace)
    return adj


def run_epidemic(trace: Trace, seed_node: int, t0: int, blacklist: Iterable[int] = (),
                 until: float | None = None, blacklist_receives: bool = True) -> EpidemicRun:
    """Earliest-arrival flooding from ``seed_node`` starting at ``t0``.

    A susceptible node sharing contact ``(s, e]`` with a transmitting node
    infected at ``tu`` is infected at ``max(s, tu)`` provided that is ``<= e``.
    Infections after ``until`` are not computed.
    """
    n = trace.meta.n_users
    if not 0 <= seed_node < n:
        raise QueryError(f"unknown seed node {seed_node}")
    if not 0 <= t0 <= trace.meta.T_duration:
        raise QueryError(f"t0={t0} outside the trace span [0, {trace.meta.T_duration}]")
    blacklist = frozenset(blacklist)
    limit = trace.meta.T_duration if until is None else until
    adj = _adjacency(trace)
    best = {seed_node: t0}
    done = set()
    heap = [(t0, seed_node)]
    while heap:
        tu, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u in blacklist:
            continue
        row, starts = adj.rows[u], adj.starts[u]
        lo = bisect.bisect_left(starts, tu - adj.max_dur[u])
        hi = bisect.bisect_right(starts, limit)
        for s, e, v in row[lo:hi]:
            if e < tu or v in done:
                continue
            if v in blacklist and not blacklist_receives:
                continue
            tv = s if s > tu else tu
            if tv < best.get(v, float("inf")):
                best[v] = tv
                heapq.heappush(heap, (tv, v))
    return EpidemicRun(seed_node, t0, blacklist, best)


def infection_curve(runs: Sequence[EpidemicRun], horizon: int, n_users: int, step: int) -> InfectionCurve:
    """Mean fraction infected on the grid ``0, step, ..., horizon`` after each run's t0."""
    grid = np.arange(0, horizon + 1, step, dtype=np.int64)
    if not runs:
        raise ValueError("need at least one run")
    total = np.zeros(grid.size)
    for run in runs:
        delays = np.sort(np.fromiter((v - run.t0 for v in run.infection_times.values()), dtype=np.int64))
        total += np.searchsorted(delays, grid, side="right")
    return InfectionCurve(grid, total / (len(runs) * n_users), len(runs))


# --- centrality ---------------------------------------------------------------


def pair_survival(trace: Trace, i: int, j: int, t: float) -> float:
    """Fraction of the pair's intercontact times strictly above ``t``; 1 with no samples."""
    icts = intercontact_times(trace, i, j)
    if not icts:
        return 1.0
    return sum(1 for x in icts if x > t) / len(icts)


def centrality(trace: Trace, i: int, t: float) -> float:
    n = trace.meta.n_users
    total = sum(pair_survival(trace, i, j, t) for j in range(n) if j != i)
    return 1.0 - total / (n - 1)


def centrality_vector(trace: Trace, t: float) -> list[float]:
    """``centrality(trace, i, t)`` for every node, sharing the per-pair work."""
    n = trace.meta.n_users
    deficit = [0.0] * n  # sum over j of (1 - P_ij)
    for (i, j), spans in trace.by_pair.items():
        icts = [s2 - e1 for (_, e1), (s2, _) in zip(spans, spans[1:])]
        if icts:
            met = sum(1 for x in icts if x <= t) / len(icts)
            deficit[i] += met
            deficit[j] += met
    return [d / (n - 1) for d in deficit]


def top_k(values: Sequence[float], k: int) -> list[int]:
    """Indices of the ``k`` largest values; ties go to the lower id."""
    return sorted(range(len(values)), key=lambda u: (-values[u], u))[:k]


# --- experiments --------------------------------------------------------------


def _valid_days(trace: Trace, offsets: Sequence[int], horizon: int) -> list[int]:
    m = trace.meta
    days = [d for d in range(m.d_sim) if all(d * m.d_day + o + horizon <= m.T_duration for o in offsets)]
    if not days:
        raise QueryError("no day leaves room for the requested start times and horizon")
    return days


def _run_chunk(trace, jobs, horizon, blacklist_receives):
    return [run_epidemic(trace, s, t0, bl, until=t0 + horizon, blacklist_receives=blacklist_receives)
            for s, t0, bl in jobs]


def _execute(trace, jobs, horizon, blacklist_receives, workers):
    if workers <= 1 or len(jobs) < 2 * workers:
        return _run_chunk(trace, jobs, horizon, blacklist_receives)
    size = -(-len(jobs) // workers)
    chunks = [jobs[k:k + size] for k in range(0, len(jobs), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_run_chunk, [trace] * len(chunks), chunks,
                         [horizon] * len(chunks), [blacklist_receives] * len(chunks))
        return [r for part in parts for r in part]


def epidemic_experiment(trace: Trace, runs: int, seed: int, time_of_day: int = 6 * 3600,
                        horizon: int | None = None, workers: int = 1) -> InfectionCurve:
    """Average of ``runs`` epidemics, each from a random node on a random day."""
    return start_time_experiment(trace, [time_of_day], runs, seed, horizon, workers)[0]


def start_time_experiment(trace: Trace, times_of_day: Sequence[int], runs: int, seed: int,
                          horizon: int | None = None, workers: int = 1) -> list[InfectionCurve]:
    """One averaged curve per start time of day.

    Run ``r`` uses the same day and seed node for every start time, so the
    curves differ only through the start time.
    """
    m = trace.meta
    horizon = m.d_day if horizon is None else horizon
    times_of_day = [int(x) for x in times_of_day]
    days = _valid_days(trace, times_of_day, horizon)
    draws = []
    for r in range(runs):
        stream = RandomStream(seed, EXPERIMENT_SUBSTREAM + r)
        draws.append((days[stream.choice(len(days))], stream.choice(m.n_users)))
    curves = []
    for tod in times_of_day:
        jobs = [(node, day * m.d_day + tod, ()) for day, node in draws]
        results = _execute(trace, jobs, horizon, True, workers)
        curves.append(infection_curve(results, horizon, m.n_users, m.granularity))
    return curves


def blacklist_experiment(trace: Trace, k: int, mode: str, runs: int, seed: int,
                         horizon: int | None = None, time_of_day: int = 6 * 3600,
                         centrality_horizon: float | None = None, blacklist_receives: bool = True,
                         workers: int = 1) -> InfectionCurve:
    """Averaged epidemic with ``k`` nodes barred from transmitting.

    ``mode="centrality"`` bars the ``k`` most central nodes, computed once on
    the whole trace at ``centrality_horizon`` (default six days);
    ``mode="random"`` draws a fresh set each run. Seeds are drawn from the
    nodes left transmitting.
    """
    m = trace.meta
    if not 0 <= k < m.n_users:
        raise QueryError(f"k must be in [0, {m.n_users - 1}]")
    if mode not in (CENTRALITY, RANDOM):
        raise QueryError(f"mode must be {CENTRALITY!r} or {RANDOM!r}")
    horizon = m.d_day if horizon is None else horizon
    centrality_horizon = 6 * m.d_day if centrality_horizon is None else centrality_horizon
    days = _valid_days(trace, [time_of_day], horizon)
    fixed = None
    if mode == CENTRALITY:
        fixed = top_k(centrality_vector(trace, centrality_horizon), k)
    jobs = []
    for r in range(runs):
        stream = RandomStream(seed, EXPERIMENT_SUBSTREAM + r)
        day = days[stream.choice(len(days))]
        banned = fixed if fixed is not None else stream.sample_without_replacement(range(m.n_users), k)
        banned_set = set(banned)
        allowed = [u for u in range(m.n_users) if u not in banned_set]
        node = allowed[stream.choice(len(allowed))]
        jobs.append((node, day * m.d_day + time_of_day, tuple(sorted(banned_set))))
    results = _execute(trace, jobs, horizon, blacklist_receives, workers)
    return infection_curve(results, horizon, m.n_users, m.granularity)
