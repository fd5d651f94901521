import io

import numpy as np
import pytest

from ictgen.config import DEFAULTS
from ictgen.errors import ComparisonError, EmptyDistributionError, InsufficientDataError
from ictgen.pairgen import FREQUENT, SPORADIC, PairParams, generate_trace
from ictgen.stats import (
    Ccdf,
    aggregate_ccdf,
    ccdf_csv_text,
    compare_ccdf,
    contact_count_comparison,
    loglog_slope,
    periodicity_from_icts,
    periodicity_score,
    read_ccdf_csv,
    regime_change,
    semilog_r2,
    zero_contact_fraction,
)
from ictgen.trace import ContactEvent, TraceMeta, assemble_trace


def test_single_value_ccdf():
    assert Ccdf.from_samples([300]).points == [(300.0, 1.0)]


def test_ccdf_counting():
    c = Ccdf.from_samples([300, 300, 900, 900])
    assert c(300) == 1.0
    assert c(300.001) == 0.5
    assert c(900) == 0.5 and c(901) == 0.0
    assert c.mass_at_or_below(300) == 0.5


def test_empty_ccdf_raises():
    with pytest.raises(EmptyDistributionError):
        Ccdf.from_samples([])


def test_aggregate_matches_naive_extraction(default_trace):
    trace, _ = default_trace
    # naive oracle: scan every event, remember last end per pair
    last_end, icts = {}, []
    for ev in sorted(trace.events, key=lambda e: e.start):
        if ev.pair in last_end:
            icts.append(ev.start - last_end[ev.pair])
        last_end[ev.pair] = ev.end
    x = np.array(icts, dtype=float)
    c = aggregate_ccdf(trace)
    assert c.t.tolist() == sorted(set(icts))
    expected = np.array([(x >= v).mean() for v in c.t])
    assert np.array_equal(c.p, expected)


def test_compare_identical_and_scaled():
    ref = Ccdf([300.0, 1000.0, 5000.0], [1.0, 0.6, 0.2])
    rep = compare_ccdf(ref, ref)
    assert (rep.avg_rel_error, rep.max_rel_error) == (0.0, 0.0)
    half = Ccdf(ref.t, ref.p * 0.5)
    rep = compare_ccdf(half, ref)
    assert rep.avg_rel_error == pytest.approx(0.5) and rep.max_rel_error == pytest.approx(0.5)


def test_compare_hand_computed_grid():
    model = Ccdf([1.0, 4.0, 16.0], [1.0, 0.5, 0.25])
    ref = Ccdf([1.0, 2.0, 8.0, 16.0], [1.0, 0.8, 0.4, 0.2])
    rep = compare_ccdf(model, ref, n_points=5)  # grid 1, 2, 4, 8, 16
    # P(X >= t): model 1, .5, .5, .25, .25 ; ref 1, .8, .4, .4, .2
    rel = [0, 0.3 / 0.8, 0.1 / 0.4, 0.15 / 0.4, 0.05 / 0.2]
    assert rep.avg_rel_error == pytest.approx(sum(rel) / 5)
    assert rep.max_rel_error == pytest.approx(0.375)
    assert rep.max_error_location == pytest.approx(2.0)
    assert rep.as_dict()["n_grid"] == 5


def test_compare_disjoint_supports():
    with pytest.raises(ComparisonError):
        compare_ccdf(Ccdf([1.0, 2.0], [1.0, 0.5]), Ccdf([5.0, 6.0], [1.0, 0.5]))


def test_zero_contact_fraction_examples():
    zero = [PairParams((0, 1), 0.0, 0, SPORADIC)] * 4
    assert zero_contact_fraction(DEFAULTS, zero) == 1.0
    some = [PairParams((0, 1), 1e-5, 86, FREQUENT)] * 4
    assert zero_contact_fraction(DEFAULTS, some) == 0.0


@pytest.mark.slow
def test_zero_contact_fraction_over_seeds():
    fractions = [zero_contact_fraction(DEFAULTS, generate_trace(DEFAULTS.with_(seed=s))[1])
                 for s in range(20)]
    assert 0.36 <= np.mean(fractions) <= 0.66


def _count_trace(counts):
    meta = TraceMeta(n_users=4, d_sim=1, d_day=86400, granularity=300)
    schedules = [[ContactEvent(i, j, 600 * k, 600 * k + 300) for k in range(c)]
                 for (i, j), c in counts.items()]
    return assemble_trace(meta, schedules)


def test_contact_count_comparison():
    counts = {(0, 1): 2, (0, 2): 5, (2, 3): 1}
    trace = _count_trace(counts)
    assert contact_count_comparison(trace, counts).avg_rel_error == 0.0
    doubled = {p: c * 2 for p, c in counts.items()}
    assert contact_count_comparison(_count_trace(doubled), counts).avg_rel_error == pytest.approx(1.0)
    # hand computation: shared pairs (0,1) and (0,2); means 3.5 vs 3 ; worst pair (0,1) at 1/2
    rep = contact_count_comparison(_count_trace({(0, 1): 3, (0, 2): 4}), {(0, 1): 2, (0, 2): 4, (1, 3): 7})
    assert rep.avg_rel_error == pytest.approx(0.5 / 3)
    assert rep.max_rel_error == pytest.approx(0.5) and rep.max_error_location == (0, 1)


def test_periodicity_comb_and_uniform():
    rng = np.random.default_rng(0)
    comb = rng.integers(1, 10, 20_000) * 86400.0
    assert periodicity_from_icts(comb, 86400, 6030) >= 0.9
    flat = rng.uniform(43200, 864000, 20_000)
    assert periodicity_from_icts(flat, 86400, 6030) <= 0.1


def test_periodicity_uniform_null_distribution():
    # Monte-Carlo null: the score of smooth tails stays small across replicates
    scores = [periodicity_from_icts(np.random.default_rng(s).uniform(43200, 864000, 10_000), 86400, 6030)
              for s in range(20)]
    assert max(scores) <= 0.1


def test_periodicity_needs_tail_samples():
    with pytest.raises(InsufficientDataError):
        periodicity_from_icts([86400.0] * 99, 86400, 6030)


def test_periodic_term_raises_score(default_trace):
    trace, _ = default_trace
    flat, _ = generate_trace(DEFAULTS.with_(seed=11, periodic=False))
    assert periodicity_score(trace) > periodicity_score(flat)


def test_shape_diagnostics_on_known_curves():
    t = np.geomspace(1, 1e5, 4000)
    power = Ccdf(t, t ** -0.7)
    assert loglog_slope(power, 10, 1e4) == pytest.approx(-0.7, abs=0.01)
    lin = np.linspace(0, 50, 2000)
    expo = Ccdf(lin, np.exp(-0.2 * lin))
    assert semilog_r2(expo, 1, 40) > 0.999
    # power law up to 100, exponential beyond, glued continuously
    tt = np.geomspace(1, 5000, 6000)
    p = np.where(tt < 100, tt ** -0.5, 0.1 * np.exp(-(tt - 100) / 400))
    assert 50 <= regime_change(Ccdf(tt, p), 1, 3000) <= 200


def test_ccdf_csv_roundtrip():
    c = Ccdf.from_samples([300, 600, 600, 86400 * 3])
    text = ccdf_csv_text(c)
    assert text.splitlines()[0] == "t_seconds,ccdf"
    back = read_ccdf_csv(io.StringIO(text))
    assert np.array_equal(back.t, c.t) and np.array_equal(back.p, c.p)
