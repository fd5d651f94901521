"""Per-pair parameters and contact schedules.

Each pair draws its expected number of encounters from the gamma model and is
then routed to one of two generators:

* frequent pairs (rate above ``T_e``) walk forward in time drawing
  intercontact times from a Pareto law; draws beyond ``T`` are replaced by a
  whole number of days plus a time-of-day correction that lands the next
  encounter around ``mu_day``;
* sporadic pairs place their encounters on uniformly chosen days.

The exponential-pairwise baseline replaces both with a Poisson process whose
rate is the drawn contact rate.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import __version__
from .config import EXPONENTIAL, SimConfig
from .errors import CalibrationError
from .sampling import (
    ParetoParams,
    RandomStream,
    sample_exponential,
    sample_gamma,
    sample_normal,
    sample_pareto,
    sample_uniform,
)
from .trace import ContactEvent, Trace, TraceMeta, assemble_trace

FREQUENT = "frequent"
SPORADIC = "sporadic"


@dataclass(frozen=True)
class PairParams:
    pair: tuple[int, int]
    r_e: float
    N_e: int
    group: str
    lam: float = 0.0  # long-gap rate, per day (frequent group)
    alpha_ict: float = 0.0  # Pareto exponent actually used by this pair
    exp_rate: float = 0.0  # per second (exponential-pairwise variant)


def pair_index(i: int, j: int, n_users: int) -> int:
    """Row-major index of ``(i, j)``, ``i < j``, in the upper triangle."""
    return i * n_users - i * (i + 1) // 2 + (j - i - 1)


def iter_pairs(n_users: int):
    for i in range(n_users):
        for j in range(i + 1, n_users):
            yield (i, j)


def encounter_count(r_e: float, T_duration: float) -> int:
    return math.floor(T_duration * r_e)


# --- calibration -----------------------------------------------------------


def long_gap_probability(config: SimConfig, alpha: float) -> float:
    """P(p > T) for the Pareto intercontact draw with ``x_min = granularity``."""
    return (config.granularity / config.T) ** alpha


def expected_contacts(config: SimConfig, lam: float, alpha: float) -> float:
    """Expected encounter count of one frequent-pair schedule.

    A schedule is a sequence of bursts. Each Pareto draw ends the burst with
    probability ``q = P(p > T)``, so the burst that opens at t=0 holds
    ``(1 - q) / q`` contacts on average and every later burst ``1 / q``.
    In periodic mode bursts reopen at ``mu_day`` on days 1..d_sim-1, each day
    independently with probability ``1 - exp(-lam)`` (ceil of an exponential
    is geometric). Otherwise the reopenings form a Poisson process of rate
    ``lam`` per day. Time spent inside bursts is neglected.
    """
    q = long_gap_probability(config, alpha)
    if config.periodic:
        reopenings = (config.d_sim - 1) * -math.expm1(-lam)
    else:
        reopenings = lam * config.d_sim
    return (1.0 - q) / q + reopenings / q


def calibrate(config: SimConfig, N_e: int, pair=None) -> tuple[float, float]:
    """Return ``(lam, alpha)`` so that ``expected_contacts`` equals ``N_e``.

    The configured ``alpha_ict`` is kept whenever its opening burst accounts
    for at most half of ``N_e``. Below that the exponent is lowered so the
    opening burst is exactly ``N_e / 2`` contacts and the reopenings carry the
    other half.
    """
    where = f" for pair {pair}" if pair is not None else ""
    if N_e < 1:
        raise CalibrationError(f"cannot calibrate N_e={N_e}{where}")
    log_ratio = math.log(config.granularity / config.T)
    alpha = config.alpha_ict
    q = long_gap_probability(config, alpha)
    if (1.0 - q) / q > N_e / 2.0:
        q = 2.0 / (N_e + 2.0)
        alpha = math.log(q) / log_ratio
    # q == 1 (T == granularity) makes every draw a long gap
    needed = (N_e * q - (1.0 - q))
    if config.periodic:
        p_day = needed / (config.d_sim - 1) if config.d_sim > 1 else math.inf
        if not 0 < p_day < 1:
            raise CalibrationError(
                f"N_e={N_e}{where} does not fit in {config.d_sim} days"
            )
        lam = -math.log1p(-p_day)
    else:
        lam = needed / config.d_sim
        busy = N_e * _mean_short_ict(config, alpha)
        if lam <= 0 or busy >= config.T_duration:
            raise CalibrationError(
                f"N_e={N_e}{where} does not fit in {config.T_duration} s"
            )
    return lam, alpha


def solve_lambda(config: SimConfig, N_e: int) -> float:
    """Per-day long-gap rate for a frequent pair expecting ``N_e`` encounters."""
    return calibrate(config, N_e)[0]


def _mean_short_ict(config: SimConfig, alpha: float) -> float:
    """E[p | p <= T] for the Pareto draw, zero when the branch is empty."""
    g, T = config.granularity, config.T
    if T <= g:
        return 0.0
    mass = 1.0 - (g / T) ** alpha
    if alpha == 1.0:
        integral = g * math.log(T / g)
    else:
        integral = alpha * g ** alpha * (T ** (1 - alpha) - g ** (1 - alpha)) / (1 - alpha)
    return integral / mass


# --- parameter draws -------------------------------------------------------


def draw_pair_params(config: SimConfig, pair: tuple[int, int], stream: RandomStream) -> PairParams:
    total = sample_gamma(config.gamma, stream)
    r_e = total / config.T_duration
    N_e = encounter_count(r_e, config.T_duration)
    group = FREQUENT if r_e > config.T_e else SPORADIC
    if config.variant == EXPONENTIAL:
        return PairParams(pair, r_e, N_e, group, exp_rate=r_e)
    lam = alpha = 0.0
    if group == FREQUENT and N_e >= 1:
        lam, alpha = calibrate(config, N_e, pair)
    return PairParams(pair, r_e, N_e, group, lam=lam, alpha_ict=alpha)


# --- schedules ---------------------------------------------------------------


def sample_ict_piecewise(config: SimConfig, lam: float, t_day: float, stream: RandomStream,
                         alpha: float | None = None) -> float:
    """One intercontact time (seconds) for a frequent pair.

    ``t_day`` is the time of day at which the previous contact ended.
    """
    g = config.granularity
    p = sample_pareto(ParetoParams(alpha or config.alpha_ict, g), stream)
    if p <= config.T:
        return p
    days = sample_exponential(lam, stream)
    if not config.periodic:
        return max(config.d_day * days, g)
    k = math.ceil(days)  # 0 only for a zero exponential draw
    x = k * config.d_day + sample_normal(config.mu_day - t_day, config.sigma_day, stream)
    return max(x, g)


def _ticks(seconds: float, g: int) -> int:
    return max(1, int(seconds / g + 0.5))


def _sample_duration_ticks(config: SimConfig, stream: RandomStream) -> int:
    return _ticks(sample_pareto(ParetoParams(config.alpha_c, config.granularity), stream),
                  config.granularity)


def _walk(config: SimConfig, pair, stream, draw_ict) -> list[ContactEvent]:
    g = config.granularity
    horizon = config.T_duration // g
    i, j = pair
    events = []
    cursor = 0  # ticks; no contact is in progress at t = 0
    while True:
        ict = draw_ict((cursor * g) % config.d_day)
        if ict >= config.T_duration:
            break
        start = cursor + _ticks(ict, g)
        if start >= horizon:
            break
        end = min(start + _sample_duration_ticks(config, stream), horizon)
        events.append(ContactEvent(i, j, start * g, end * g))
        cursor = end
    return events


def _sporadic_schedule(config: SimConfig, params: PairParams, stream) -> list[ContactEvent]:
    g = config.granularity
    horizon = config.T_duration // g
    starts = []
    for _ in range(params.N_e):
        if config.periodic:
            day = min(int(sample_uniform(0, config.d_sim, stream)), config.d_sim - 1)
            t = day * config.d_day + sample_normal(config.mu_day, config.sigma_day, stream)
        else:
            t = config.d_day * sample_uniform(0, config.d_sim, stream)
        tick = int(t / g + 0.5)
        if 0 <= tick < horizon:
            starts.append(tick)
    starts.sort()
    i, j = params.pair
    events = []
    carry = None
    for idx, s in enumerate(starts):
        if carry is not None:
            s, carry = carry, None
        end = min(s + _sample_duration_ticks(config, stream), horizon)
        if idx + 1 < len(starts) and end >= starts[idx + 1]:
            end = starts[idx + 1] - 1
            if end <= s:
                carry = s  # fold into the next encounter
                continue
        events.append(ContactEvent(i, j, s * g, end * g))
    return events


def generate_pair_schedule(config: SimConfig, params: PairParams, stream: RandomStream) -> list[ContactEvent]:
    if config.variant == EXPONENTIAL:
        return generate_pair_schedule_exponential(config, params, stream)
    if params.N_e <= 0:
        return []
    if params.group == SPORADIC:
        return _sporadic_schedule(config, params, stream)
    return _walk(
        config, params.pair, stream,
        lambda t_day: sample_ict_piecewise(config, params.lam, t_day, stream, params.alpha_ict),
    )


def generate_pair_schedule_exponential(config: SimConfig, params: PairParams,
                                       stream: RandomStream) -> list[ContactEvent]:
    if params.exp_rate <= 0:
        return []
    return _walk(config, params.pair, stream,
                 lambda _t_day: sample_exponential(params.exp_rate, stream))


# --- whole trace -------------------------------------------------------------


def _generate_chunk(config: SimConfig, seed: int, pairs: list[tuple[int, int]]):
    out = []
    for pair in pairs:
        stream = RandomStream(seed, pair_index(*pair, config.n_users))
        params = draw_pair_params(config, pair, stream)
        out.append((params, generate_pair_schedule(config, params, stream)))
    return out


def trace_meta(config: SimConfig, seed: int | None) -> TraceMeta:
    return TraceMeta(
        n_users=config.n_users,
        d_sim=config.d_sim,
        d_day=config.d_day,
        granularity=config.granularity,
        seed=seed,
        variant=config.variant,
        version=__version__,
    )


def generate_trace(config: SimConfig, seed: int | None = None, workers: int = 1) -> tuple[Trace, list[PairParams]]:
    """Generate every pair and assemble the trace.

    Pair ``(i, j)`` always uses substream ``pair_index(i, j)``, so the output
    does not depend on ``workers``.
    """
    seed = config.seed if seed is None else seed
    if seed is None:
        raise ValueError("a seed is required (set config.seed or pass seed=)")
    pairs = list(iter_pairs(config.n_users))
    if workers <= 1:
        results = _generate_chunk(config, seed, pairs)
    else:
        size = -(-len(pairs) // workers)
        chunks = [pairs[k:k + size] for k in range(0, len(pairs), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_generate_chunk, [config] * len(chunks), [seed] * len(chunks), chunks)
            results = [item for part in parts for item in part]
    params = [p for p, _ in results]
    trace = assemble_trace(trace_meta(config, seed), (s for _, s in results))
    return trace, params
