"""Aggregate intercontact-time statistics and trace comparisons."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .config import SimConfig
from .errors import ComparisonError, EmptyDistributionError, InsufficientDataError
from .pairgen import encounter_count
from .trace import Trace, all_intercontact_times


@dataclass(frozen=True)
class Ccdf:
    """Empirical complementary CDF.

    ``t`` holds the distinct sample values in increasing order and ``p[k]``
    is the fraction of samples ``>= t[k]``.
    """

    t: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if t.ndim != 1 or t.shape != p.shape:
            raise ValueError("t and p must be 1-d arrays of equal length")
        if np.any(np.diff(t) <= 0):
            raise ValueError("t must be strictly increasing")
        if np.any(np.diff(p) > 0) or np.any((p < 0) | (p > 1)):
            raise ValueError("p must be non-increasing and inside [0, 1]")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_samples(cls, samples: Sequence[float]) -> "Ccdf":
        x = np.sort(np.asarray(samples, dtype=float))
        if x.size == 0:
            raise EmptyDistributionError("no intercontact-time samples")
        values, first = np.unique(x, return_index=True)
        return cls(values, (x.size - first) / x.size)

    def __len__(self):
        return self.t.size

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.t.tolist(), self.p.tolist()))

    def __call__(self, t) -> np.ndarray:
        """P(X >= t), stepping down just after each sample value."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.t, t, side="left")
        padded = np.append(self.p, 0.0)
        return padded[idx]

    def mass_at_or_below(self, t: float) -> float:
        """Fraction of samples <= t."""
        idx = np.searchsorted(self.t, t, side="right")
        return 1.0 if idx >= self.t.size else float(1.0 - self.p[idx])


@dataclass(frozen=True)
class ComparisonReport:
    avg_rel_error: float
    max_rel_error: float
    max_error_location: object
    grid: tuple

    def as_dict(self) -> dict:
        return {
            "avg_rel_error": self.avg_rel_error,
            "max_rel_error": self.max_rel_error,
            "max_error_location": self.max_error_location,
            "n_grid": len(self.grid),
        }


def aggregate_ccdf(trace: Trace) -> Ccdf:
    return Ccdf.from_samples(all_intercontact_times(trace))


def compare_ccdf(model: Ccdf, reference: Ccdf, n_points: int = 64) -> ComparisonReport:
    """Relative error ``|model - ref| / ref`` on a log grid over the shared support."""
    if len(model) == 0 or len(reference) == 0:
        raise ComparisonError("both distributions must be non-empty")
    lo = max(model.t[0], reference.t[0])
    hi = min(model.t[-1], reference.t[-1])
    if lo > hi or lo <= 0:
        raise ComparisonError(f"supports do not overlap on a positive range ({lo}, {hi})")
    grid = np.geomspace(lo, hi, n_points) if hi > lo else np.array([lo])
    ref = reference(grid)
    rel = np.abs(model(grid) - ref) / ref
    k = int(np.argmax(rel))
    return ComparisonReport(float(rel.mean()), float(rel[k]), float(grid[k]), tuple(grid.tolist()))


def zero_contact_fraction(config: SimConfig, params_list) -> float:
    """Fraction of pairs whose encounter count ``floor(T_duration * r_e)`` is zero."""
    params_list = list(params_list)
    if not params_list:
        raise EmptyDistributionError("no pairs")
    zero = sum(1 for p in params_list if encounter_count(p.r_e, config.T_duration) == 0)
    return zero / len(params_list)


def contact_count_comparison(trace: Trace, reference: Mapping[tuple[int, int], int]) -> ComparisonReport:
    """Relative error of the mean contacts per pair.

    Only pairs with at least one contact in both the trace and the reference
    take part. ``max_rel_error`` is the worst single pair.
    """
    model = {p: len(spans) for p, spans in trace.by_pair.items()}
    shared = sorted(p for p, c in reference.items() if c >= 1 and model.get(p, 0) >= 1)
    if not shared:
        raise ComparisonError("no pair has contacts in both trace and reference")
    m = np.array([model[p] for p in shared], dtype=float)
    r = np.array([reference[p] for p in shared], dtype=float)
    per_pair = np.abs(m - r) / r
    k = int(np.argmax(per_pair))
    avg = abs(m.mean() - r.mean()) / r.mean()
    return ComparisonReport(float(avg), float(per_pair[k]), shared[k], tuple(shared))


def periodicity_from_icts(icts: Sequence[float], d_day: float, tail_threshold: float,
                          bins_per_day: int = 144, min_samples: int = 100) -> float:
    """Daily periodicity of the intercontact-time tail.

    The tail (ICT > ``tail_threshold``) is histogrammed, a one-day moving
    average is subtracted, and the score is the correlation of the residual
    with itself shifted by one day. Smooth tails score near 0, tails
    concentrated on a daily comb score near 1.
    """
    x = np.asarray(icts, dtype=float)
    x = x[x > tail_threshold]
    if x.size < min_samples:
        raise InsufficientDataError(f"only {x.size} tail samples (need {min_samples})")
    width = d_day / bins_per_day
    top = np.quantile(x, 0.99)
    n_bins = int(math.ceil(top / width))
    hist, _ = np.histogram(x, bins=n_bins, range=(0.0, n_bins * width))
    first = int(tail_threshold // width)
    hist = hist[first:].astype(float)
    if hist.size < 3 * bins_per_day:
        raise InsufficientDataError("tail spans fewer than three days")
    trend = np.convolve(hist, np.ones(bins_per_day) / bins_per_day, mode="valid")
    half = bins_per_day // 2
    resid = hist[half:half + trend.size] - trend
    a, b = resid[:-bins_per_day], resid[bins_per_day:]
    a = a - a.mean()
    b = b - b.mean()
    denom = math.sqrt(float(a @ a) * float(b @ b))
    return float(a @ b / denom) if denom > 0 else 0.0


def periodicity_score(trace: Trace, tail_threshold: float = 6030.0) -> float:
    return periodicity_from_icts(all_intercontact_times(trace), trace.meta.d_day, tail_threshold)


# --- shape diagnostics --------------------------------------------------------


def loglog_slope(ccdf: Ccdf, lo: float, hi: float, n_points: int = 32) -> float:
    """OLS slope of log CCDF against log t on a log grid over [lo, hi]."""
    grid = np.geomspace(lo, hi, n_points)
    y = ccdf(grid)
    if np.any(y <= 0):
        raise InsufficientDataError(f"CCDF reaches zero inside [{lo}, {hi}]")
    return float(np.polyfit(np.log(grid), np.log(y), 1)[0])


def semilog_r2(ccdf: Ccdf, lo: float, hi: float, n_points: int = 64) -> float:
    """R^2 of a straight-line fit of log CCDF against linear t on [lo, hi]."""
    grid = np.linspace(lo, hi, n_points)
    y = ccdf(grid)
    if np.any(y <= 0):
        raise InsufficientDataError(f"CCDF reaches zero inside [{lo}, {hi}]")
    y = np.log(y)
    fit = np.polyval(np.polyfit(grid, y, 1), grid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    return 1.0 if ss_tot == 0 else 1.0 - float(((y - fit) ** 2).sum()) / ss_tot


def regime_change(ccdf: Ccdf, lo: float, hi: float, n_points: int = 96) -> float:
    """Breakpoint of the best power-law-then-exponential fit of the CCDF.

    Below the breakpoint log CCDF is fitted linearly in log t, above it
    linearly in t. Returns the breakpoint (seconds) minimising the total
    squared residual on a log grid over [lo, hi].
    """
    grid = np.geomspace(lo, hi, n_points)
    y = ccdf(grid)
    if np.any(y <= 0):
        raise InsufficientDataError("CCDF reaches zero inside the fit range")
    y = np.log(y)
    logt = np.log(grid)

    def sse(x, yy):
        if x.size < 3:
            return 0.0
        coef = np.polyfit(x, yy, 1)
        return float(((yy - np.polyval(coef, x)) ** 2).sum())

    best, best_k = math.inf, 3
    for k in range(3, n_points - 3):
        cost = sse(logt[:k], y[:k]) + sse(grid[k:] / grid[-1], y[k:])
        if cost < best:
            best, best_k = cost, k
    return float(grid[best_k])


def write_ccdf_csv(ccdf: Ccdf, dest) -> None:
    close = False
    if not hasattr(dest, "write"):
        dest = open(dest, "w", newline="", encoding="utf-8")
        close = True
    try:
        w = csv.writer(dest, lineterminator="\n")
        w.writerow(["t_seconds", "ccdf"])
        for t, p in ccdf.points:
            w.writerow([f"{t:g}", repr(p)])
    finally:
        if close:
            dest.close()


def ccdf_csv_text(ccdf: Ccdf) -> str:
    buf = io.StringIO()
    write_ccdf_csv(ccdf, buf)
    return buf.getvalue()


def read_ccdf_csv(source) -> Ccdf:
    close = False
    if not hasattr(source, "read"):
        source = open(source, newline="", encoding="utf-8")
        close = True
    try:
        rows = list(csv.DictReader(source))
    finally:
        if close:
            source.close()
    return Ccdf([float(r["t_seconds"]) for r in rows], [float(r["ccdf"]) for r in rows])
