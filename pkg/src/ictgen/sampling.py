"""Seedable random streams and the five samplers used by the trace model.

Every stream is keyed by ``(seed, substream_id)`` on a Philox counter-based
generator, so the draws a pair (or an epidemic run) sees never depend on the
order in which other pairs were generated.

Closed-form samplers (Pareto, exponential, normal, uniform) consume exactly
one uniform each. The gamma sampler is a rejection method and its draw count
is not fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .errors import ConfigurationError

_BLOCK = 128
_MASK64 = (1 << 64) - 1
_STD_NORMAL = NormalDist()
_TINY = 2.0 ** -53


class RandomStream:
    """Single-owner source of uniforms for one ``(seed, substream_id)`` key."""

    def __init__(self, seed: int, substream_id: int = 0):
        self.seed = int(seed) & _MASK64
        self.substream_id = int(substream_id) & _MASK64
        bitgen = np.random.Philox(key=[self.seed, self.substream_id])
        self._gen = np.random.Generator(bitgen)
        self._buf: list[float] = []
        self._pos = 0

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, substream_id={self.substream_id})"

    def uniform(self) -> float:
        """Next uniform on [0, 1)."""
        if self._pos >= len(self._buf):
            self._buf = self._gen.random(_BLOCK).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u

    def choice(self, n: int) -> int:
        """Uniform integer in ``range(n)``."""
        if n <= 0:
            raise ValueError("choice() needs n >= 1")
        return min(int(self.uniform() * n), n - 1)

    def sample_without_replacement(self, population: list, k: int) -> list:
        """Partial Fisher-Yates shuffle; returns ``k`` distinct items."""
        pool = list(population)
        if not 0 <= k <= len(pool):
            raise ValueError(f"cannot draw {k} items from {len(pool)}")
        for idx in range(k):
            jdx = idx + self.choice(len(pool) - idx)
            pool[idx], pool[jdx] = pool[jdx], pool[idx]
        return pool[:k]


@dataclass(frozen=True)
class ParetoParams:
    alpha: float
    x_min: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ConfigurationError(f"Pareto alpha must be > 0, got {self.alpha}")
        if not (math.isfinite(self.x_min) and self.x_min > 0):
            raise ConfigurationError(f"Pareto x_min must be > 0, got {self.x_min}")

    def sf(self, x: float) -> float:
        return 1.0 if x <= self.x_min else (x / self.x_min) ** -self.alpha


@dataclass(frozen=True)
class GammaParams:
    """Shape-rate gamma: density ``x**(shape-1) * rate**shape * exp(-rate*x) / Gamma(shape)``."""

    shape: float
    rate: float

    def __post_init__(self):
        if not (math.isfinite(self.shape) and self.shape > 0):
            raise ConfigurationError(f"gamma shape must be > 0, got {self.shape}")
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise ConfigurationError(f"gamma rate must be > 0, got {self.rate}")

    @property
    def mean(self) -> float:
        return self.shape / self.rate


def pareto_from_uniform(params: ParetoParams, u: float) -> float:
    return params.x_min * (1.0 - u) ** (-1.0 / params.alpha)


def sample_pareto(params: ParetoParams, stream: RandomStream) -> float:
    """Inverse-CDF Pareto draw; survival ``(x / x_min) ** -alpha``."""
    return pareto_from_uniform(params, stream.uniform())


def sample_exponential(rate: float, stream: RandomStream) -> float:
    """Exponential draw with the given rate (mean ``1 / rate``)."""
    if not (math.isfinite(rate) and rate > 0):
        raise ConfigurationError(f"exponential rate must be finite and > 0, got {rate}")
    u = stream.uniform()
    return -math.log1p(-u) / rate


def sample_normal(mu: float, sigma: float, stream: RandomStream) -> float:
    if not (math.isfinite(mu) and math.isfinite(sigma)) or sigma < 0:
        raise ConfigurationError(f"bad normal parameters mu={mu}, sigma={sigma}")
    u = stream.uniform()
    if sigma == 0:
        return float(mu)
    return mu + sigma * _STD_NORMAL.inv_cdf(max(u, _TINY))


def sample_uniform(lo: float, hi: float, stream: RandomStream) -> float:
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise ConfigurationError(f"bad uniform interval [{lo}, {hi}]")
    u = stream.uniform()
    return lo + (hi - lo) * u


def _standard_normal(stream: RandomStream) -> float:
    return _STD_NORMAL.inv_cdf(max(stream.uniform(), _TINY))


def sample_gamma(params: GammaParams, stream: RandomStream) -> float:
    """Marsaglia-Tsang squeeze/rejection sampler.

    For shape < 1 the shape is boosted by one and the result multiplied by
    ``U ** (1 / shape)``, which avoids the singular density at zero.
    """
    shape = params.shape
    boost = 1.0
    if shape < 1.0:
        # 1 - U is in (0, 1], so the factor is never exactly zero
        boost = (1.0 - stream.uniform()) ** (1.0 / shape)
        shape += 1.0
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = _standard_normal(stream)
        v = 1.0 + c * x
        if v <= 0:
            continue
        v = v * v * v
        u = 1.0 - stream.uniform()
        if u < 1.0 - 0.0331 * x ** 4:
            break
        if math.log(u) < 0.5 * x * x + d * (1.0 - v + math.log(v)):
            break
    out = d * v * boost / params.rate
    # guard the (astronomically unlikely) underflow of the boost factor
    return out if out > 0 else math.ldexp(1.0, -1074)
