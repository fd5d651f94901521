"""Global model parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import ConfigurationError
from .sampling import GammaParams

PIECEWISE = "piecewise"
EXPONENTIAL = "exponential-pairwise"
VARIANTS = (PIECEWISE, EXPONENTIAL)

# Exponents the model needs but that have no published value.
DEFAULT_ALPHA_ICT = 0.6
DEFAULT_ALPHA_C = 1.8


@dataclass(frozen=True)
class SimConfig:
    """All knobs of the generator.

    Times are seconds except ``d_sim`` (days). ``T_e`` is a contact rate in
    contacts per second. ``periodic=False`` removes the time-of-day term and
    switches day gaps from whole days to continuous day counts.
    """

    n_users: int = 100
    d_sim: int = 100
    d_day: int = 86400
    mu_day: float = 43200.0
    sigma_day: float = 50.0
    granularity: int = 300
    T: float = 6030.0
    gamma: GammaParams = field(default_factory=lambda: GammaParams(0.19, 0.072))
    T_e: float = 5.79e-7
    alpha_ict: float = DEFAULT_ALPHA_ICT
    alpha_c: float = DEFAULT_ALPHA_C
    seed: int | None = None
    variant: str = PIECEWISE
    periodic: bool = True

    def __post_init__(self):
        def bad(msg):
            raise ConfigurationError(msg)

        for name in ("n_users", "d_sim", "d_day", "granularity"):
            val = getattr(self, name)
            if isinstance(val, bool) or not isinstance(val, int):
                bad(f"{name} must be an integer, got {val!r}")
        for name in ("mu_day", "sigma_day", "T", "T_e", "alpha_ict", "alpha_c"):
            if not math.isfinite(getattr(self, name)):
                bad(f"{name} must be finite")
        if self.n_users < 2:
            bad("n_users must be >= 2")
        if self.d_sim < 1:
            bad("d_sim must be >= 1 day")
        if self.granularity <= 0:
            bad("granularity must be > 0")
        if self.d_day <= 0 or self.d_day % self.granularity:
            bad("d_day must be a positive multiple of granularity")
        if self.T < self.granularity:
            bad("T must be >= granularity")
        if not 0 < self.mu_day < self.d_day:
            bad("mu_day must lie strictly inside the day")
        if self.sigma_day < 0:
            bad("sigma_day must be >= 0")
        if self.T_e <= 0:
            bad("T_e must be > 0")
        if self.alpha_ict <= 0 or self.alpha_c <= 0:
            bad("alpha_ict and alpha_c must be > 0")
        if self.variant not in VARIANTS:
            bad(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.seed is not None and (isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0):
            bad("seed must be a non-negative integer")

    @property
    def T_duration(self) -> int:
        return self.d_sim * self.d_day

    @property
    def n_pairs(self) -> int:
        return self.n_users * (self.n_users - 1) // 2

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)


DEFAULTS = SimConfig(seed=0)
