"""Bass diffusion curves and their conversion into integer information arrivals.

Time is measured in simulation ticks, so ``p`` and ``q`` are per-tick rates.
One adopter corresponds to one information element.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class BassParams:
    p: float  # innovation coefficient
    q: float  # imitation coefficient
    m: int  # ultimate market potential (items)

    def __post_init__(self):
        if not self.p > 0:
            raise ValueError(f"innovation coefficient p must be > 0, got {self.p}")
        if not self.q >= 0:
            raise ValueError(f"imitation coefficient q must be >= 0, got {self.q}")
        if not self.m >= 1:
            raise ValueError(f"market potential m must be >= 1, got {self.m}")

    @property
    def peak_time(self) -> float:
        """Time of maximum sales; zero when imitation does not exceed innovation."""
        if self.q <= self.p:
            return 0.0
        return math.log(self.q / self.p) / (self.p + self.q)


def _parts(params: BassParams, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    rate = params.p + params.q
    decay = np.exp(-rate * t)
    denom = 1.0 + (params.q / params.p) * decay
    return t, rate, decay, denom


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def bass_cdf(params: BassParams, t):
    """Installed-base fraction F(t)."""
    t, rate, _, denom = _parts(params, t)
    return _scalar(-np.expm1(-rate * t) / denom)


def bass_survival(params: BassParams, t):
    """1 - F(t), evaluated without cancellation for large t."""
    _, rate, decay, denom = _parts(params, t)
    return _scalar(decay * (rate / params.p) / denom)


def bass_density(params: BassParams, t):
    """Adoption rate f(t) = (p + q F(t)) (1 - F(t))."""
    return _scalar((params.p + params.q * np.asarray(bass_cdf(params, t))) *
                   np.asarray(bass_survival(params, t)))


def bass_sales(params: BassParams, t):
    """S(t) = m (p+q)^2/p * e^{-(p+q)t} / (1 + (q/p) e^{-(p+q)t})^2."""
    _, rate, decay, denom = _parts(params, t)
    return _scalar(params.m * rate**2 / params.p * decay / denom**2)


@dataclass(frozen=True)
class ArrivalState:
    params: BassParams
    last_t: float = 0.0
    fractional_carry: float = 0.0

    def __post_init__(self):
        if self.last_t < 0:
            raise ValueError("last_t must be >= 0")


def _adopted(params: BassParams, t: float) -> int:
    return math.floor(params.m * bass_cdf(params, t))


def arrivals_between(state: ArrivalState, t_next: float) -> tuple[int, ArrivalState]:
    """Whole new items adopted on ``(state.last_t, t_next]`` and the advanced state.

    The count equals ``floor(m*(F(t_next) - F(last_t)) + carry)`` where the carry
    is the fractional part of ``m*F(last_t)``.  It is evaluated as the difference of
    the cumulative floors so that any partition of ``[0, T]`` emits exactly
    ``floor(m*F(T))`` items in total.
    """
    if t_next < state.last_t:
        raise ValueError(f"t_next={t_next} precedes last_t={state.last_t}")
    if t_next == state.last_t:
        return 0, state
    params = state.params
    before = _adopted(params, state.last_t)
    level = params.m * bass_cdf(params, t_next)
    after = math.floor(level)
    return after - before, replace(state, last_t=t_next, fractional_carry=level - after)
