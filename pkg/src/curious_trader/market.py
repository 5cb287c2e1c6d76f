"""Price series: seeded geometric Brownian motion and CSV ingestion.

CSV layout (UTF-8, ``\\n`` line endings)::

    index,price
    0,100.0
    1,101.25

``index`` is an unsigned integer, strictly increasing; ``price`` is a positive
decimal using ``.`` as separator.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NonMonotoneIndex, NonPositivePrice, ParseError, TooFewTicks
from .numerics import Rng, gaussian_sample

CSV_HEADER = "index,price"
_UINT = re.compile(r"[0-9]+")
_DECIMAL = re.compile(r"[+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)([eE][+-]?[0-9]+)?")


@dataclass(frozen=True, eq=False)
class PriceSeries:
    symbol: str
    index: np.ndarray
    price: np.ndarray

    def __post_init__(self):
        index = np.asarray(self.index, dtype=np.int64)
        price = np.asarray(self.price, dtype=float)
        if index.shape != price.shape or index.ndim != 1:
            raise ValueError("index and price must be 1-D arrays of equal length")
        if np.any(~np.isfinite(price)) or np.any(price <= 0):
            raise NonPositivePrice("prices must be finite and positive")
        if np.any(np.diff(index) <= 0):
            raise NonMonotoneIndex("indices must be strictly increasing")
        index.setflags(write=False)
        price.setflags(write=False)
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "price", price)

    def __len__(self):
        return self.price.size

    @property
    def ticks(self) -> list[tuple[int, float]]:
        return list(zip(self.index.tolist(), self.price.tolist()))

    def __eq__(self, other):
        if not isinstance(other, PriceSeries):
            return NotImplemented
        return (self.symbol == other.symbol and np.array_equal(self.index, other.index)
                and np.array_equal(self.price, other.price))


@dataclass(frozen=True)
class GbmParams:
    s0: float = 100.0
    mu: float = 0.0  # drift per tick
    sigma: float = 0.01  # volatility per tick
    horizon: int = 1000  # number of ticks after the start

    def __post_init__(self):
        if not self.s0 > 0:
            raise ValueError(f"s0 must be > 0, got {self.s0}")
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")


def generate_gbm(params: GbmParams, seed: int, symbol: str = "GBM") -> PriceSeries:
    """``horizon + 1`` prices with S_{t+1} = S_t exp((mu - sigma^2/2) + sigma Z_t).

    Prices are formed from the cumulative log path, so ``sigma == 0`` yields
    ``s0 * exp(mu * t)`` exactly.
    """
    t = np.arange(params.horizon + 1)
    shocks = np.zeros(params.horizon + 1)
    if params.sigma > 0:
        shocks[1:] = np.cumsum(gaussian_sample(Rng(seed), params.horizon))
    drift = params.mu - 0.5 * params.sigma**2
    log_path = drift * t + params.sigma * shocks
    return PriceSeries(symbol, t, params.s0 * np.exp(log_path))


def to_return_series(series: PriceSeries) -> np.ndarray:
    """Log returns ln(S_{t+1} / S_t)."""
    if len(series) < 2:
        raise TooFewTicks(f"need at least 2 ticks, got {len(series)}")
    return np.log(series.price[1:] / series.price[:-1])


def write_csv(series: PriceSeries, path) -> None:
    lines = [CSV_HEADER]
    lines += [f"{i},{p!r}" for i, p in zip(series.index.tolist(), series.price.tolist())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def ingest_csv(path, symbol: str | None = None) -> PriceSeries:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != CSV_HEADER:
        raise ParseError(f"expected header {CSV_HEADER!r}", line=1)
    index, price = [], []
    for lineno, raw in enumerate(lines[1:], start=2):
        parts = raw.split(",")
        if len(parts) != 2:
            raise ParseError(f"expected 2 fields, got {len(parts)}", line=lineno)
        idx_text, price_text = parts
        if not _UINT.fullmatch(idx_text):
            raise ParseError(f"index {idx_text!r} is not an unsigned integer", line=lineno)
        if not _DECIMAL.fullmatch(price_text):
            raise ParseError(f"price {price_text!r} is not a decimal number", line=lineno)
        value = float(price_text)
        if not math.isfinite(value) or value <= 0:
            raise NonPositivePrice(f"price {price_text} is not positive", line=lineno)
        if index and int(idx_text) <= index[-1]:
            raise NonMonotoneIndex(f"index {idx_text} does not increase", line=lineno)
        index.append(int(idx_text))
        price.append(value)
    return PriceSeries(symbol or path.stem, np.array(index, dtype=np.int64), np.array(price))
