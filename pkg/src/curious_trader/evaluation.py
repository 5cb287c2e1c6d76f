"""Risk metrics, trade grading and a quantitative Turing-style indistinguishability test.

All metrics are per tick; nothing is annualized.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .divergence import Divergence, bc_normal_1d
from .errors import NoAnswers, TooFewReturns, ZeroVariance
from .numerics import fit_gaussian_summary

MIN_VAR_RETURNS = 20
MIN_TURING_RETURNS = 30


class Direction(enum.Enum):
    LONG = "Long"
    SHORT = "Short"
    FLAT = "Flat"


class Grade(enum.Enum):
    GOOD = "Good"
    BAD = "Bad"


class Verdict(enum.Enum):
    INDISTINGUISHABLE = "Indistinguishable"
    DISTINGUISHABLE = "Distinguishable"


@dataclass(frozen=True)
class TradeRecord:
    open_t: int
    close_t: int
    direction: Direction
    declared_loss_bound: float  # declared before the trade closes
    realized_pnl: float

    def __post_init__(self):
        if self.close_t < self.open_t:
            raise ValueError("close_t precedes open_t")
        if not self.declared_loss_bound >= 0:
            raise ValueError("declared_loss_bound must be non-negative")


@dataclass(frozen=True, eq=False)
class TrackRecord:
    equity: np.ndarray
    returns: np.ndarray
    trades: tuple[TradeRecord, ...] = ()

    def __post_init__(self):
        equity = np.asarray(self.equity, dtype=float)
        returns = np.asarray(self.returns, dtype=float)
        if equity.ndim != 1 or equity.size < 1 or np.any(equity <= 0):
            raise ValueError("equity must be a non-empty vector of positive values")
        if returns.shape != (equity.size - 1,):
            raise ValueError("returns must have one entry fewer than equity")
        implied = equity[1:] / equity[:-1] - 1.0
        if not np.allclose(returns, implied, rtol=0.0, atol=1e-10):
            raise ValueError("returns are inconsistent with the equity curve")
        object.__setattr__(self, "equity", equity)
        object.__setattr__(self, "returns", returns)
        object.__setattr__(self, "trades", tuple(self.trades))

    @classmethod
    def from_equity(cls, equity, trades: Sequence[TradeRecord] = ()) -> "TrackRecord":
        equity = np.asarray(equity, dtype=float)
        return cls(equity, equity[1:] / equity[:-1] - 1.0, tuple(trades))

    @classmethod
    def from_returns(cls, returns, start: float = 1.0,
                     trades: Sequence[TradeRecord] = ()) -> "TrackRecord":
        returns = np.asarray(returns, dtype=float)
        equity = start * np.concatenate([[1.0], np.cumprod(1.0 + returns)])
        return cls(equity, equity[1:] / equity[:-1] - 1.0, tuple(trades))

    def __eq__(self, other):
        if not isinstance(other, TrackRecord):
            return NotImplemented
        return (np.array_equal(self.equity, other.equity)
                and np.array_equal(self.returns, other.returns) and self.trades == other.trades)


# ------------------------------------------------------------------------- metrics


def sharpe(returns, risk_free_per_tick: float = 0.0) -> float:
    """Mean excess return over its sample standard deviation."""
    excess = np.asarray(returns, dtype=float) - risk_free_per_tick
    if excess.size < 2:
        raise TooFewReturns("Sharpe ratio needs at least 2 returns")
    if np.all(excess == excess[0]):
        raise ZeroVariance("returns have zero variance")
    std = float(np.std(excess, ddof=1))
    if std == 0.0:
        raise ZeroVariance("returns have zero variance")
    return float(np.mean(excess)) / std


def max_drawdown(equity) -> float:
    """Largest fall from a running peak, as a fraction of that peak."""
    equity = np.asarray(equity, dtype=float)
    if equity.size == 0:
        raise ValueError("equity curve is empty")
    if np.any(equity <= 0):
        raise ValueError("equity must be positive")
    peaks = np.maximum.accumulate(equity)
    return float(np.max((peaks - equity) / peaks))


def value_at_risk(returns, level: float = 0.95) -> float:
    """Historical VaR: minus the empirical ``1 - level`` quantile, floored at zero."""
    returns = np.asarray(returns, dtype=float)
    if returns.size < MIN_VAR_RETURNS:
        raise TooFewReturns(f"VaR needs at least {MIN_VAR_RETURNS} returns, got {returns.size}")
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    prob = 1.0 - level
    pos = (returns.size - 1) * prob
    lo = math.floor(pos)
    hi = min(lo + 1, returns.size - 1)
    # only the two order statistics around the quantile are needed
    part = np.partition(returns, sorted({lo, hi}))
    return max(0.0, -(float(part[lo]) + (pos - lo) * (float(part[hi]) - float(part[lo]))))


@dataclass(frozen=True)
class Metrics:
    sharpe: float
    max_drawdown: float
    var_95: float

    def as_dict(self) -> dict:
        return {"sharpe": self.sharpe, "max_drawdown": self.max_drawdown, "var_95": self.var_95}


def metrics(record: TrackRecord, risk_free_per_tick: float = 0.0) -> Metrics:
    """Metric triple; an undefined (zero-variance) Sharpe ratio is reported as 0."""
    try:
        sr = sharpe(record.returns, risk_free_per_tick)
    except ZeroVariance:
        sr = 0.0
    return Metrics(sr, max_drawdown(record.equity), value_at_risk(record.returns, 0.95))


# ------------------------------------------------------------------ trade grading


@dataclass(frozen=True)
class TradeAssessment:
    grade: Grade
    deviation: float  # realized loss / declared bound; 0 for profitable trades


def classify_trade(trade: TradeRecord) -> TradeAssessment:
    """A trade is good if it made money or lost no more than it declared up front."""
    if trade.realized_pnl >= 0:
        return TradeAssessment(Grade.GOOD, 0.0)
    loss = -trade.realized_pnl
    bound = trade.declared_loss_bound
    deviation = loss / bound if bound > 0 else math.inf
    return TradeAssessment(Grade.GOOD if loss <= bound else Grade.BAD, deviation)


def good_trade_fraction(trades: Sequence[TradeRecord]) -> float | None:
    if not trades:
        return None
    return sum(classify_trade(t).grade is Grade.GOOD for t in trades) / len(trades)


# ----------------------------------------------------------------- Turing test


@dataclass(frozen=True)
class Bands:
    """How strict the test administrator is."""

    threshold: float = 0.05
    sharpe: float = 0.5
    max_drawdown: float = 0.1
    var_95: float = 0.02


@dataclass(frozen=True)
class TuringReport:
    metrics_a: Metrics
    metrics_b: Metrics
    pnl_distance: Divergence
    verdict: Verdict
    bands: Bands = field(default_factory=Bands)

    @property
    def threshold(self) -> float:
        return self.bands.threshold

    def to_json(self) -> dict:
        return {
            "metrics_a": self.metrics_a.as_dict(),
            "metrics_b": self.metrics_b.as_dict(),
            "rho": self.pnl_distance.coefficient,
            "distance": self.pnl_distance.distance,
            "verdict": self.verdict.value,
            "threshold": self.bands.threshold,
            "bands": {"sharpe": self.bands.sharpe, "max_drawdown": self.bands.max_drawdown,
                      "var_95": self.bands.var_95},
        }


def return_distance(a, b) -> Divergence:
    """Bhattacharyya divergence between normal fits of two return series."""
    fa, fb = fit_gaussian_summary(a), fit_gaussian_summary(b)
    return bc_normal_1d((fa.mean[0], fa.cov[0, 0]), (fb.mean[0], fb.cov[0, 0]))


def turing_test(a: TrackRecord, b: TrackRecord, threshold: float | None = None,
                bands: Bands | None = None, risk_free_per_tick: float = 0.0) -> TuringReport:
    bands = bands or Bands()
    if threshold is not None:
        bands = Bands(threshold, bands.sharpe, bands.max_drawdown, bands.var_95)
    for name, rec in (("a", a), ("b", b)):
        if rec.returns.size < MIN_TURING_RETURNS:
            raise TooFewReturns(f"record {name} has {rec.returns.size} returns; "
                                f"need {MIN_TURING_RETURNS}")
    ma, mb = metrics(a, risk_free_per_tick), metrics(b, risk_free_per_tick)
    dist = return_distance(a.returns, b.returns)
    close = (dist.distance <= bands.threshold
             and abs(ma.sharpe - mb.sharpe) <= bands.sharpe
             and abs(ma.max_drawdown - mb.max_drawdown) <= bands.max_drawdown
             and abs(ma.var_95 - mb.var_95) <= bands.var_95)
    verdict = Verdict.INDISTINGUISHABLE if close else Verdict.DISTINGUISHABLE
    return TuringReport(ma, mb, dist, verdict, bands)


# -------------------------------------------------------------- ranking, coverage


def composite_score(record: TrackRecord, risk_free_per_tick: float = 0.0) -> float:
    """``sharpe - max_drawdown - var_95``; ``-inf`` when the Sharpe ratio is undefined."""
    try:
        sr = sharpe(record.returns, risk_free_per_tick)
    except ZeroVariance:
        return -math.inf
    return sr - max_drawdown(record.equity) - value_at_risk(record.returns, 0.95)


def rank_records(records: Sequence[TrackRecord], risk_free_per_tick: float = 0.0) -> list[int]:
    """Indices ordered best first: higher score, then lower VaR, then input order."""
    keys = []
    for i, rec in enumerate(records):
        keys.append((-composite_score(rec, risk_free_per_tick),
                     value_at_risk(rec.returns, 0.95), i))
    return [k[2] for k in sorted(keys)]


def calibration(answers: Sequence[tuple[tuple[float, float], float]]) -> float:
    """Fraction of realized returns falling inside their (lo, hi) intervals."""
    if not answers:
        raise NoAnswers("no intervals to score")
    hits = sum(lo <= realized <= hi for (lo, hi), realized in answers)
    return hits / len(answers)
