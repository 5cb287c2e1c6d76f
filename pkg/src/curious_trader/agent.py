"""A trading agent that accumulates information and knows when to ask.

Information arrives on a Bass diffusion clock.  Each arrival snapshots a window
of recent log returns and keeps its normal fit.  Stored elements are compared
pairwise with the Bhattacharyya distance after a shared JL projection, and a pair
is linked only when its distance falls inside the curiosity band: related, but
not redundant.  Decisions pool the elements whose distance to the latest window
lies in the same band; too little evidence produces ``DontKnow``, which is a
request to be taught.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Sequence

import numpy as np

from .bass_diffusion import ArrivalState, BassParams, arrivals_between
from .divergence import Divergence
from .errors import TooFewElements
from .evaluation import Direction, TrackRecord, TradeRecord, composite_score, rank_records
from .jl_projection import (JlCertificate, ProjectedSummary, compare_projected, make_map,
                            pair_seeds, project_summary)
from .market import PriceSeries, to_return_series
from .numerics import GaussianSummary, fit_gaussian_summary


class Action(enum.Enum):
    BUY = "Buy"
    SELL = "Sell"
    HOLD = "Hold"
    DONT_KNOW = "DontKnow"


@dataclass(frozen=True)
class AgentParams:
    bass: BassParams = BassParams(p=0.01, q=0.1, m=64)
    band: tuple[float, float] = (0.05, 1.0)
    epsilon: float = 0.5
    buy_z: float = 1.0
    sell_z: float = 1.0
    confidence: float = 0.95
    min_connected: float = 3  # math.inf: never confident without a lesson
    window: int = 32
    seed: int = 0
    # descriptive labels only; they do not change behaviour
    horizon: str | None = None
    objective: str | None = None

    def __post_init__(self):
        lo, hi = self.band
        object.__setattr__(self, "band", (float(lo), float(hi)))
        if not 0.0 <= lo < hi:
            raise ValueError(f"band must satisfy 0 <= d_lo < d_hi, got {self.band}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not (self.buy_z > 0 and self.sell_z > 0):
            raise ValueError("buy_z and sell_z must be positive")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError(f"confidence must lie in (0, 1), got {self.confidence}")
        if not self.min_connected >= 0:
            raise ValueError("min_connected must be >= 0")
        if self.window < 2:
            raise ValueError("window must hold at least 2 returns")


@dataclass(frozen=True, eq=False)
class InfoElement:
    id: int
    arrival_t: float
    features: np.ndarray  # location of the element: its fitted mean vector
    summary: GaussianSummary
    taught: bool = False
    lesson: Action | None = None
    outcome: float | None = None  # realized next return supplied by a teacher

    @property
    def forecast(self) -> tuple[float, float]:
        """(mean, variance) this element predicts for the next return."""
        mean = self.summary.mean[-1] if self.outcome is None else self.outcome
        return float(mean), float(self.summary.cov[-1, -1])


@dataclass(frozen=True)
class Edge:
    a: int
    b: int
    distance: float
    strength: float


@dataclass(frozen=True)
class ConnectionGraph:
    nodes: tuple[int, ...]
    edges: tuple[Edge, ...]

    def degree(self, node: int) -> int:
        return sum(node in (e.a, e.b) for e in self.edges)


@dataclass(frozen=True)
class Answer:
    verdict: Action
    confidence_interval: tuple[float, float] | None = None
    basis: tuple[int, ...] = ()
    learning_request: bool = False
    mean: float | None = None
    std: float | None = None
    n_eff: float = 0.0

    def to_json(self) -> dict:
        lo, hi = self.confidence_interval or (None, None)
        return {"verdict": self.verdict.value, "ci_lo": lo, "ci_hi": hi,
                "basis_count": len(self.basis)}


def _dont_know() -> Answer:
    return Answer(Action.DONT_KNOW, None, (), learning_request=True)


class Agent:
    """Single-owner trader state.  ``tick``, ``link`` and ``teach`` mutate it in place."""

    def __init__(self, params: AgentParams | None = None):
        self.params = params or AgentParams()
        self.arrivals = ArrivalState(self.params.bass)
        self.store: list[InfoElement] = []
        self.pending = 0
        self._projections: dict[tuple[int, int, int], ProjectedSummary] = {}
        self._pairs: dict[tuple[int, int], Divergence] = {}

    # ------------------------------------------------------------ information intake

    @property
    def last_t(self) -> float:
        return self.arrivals.last_t

    def tick(self, t: float, observation: Sequence[float]) -> list[InfoElement]:
        """Advance the Bass clock to ``t`` and snapshot one window per arrival.

        The j-th arrival of this tick takes the ``window`` returns ending ``j``
        ticks before the end of ``observation``.  Arrivals that find fewer than two
        returns stay pending until a longer observation is supplied.
        """
        count, self.arrivals = arrivals_between(self.arrivals, t)
        self.pending += count
        obs = np.asarray(observation, dtype=float)
        created = []
        for j in range(self.pending):
            end = obs.size - j
            if end < 2:
                break
            window = obs[max(0, end - self.params.window):end]
            created.append(self._add(t, fit_gaussian_summary(window)))
        self.pending -= len(created)
        return created

    def teach(self, window: Sequence[float], verdict: Action | None = None,
              realized: float | None = None) -> InfoElement:
        """Store a lesson for ``window`` outside the Bass clock.

        ``verdict`` is the answer the teacher wants for this situation and
        ``realized`` the next return that actually followed; either or both may
        be given.
        """
        if verdict is Action.DONT_KNOW:
            raise ValueError("a lesson must carry a real verdict")
        return self._add(self.last_t, fit_gaussian_summary(window), taught=True,
                         lesson=verdict, outcome=None if realized is None else float(realized))

    def _add(self, t, summary, **kw) -> InfoElement:
        elem = InfoElement(len(self.store), float(t), summary.mean.copy(), summary, **kw)
        self.store.append(elem)
        return elem

    # ------------------------------------------------------------------- comparison

    def _projected(self, key, summary: GaussianSummary, pmap) -> ProjectedSummary:
        cache_key = (key, pmap.seed, pmap.d)
        hit = self._projections.get(cache_key)
        if hit is None:
            hit = project_summary(summary, pmap)
            if key is not None:
                self._projections[cache_key] = hit
        return hit

    def distances(self, anchor: GaussianSummary, elements: Sequence[InfoElement],
                  anchor_id: int | None = None) -> list[Divergence]:
        """Aligned Bhattacharyya divergence from ``anchor`` to each element.

        Every pair goes through the map ``pair_map(anchor.mean, element.features)``
        would pick; pairs sharing a map are compared in one batch.
        """
        if not elements:
            return []
        p = self.params
        d, seeds = pair_seeds(anchor.mean, [e.features for e in elements], p.epsilon, p.seed)
        cert = JlCertificate.for_points(p.epsilon, 2, d)
        out: list[Divergence | None] = [None] * len(elements)
        for chosen in np.unique(seeds):
            pmap = make_map(d, cert, int(chosen))
            idx = np.flatnonzero(seeds == chosen)
            head = self._projected(anchor_id, anchor, pmap)
            others = [self._projected(elements[i].id, elements[i].summary, pmap) for i in idx]
            for i, dist in zip(idx, compare_projected(head, others)):
                out[i] = Divergence.from_distance(float(dist))
        return out

    def pair_divergence(self, a: InfoElement, b: InfoElement) -> Divergence:
        key = (min(a.id, b.id), max(a.id, b.id))
        if key not in self._pairs:
            self._fill_pairs(self.store[key[1]])
        return self._pairs[key]

    def _fill_pairs(self, elem: InfoElement) -> None:
        earlier = self.store[: elem.id]
        if not earlier or (0, elem.id) in self._pairs:
            return
        for other, div in zip(earlier, self.distances(elem.summary, earlier, elem.id)):
            self._pairs[(other.id, elem.id)] = div

    def in_band(self, div: Divergence) -> bool:
        lo, hi = self.params.band
        return not div.is_infinite and lo <= div.distance <= hi

    def link(self) -> ConnectionGraph:
        """Graph over the whole store; an edge joins every pair inside the band."""
        if len(self.store) < 2:
            raise TooFewElements(f"need at least 2 stored elements, have {len(self.store)}")
        for elem in self.store[1:]:
            self._fill_pairs(elem)
        edges = []
        for j in range(1, len(self.store)):
            for i in range(j):
                div = self._pairs[(i, j)]
                if self.in_band(div):
                    edges.append(Edge(i, j, div.distance, div.coefficient))
        return ConnectionGraph(tuple(e.id for e in self.store), tuple(edges))

    # --------------------------------------------------------------------- decision

    def evidence(self, graph: ConnectionGraph | None, window: Sequence[float]):
        """Band neighbours of the window among graph nodes, and applicable lessons.

        Returns ``(neighbours, lessons)`` as lists of ``(element, divergence)``.
        A lesson applies when its distance to the window is at most ``d_hi``.
        """
        query = fit_gaussian_summary(window)
        nodes = set(graph.nodes) if graph is not None else set()
        market = [e for e in self.store if e.id in nodes and not e.taught]
        lessons = [e for e in self.store if e.taught]
        divs = self.distances(query, market + lessons)
        neighbours = [(e, d) for e, d in zip(market, divs) if self.in_band(d)]
        hi = self.params.band[1]
        applicable = [(e, d) for e, d in zip(lessons, divs[len(market):])
                      if not d.is_infinite and d.distance <= hi]
        return neighbours, applicable

    def decide(self, graph: ConnectionGraph | None, window: Sequence[float]) -> Answer:
        """Buy, Sell, Hold or DontKnow for the return following ``window``.

        With fewer than ``min_connected`` neighbours and no applicable lesson the
        answer is DontKnow.  Otherwise neighbours are weighted by their
        coefficient and lessons by 1; the pooled mean is tested against zero
        with ``n_eff`` = total weight, and the interval is
        ``mean +- z * std * sqrt(1 + 1/n_eff)``.  The closest lesson that names a
        verdict overrides the z rule.
        """
        p = self.params
        neighbours, lessons = self.evidence(graph, window)
        if not lessons and (not neighbours or len(neighbours) < p.min_connected):
            return _dont_know()
        weights, means, variances, basis = [], [], [], []
        for elem, div in neighbours:
            weights.append(div.coefficient)
        for elem, div in lessons:
            weights.append(1.0)
        for elem, _ in neighbours + lessons:
            mu, var = elem.forecast
            means.append(mu)
            variances.append(var)
            basis.append(elem.id)
        w = np.array(weights)
        n_eff = float(w.sum())
        mean = float(w @ np.array(means)) / n_eff
        std = math.sqrt(float(w @ np.array(variances)) / n_eff)
        z = mean / (std / math.sqrt(n_eff))
        if z > p.buy_z:
            verdict = Action.BUY
        elif z < -p.sell_z:
            verdict = Action.SELL
        else:
            verdict = Action.HOLD
        labelled = [(d.distance, -e.id, e.lesson) for e, d in lessons if e.lesson is not None]
        if labelled:
            verdict = min(labelled, key=lambda x: (x[0], x[1]))[2]
        half = NormalDist().inv_cdf(0.5 + p.confidence / 2.0) * std * math.sqrt(1.0 + 1.0 / n_eff)
        return Answer(verdict, (mean - half, mean + half), tuple(sorted(basis)), False,
                      mean, std, n_eff)


# ------------------------------------------------------------------------- runs


@dataclass(frozen=True)
class AnswerRow:
    tick: int
    answer: Answer
    realized: float  # log return that followed the decision

    def to_json(self) -> dict:
        return {"tick": self.tick, **self.answer.to_json()}


@dataclass
class AgentRun:
    params: AgentParams
    record: TrackRecord
    answers: list[AnswerRow]
    agent: Agent = field(repr=False)


_POSITION = {Action.BUY: 1, Action.SELL: -1}
_DIRECTION = {1: Direction.LONG, -1: Direction.SHORT}


def run_agent(params: AgentParams, series: PriceSeries) -> AgentRun:
    """Walk the agent forward over ``series`` one decision per tick.

    At tick ``t`` the agent sees log returns ``r[0..t-1]``, decides, and carries
    the resulting position over ``r[t]``.  Buy goes long one unit of equity, Sell
    goes short, Hold and DontKnow keep the current position (flat at start).
    A trade's declared loss bound is the equity at stake times the adverse edge of
    the interval given when it opened.
    """
    returns = to_return_series(series)
    w = params.window
    if returns.size <= w:
        raise TooFewElements(f"series has {returns.size} returns; window needs more than {w}")
    agent = Agent(params)
    equity = [1.0]
    position = 0
    open_trade = None  # (open tick, direction, bound, equity at open)
    trades: list[TradeRecord] = []
    rows: list[AnswerRow] = []
    graph = None
    linked_size = 0
    for t in range(w, returns.size):
        agent.tick(t - w, returns[:t])
        if len(agent.store) >= 2 and len(agent.store) != linked_size:
            graph = agent.link()
            linked_size = len(agent.store)
        window = returns[t - w:t]
        answer = agent.decide(graph, window)
        rows.append(AnswerRow(t, answer, float(returns[t])))
        target = _POSITION.get(answer.verdict, position)
        if target != position:
            if open_trade is not None:
                trades.append(_close(open_trade, t, equity[-1]))
                open_trade = None
            if target != 0:
                lo, hi = answer.confidence_interval
                adverse = -math.expm1(lo) if target > 0 else math.expm1(hi)
                open_trade = (t, _DIRECTION[target], equity[-1] * max(adverse, 0.0), equity[-1])
            position = target
        nxt = equity[-1] * (1.0 + position * math.expm1(returns[t]))
        if nxt <= 0:
            raise ArithmeticError(f"equity exhausted at tick {t}")
        equity.append(nxt)
    if open_trade is not None:
        trades.append(_close(open_trade, returns.size, equity[-1]))
    record = TrackRecord.from_equity(np.array(equity), trades)
    return AgentRun(params, record, rows, agent)


def _close(open_trade, t, equity_now) -> TradeRecord:
    open_t, direction, bound, equity_then = open_trade
    return TradeRecord(open_t, t, direction, bound, equity_now - equity_then)


def buy_and_hold(series: PriceSeries, window: int = 0) -> TrackRecord:
    """Reference record: fully invested from tick ``window`` on."""
    price = series.price[window:]
    return TrackRecord.from_equity(price / price[0])


@dataclass
class SweepResult:
    rank: int
    index: int
    run: AgentRun
    score: float


def sweep(params_list: Sequence[AgentParams], series: PriceSeries,
          risk_free_per_tick: float = 0.0) -> list[SweepResult]:
    """Run every configuration on ``series`` and rank the track records, best first."""
    if not params_list:
        raise ValueError("need at least one parameter set")
    runs = [run_agent(p, series) for p in params_list]
    order = rank_records([r.record for r in runs], risk_free_per_tick)
    return [SweepResult(rank + 1, i, runs[i], composite_score(runs[i].record, risk_free_per_tick))
            for rank, i in enumerate(order)]
