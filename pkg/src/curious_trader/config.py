"""Run configuration: one JSON document, unknown keys rejected.

Example::

    {
      "market": {"gbm": {"s0": 100, "mu": 0.0005, "sigma": 0.01, "horizon": 2000}},
      "agents": [{"seed": 1, "band": [0.0, 1.0]}, {"seed": 2, "min_connected": "inf"}],
      "evaluation": {"threshold": 0.05},
      "seed": 7,
      "output": "out"
    }

``market`` holds exactly one of ``gbm`` (parameters) or ``csv`` (path, resolved
relative to the config file).  Every agent field is optional and defaults to
``AgentParams``.  ``reference`` optionally names a track-record CSV to test the
best agent against; by default it is buy-and-hold on the same ticks.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .agent import AgentParams
from .bass_diffusion import BassParams
from .errors import ConfigError
from .evaluation import Bands
from .market import GbmParams


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GbmConfig(_Strict):
    s0: float = Field(100.0, gt=0)
    mu: float = 0.0
    sigma: float = Field(0.01, ge=0)
    horizon: int = Field(1000, ge=1)


class MarketConfig(_Strict):
    gbm: Optional[GbmConfig] = None
    csv: Optional[str] = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.gbm is None) == (self.csv is None):
            raise ValueError("market needs exactly one of 'gbm' or 'csv'")
        return self


class BassConfig(_Strict):
    p: float = Field(0.01, gt=0)
    q: float = Field(0.1, ge=0)
    m: int = Field(64, ge=1)


class AgentConfig(_Strict):
    bass: BassConfig = BassConfig()
    band: tuple[float, float] = (0.05, 1.0)
    epsilon: float = Field(0.5, gt=0, lt=1)
    buy_z: float = Field(1.0, gt=0)
    sell_z: float = Field(1.0, gt=0)
    confidence: float = Field(0.95, gt=0, lt=1)
    min_connected: Union[int, Literal["inf"]] = 3
    window: int = Field(32, ge=2)
    seed: int = Field(0, ge=0)
    horizon: Optional[Literal["short", "medium", "long"]] = None
    objective: Optional[Literal["conservative", "aggressive"]] = None

    @field_validator("band")
    @classmethod
    def _band_order(cls, band):
        lo, hi = band
        if not 0 <= lo < hi:
            raise ValueError("band must satisfy 0 <= d_lo < d_hi")
        return band

    @field_validator("min_connected")
    @classmethod
    def _non_negative(cls, value):
        if value != "inf" and value < 0:
            raise ValueError("min_connected must be >= 0")
        return value

    def to_params(self) -> AgentParams:
        return AgentParams(
            bass=BassParams(self.bass.p, self.bass.q, self.bass.m),
            band=self.band,
            epsilon=self.epsilon,
            buy_z=self.buy_z,
            sell_z=self.sell_z,
            confidence=self.confidence,
            min_connected=math.inf if self.min_connected == "inf" else self.min_connected,
            window=self.window,
            seed=self.seed,
            horizon=self.horizon,
            objective=self.objective,
        )


class EvaluationConfig(_Strict):
    threshold: float = Field(0.05, gt=0)
    sharpe_band: float = Field(0.5, ge=0)
    mdd_band: float = Field(0.1, ge=0)
    var_band: float = Field(0.02, ge=0)
    risk_free: float = 0.0

    def bands(self) -> Bands:
        return Bands(self.threshold, self.sharpe_band, self.mdd_band, self.var_band)


class RunConfig(_Strict):
    market: MarketConfig
    agents: list[AgentConfig] = Field(min_length=1)
    evaluation: EvaluationConfig = EvaluationConfig()
    reference: Optional[str] = None
    seed: int = Field(0, ge=0)
    output: str = "out"

    def gbm_params(self) -> GbmParams:
        g = self.market.gbm
        return GbmParams(g.s0, g.mu, g.sigma, g.horizon)


def _format_error(err: ValidationError) -> str:
    lines = []
    for item in err.errors():
        where = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{where}: {item['msg']}")
    return "; ".join(lines)


def parse_config(text: str) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(_format_error(exc)) from exc


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    cfg = parse_config(text)
    base = path.parent
    updates = {}
    if cfg.market.csv is not None and not Path(cfg.market.csv).is_absolute():
        updates["market"] = cfg.market.model_copy(update={"csv": str(base / cfg.market.csv)})
    if cfg.reference is not None and not Path(cfg.reference).is_absolute():
        updates["reference"] = str(base / cfg.reference)
    return cfg.model_copy(update=updates) if updates else cfg
