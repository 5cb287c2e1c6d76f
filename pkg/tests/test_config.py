import json
import math

import pytest

from curious_trader.agent import AgentParams
from curious_trader.config import load_config, parse_config
from curious_trader.errors import ConfigError

MINIMAL = {"market": {"gbm": {}}, "agents": [{}]}


def test_minimal_config_uses_defaults():
    cfg = parse_config(json.dumps(MINIMAL))
    assert cfg.agents[0].to_params() == AgentParams()
    assert cfg.gbm_params().sigma == 0.01
    assert cfg.evaluation.bands().threshold == 0.05
    assert cfg.output == "out"


def test_infinite_min_connected():
    cfg = parse_config(json.dumps({**MINIMAL, "agents": [{"min_connected": "inf"}]}))
    assert cfg.agents[0].to_params().min_connected == math.inf


@pytest.mark.parametrize("doc, field", [
    ({"market": {"gbm": {"sigma": -0.1}}, "agents": [{}]}, "market.gbm.sigma"),
    ({**MINIMAL, "agents": [{"epsilon": 1.5}]}, "agents.0.epsilon"),
    ({**MINIMAL, "agents": [{"band": [1.0, 0.5]}]}, "agents.0.band"),
    ({**MINIMAL, "agents": [{"colour": "red"}]}, "agents.0.colour"),
    ({**MINIMAL, "agents": []}, "agents"),
    ({**MINIMAL, "extra": 1}, "extra"),
    ({"market": {}, "agents": [{}]}, "market"),
    ({"market": {"gbm": {}, "csv": "x.csv"}, "agents": [{}]}, "market"),
    ({**MINIMAL, "agents": [{"horizon": "forever"}]}, "agents.0.horizon"),
])
def test_invalid_configs_name_the_field(doc, field):
    with pytest.raises(ConfigError) as info:
        parse_config(json.dumps(doc))
    assert str(info.value).startswith(field)


def test_json_syntax_error_reports_line():
    with pytest.raises(ConfigError, match=r"line 3, column"):
        parse_config('{\n  "market": {},\n  "agents": [}\n')


def test_relative_paths_resolve_against_config(tmp_path):
    sub = tmp_path / "cfg"
    sub.mkdir()
    path = sub / "run.json"
    path.write_text(json.dumps({"market": {"csv": "prices.csv"}, "agents": [{}],
                                "reference": "ref.csv"}))
    cfg = load_config(path)
    assert cfg.market.csv == str(sub / "prices.csv")
    assert cfg.reference == str(sub / "ref.csv")


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.json")
