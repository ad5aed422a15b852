import pytest

from dimred_assoc.config import ConfigError, from_mapping, parse_config
from dimred_assoc.simulation import Method


def test_empty_config_defaults(tmp_path):
    p = tmp_path / "empty.yaml"
    p.write_text("")
    cfg = parse_config(p)
    assert cfg.scenario.n_tracks == 10 and cfg.scenario.n == 6
    assert cfg.mc.m == 1 and cfg.mc.runs == 1000
    assert len(cfg.mc.c_grid) == 50 and cfg.mc.c_grid[0] == 0.1 and cfg.mc.c_grid[-1] == 5.0
    assert cfg.mc.methods == (Method.FULL, Method.FUSION_OPT, Method.ASSOC_OPT)
    assert cfg == parse_config(None)


def test_runs_zero_rejected():
    with pytest.raises(ConfigError) as exc:
        from_mapping({"runs": 0})
    assert exc.value.field == "runs"


def test_unknown_fields_listed():
    with pytest.raises(ConfigError, match="rnus"):
        from_mapping({"rnus": 10})
    with pytest.raises(ConfigError, match="scenario.size"):
        from_mapping({"scenario": {"size": 3}})


def test_yaml_error_has_location(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("runs: 10\nc_grid: [1, 2\n")
    with pytest.raises(ConfigError, match="line"):
        parse_config(p)


def test_missing_file():
    with pytest.raises(ConfigError):
        parse_config("/nonexistent/config.yaml")


@pytest.mark.parametrize("raw, field", [
    ({"c_grid": [1.0, 0.5]}, "c_grid"),
    ({"c_grid": [0.0]}, "c_grid"),
    ({"m": 2}, "m"),
    ({"m": 6}, "m"),
    ({"methods": ["bogus"]}, "methods"),
    ({"bounds": {"alpha_low": 1.0, "alpha_high": 0.5}}, "bounds"),
    ({"scenario": {"N": 3, "positions": [[0, 0], [1, 1]]}}, "scenario.N"),
    ({"scenario": {"positions": [[0, 0], [0, 0]]}}, "scenario"),
    ({"optimizer_trace": {"j": 4}}, "optimizer_trace.j"),
    ({"lap": {"costs": [[1, 2]]}}, "lap.costs"),
    ({"seed": "abc"}, "seed"),
])
def test_invalid_fields(raw, field):
    with pytest.raises(ConfigError) as exc:
        from_mapping(raw)
    assert exc.value.field == field


def test_overrides_and_string_numbers():
    cfg = from_mapping({"runs": 5, "m": 2, "methods": ["Full", "fusion-opt"],
                        "bounds": {"alpha_low": "1e-3"}, "scenario": {"N": 4}})
    assert cfg.mc.runs == 5 and cfg.mc.m == 2 and cfg.scenario.n_tracks == 4
    assert cfg.mc.bounds.alpha_low == 1e-3


def test_digest_tracks_content():
    assert from_mapping({}).digest() == from_mapping({}).digest()
    assert from_mapping({}).digest() != from_mapping({"seed": 2}).digest()
    assert from_mapping(from_mapping({"runs": 7}).to_dict()) == from_mapping({"runs": 7})
