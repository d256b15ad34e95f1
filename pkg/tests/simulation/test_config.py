# stdlib
from pathlib import Path

# third party
import pytest

# rmlsim absolute
from rmlsim.exceptions import ConfigValidationError, ParseError
from rmlsim.rml.selection import SelectionMode
from rmlsim.simulation.config import ENB_PRESET, Mode, ScenarioConfig, build_config, revalidate
from rmlsim.utils.config_io import parse_config, read_config, validate_config


def test_defaults() -> None:
    cfg = build_config()
    assert cfg.terrain_width == cfg.terrain_depth == 300
    assert cfg.n_vehicles == 20
    assert cfg.n_blockages == 10
    assert cfg.mode == Mode.RML
    assert cfg.selector == SelectionMode.LEARNED
    assert cfg.bs_position().as_tuple() == (150.0, 150.0)
    assert cfg.channel.packet_bytes == 1024
    assert cfg.policy.alpha == pytest.approx(0.1)


@pytest.mark.parametrize(
    "kwargs, field",
    [
        ({"dt_s": -1}, "dt_s"),
        ({"n_vehicles": 0}, "n_vehicles"),
        ({"n_blockages": -2}, "n_blockages"),
        ({"warmup_fraction": 1.5}, "warmup_fraction"),
        ({"bs_x": 400}, "__root__"),
        ({"bs_height": 1.0}, "__root__"),
        ({"large_body_height": 6.0}, "__root__"),
    ],
)
def test_invalid_values(kwargs: dict, field: str) -> None:
    with pytest.raises(ConfigValidationError) as e:
        build_config(**kwargs)
    assert e.value.field == field


def test_invalid_nested_value() -> None:
    with pytest.raises(ConfigValidationError) as e:
        build_config(channel={"max_retries": -1})
    assert e.value.field.startswith("channel")


def test_env_overrides_keywords(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("RMLSIM_N_VEHICLES", "7")
    monkeypatch.setenv("RMLSIM_MODE", "baseline")
    cfg = build_config(n_vehicles=30)
    assert cfg.n_vehicles == 7
    assert cfg.mode == Mode.BASELINE


def test_env_nested(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("RMLSIM_CHANNEL__TX_POWER_DBM", "27")
    cfg = build_config()
    assert cfg.channel.tx_power_dbm == 27
    assert cfg.channel.max_retries == 3


def test_revalidate() -> None:
    cfg = build_config(seed=3)
    updated = revalidate(cfg, n_blockages=4)
    assert updated.n_blockages == 4
    assert updated.seed == 3
    assert cfg.n_blockages == 10
    with pytest.raises(ConfigValidationError):
        revalidate(cfg, n_vehicles=0)


def test_enb_preset() -> None:
    for n, (x, y) in ENB_PRESET.items():
        cfg = build_config(n_blockages=n, enb_preset=True)
        assert cfg.terrain().bs_position.as_tuple() == (x, y)
    # counts without a preset keep the configured position
    assert build_config(n_blockages=3, enb_preset=True).bs_position().as_tuple() == (150.0, 150.0)


def test_resolved_is_plain() -> None:
    resolved = build_config(seed=5).resolved()
    assert resolved["seed"] == 5
    assert resolved["mode"] == "rml"
    assert resolved["channel"]["max_retries"] == 3


def test_validate_assignment() -> None:
    cfg = ScenarioConfig()
    with pytest.raises(ValueError):
        cfg.sim_time_s = 0


def test_read_config_sections() -> None:
    data = read_config("n_blockages = 6\nmode = baseline\n\n[channel]\nmax_retries = 2\n")
    assert data == {"n_blockages": "6", "mode": "baseline", "channel": {"max_retries": "2"}}


def test_read_config_unknown_key() -> None:
    with pytest.raises(ParseError) as e:
        read_config("seed = 1\nn_trucks = 4\n")
    assert e.value.line == 2
    assert e.value.key == "n_trucks"


def test_read_config_unknown_section() -> None:
    with pytest.raises(ParseError) as e:
        read_config("seed = 1\n[radio]\nx = 1\n")
    assert e.value.line == 2


def test_read_config_malformed_line() -> None:
    with pytest.raises(ParseError) as e:
        read_config("seed = 1\nthis is not an assignment\n")
    assert e.value.line == 2


def test_parse_config(tmp_path: Path) -> None:
    path = tmp_path / "scenario.ini"
    path.write_text("[scenario]\nn_vehicles = 12\nseed = 4\n[policy]\nalpha = 0.2\n")
    cfg = parse_config(path, seed=9, mode=None)
    assert cfg.n_vehicles == 12
    assert cfg.seed == 9
    assert cfg.mode == Mode.RML
    assert cfg.policy.alpha == pytest.approx(0.2)


def test_parse_config_reports_line(tmp_path: Path) -> None:
    path = tmp_path / "scenario.ini"
    path.write_text("seed = 1\n\nsim_time_s = -5\n")
    with pytest.raises(ConfigValidationError) as e:
        parse_config(path)
    assert e.value.field == "sim_time_s"
    assert "(line 3)" in str(e.value)


def test_validate_config_missing_file(tmp_path: Path) -> None:
    with pytest.raises(ParseError):
        validate_config(tmp_path / "missing.ini")
