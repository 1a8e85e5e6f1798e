"""Tests for INI configuration loading and environment overrides."""
import math

import pytest

from secnet.config import DEFAULT_CONFIG, LoadedConfig, load_config, parse_config
from secnet.params import ConfigError, db_to_linear


def edited(*replacements: tuple[str, str]) -> str:
    """DEFAULT_CONFIG with exact line substitutions (must all apply)."""
    text = DEFAULT_CONFIG
    for old, new in replacements:
        assert old in text, old
        text = text.replace(old, new)
    return text


def load_text(text: str, env=None) -> LoadedConfig:
    return parse_config(text, source="<test>", env={} if env is None else env)


# ---- defaults ----------------------------------------------------------


def test_defaults_match_published_operating_point():
    cfg = load_config(None, env={})
    p = cfg.params
    assert p.M == 8 and p.N == 4
    assert p.beta_t == pytest.approx(0.74110112659224825, rel=1e-12)
    assert p.beta_e == pytest.approx(0.3195079107728942, rel=1e-12)
    assert p.R_s == pytest.approx(0.4, rel=1e-12)
    # dB/dBm keys land in linear units
    assert p.channel.xi == pytest.approx(1e-4, rel=1e-12)
    assert p.channel.eta_L == pytest.approx(db_to_linear(-1.6), rel=1e-12)
    assert p.sigma_x2 == pytest.approx(1e-13, rel=1e-12)
    assert p.sigma_e2 == pytest.approx(1e-13, rel=1e-12)
    # the configured deployed intensity is recovered by the derived property
    assert p.lambda_u == pytest.approx(8e-6, rel=1e-12)
    assert p.lambda_p > 8e-6

    assert cfg.sim.trials == 10000
    assert cfg.sim.master_seed == 0
    assert math.isnan(cfg.sim.window_radius)
    assert cfg.quad.rel_tol == 1e-6
    # auto r_max uses the derived radial cut, well past the exclusion disc
    assert cfg.quad.r_max > 2 * p.d


def test_load_from_file(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(edited(("phi = 0.5", "phi = 0.3"), ("trials = 10000", "trials = 500")))
    cfg = load_config(path, env={})
    assert cfg.params.phi == 0.3
    assert cfg.sim.trials == 500


def test_missing_file_is_named():
    with pytest.raises(ConfigError, match="cannot read"):
        load_config("/nonexistent/secnet.ini", env={})


# ---- schema enforcement -------------------------------------------------


def test_unknown_key_rejected_by_name():
    with pytest.raises(ConfigError, match=r"\[system\] bogus"):
        load_text(edited(("[system]\n", "[system]\nbogus = 1\n")))


def test_unknown_section_rejected_by_name():
    with pytest.raises(ConfigError, match=r"\[extras\]"):
        load_text(DEFAULT_CONFIG + "\n[extras]\nx = 1\n")


def test_default_section_is_not_special():
    with pytest.raises(ConfigError, match=r"\[DEFAULT\]"):
        load_text(DEFAULT_CONFIG + "\n[DEFAULT]\nphi = 0.9\n")


def test_missing_key_rejected_by_name():
    with pytest.raises(ConfigError, match=r"missing config key \[sim\] trials"):
        load_text(edited(("trials = 10000\n", "")))


def test_malformed_ini_rejected():
    with pytest.raises(ConfigError):
        load_text("phi = 0.5 with no section header\n")


@pytest.mark.parametrize(
    "old, new, fragment",
    [
        ("phi = 0.5", "phi = 1.0", "phi"),
        ("trials = 10000", "trials = 100.5", r"\[sim\] trials"),
        ("alpha_L = 2.5", "alpha_L = fast", r"\[channel\] alpha_L"),
        ("R_e = 0.4", "R_e = 0.8", "rate configuration"),
        ("N = 4", "N = 8", "antenna configuration"),
        ("d = 50.0", "d = -50.0", "d"),
        ("r_max = auto", "r_max = 90.0", "at least 2d"),
    ],
)
def test_invalid_values_raise_named_errors(old, new, fragment):
    with pytest.raises(ConfigError, match=fragment):
        load_text(edited((old, new)))


def test_explicit_window_and_rmax():
    cfg = load_text(
        edited(("window_radius = auto", "window_radius = 500.0"),
               ("r_max = auto", "r_max = 4000.0"))
    )
    assert cfg.sim.window_radius == 500.0
    assert cfg.quad.r_max == 4000.0


# ---- environment overrides ----------------------------------------------


def test_env_overrides_win_over_file():
    cfg = load_text(
        DEFAULT_CONFIG,
        env={
            "SECNET_SYSTEM_PHI": "0.3",
            "SECNET_SIM_TRIALS": "77",
            "SECNET_CHANNEL_ETA_L_DB": "-3.0",
            "SECNET_QUAD_REL_TOL": "1e-4",
            "UNRELATED": "ignored",
        },
    )
    assert cfg.params.phi == 0.3
    assert cfg.sim.trials == 77
    assert cfg.params.channel.eta_L == pytest.approx(db_to_linear(-3.0), rel=1e-12)
    assert cfg.quad.rel_tol == 1e-4


def test_unknown_override_rejected_by_name():
    with pytest.raises(ConfigError, match="SECNET_SYSTEM_PH"):
        load_text(DEFAULT_CONFIG, env={"SECNET_SYSTEM_PH": "0.3"})


def test_override_value_errors_name_the_key():
    with pytest.raises(ConfigError, match=r"\[sim\] trials"):
        load_text(DEFAULT_CONFIG, env={"SECNET_SIM_TRIALS": "many"})
