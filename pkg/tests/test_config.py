import json
import math
from collections.abc import Callable
from pathlib import Path

import pytest

from mimocap import ConfigError
from mimocap import DopplerConfig
from mimocap import DopplerKind
from mimocap import LosConfig
from mimocap import ModelConfig
from mimocap import ProfileKind
from mimocap import SnrConfig
from mimocap import SweepConfig
from mimocap import SweepVariable
from mimocap import apply_sweep_value
from mimocap import build_model
from mimocap import check_sweep
from mimocap import dump_config
from mimocap import load_config
from mimocap import parse_config

FULL_CONFIG: dict[str, object] = {
    "version": 1,
    "N": 2,
    "T": 3,
    "L": 1,
    "grid_size": 64,
    "doppler": {"kind": "jakes", "f_d": 0.1, "reg": 0.002},
    "profile": {"kind": "exponential", "params": {"scale": 2.0}},
    "los": {"xi": 1.5},
    "snr": {"rho_db": 10.0, "K": 3},
    "sweep": {"variable": "rho_db", "values": [0, 5, 10]},
}


def _config(**overrides: object) -> str:
    data = dict(FULL_CONFIG)
    data.update(overrides)
    return json.dumps(data)


def test_parse_a_full_config() -> None:
    """Test that every section of a configuration is decoded."""
    config = parse_config(_config())
    assert (config.N, config.T, config.L, config.grid_size) == (2, 3, 1, 64)
    assert config.doppler == DopplerConfig(kind=DopplerKind.Jakes, f_d=0.1, reg=0.002)
    assert config.profile.kind is ProfileKind.Exponential
    assert config.profile.params.scale == 2.0
    assert config.los == LosConfig(xi=1.5)
    assert config.snr.linear == pytest.approx(10.0)
    assert config.snr.ricean_k == 3.0
    assert config.sweep == SweepConfig(variable=SweepVariable.RhoDb, values=(0.0, 5.0, 10.0))


def test_parse_config_defaults() -> None:
    """Test the defaults of the optional sections."""
    config = parse_config(
        '{"version": 1, "N": 1, "T": 1, "L": 0, "doppler": {"kind": "delta"},'
        ' "snr": {"rho": 2.0, "K": "inf"}}'
    )
    assert config.grid_size == 256
    assert config.profile.kind is ProfileKind.Uniform
    assert config.los is None
    assert config.sweep is None
    assert math.isinf(config.snr.ricean_k)
    assert config.snr.decibels == pytest.approx(10.0 * math.log10(2.0))


@pytest.mark.parametrize(
    ("text", "message"),
    [
        ("{not json", "Malformed configuration JSON"),
        (_config(version=2), "Unsupported config version 2"),
        (_config(N=0), "N and T must be positive"),
        (_config(L=-1), "L must be nonnegative"),
        (_config(grid_size=1), "grid_size must be at least 2"),
        (_config(L=40), "grid_size must exceed 2L = 80"),
        (_config(doppler={"kind": "rayleigh"}), "Invalid configuration"),
        (_config(doppler={"kind": "exponential"}), "needs f_d"),
        (_config(snr={"rho": 1.0, "rho_db": 0.0, "K": 0}), "Exactly one of rho and rho_db"),
        (_config(snr={"K": 0}), "Exactly one of rho and rho_db"),
        (_config(snr={"rho": -1.0, "K": 0}), "rho must be positive"),
        (_config(snr={"rho": 1.0, "K": -1}), "K must be nonnegative"),
        (_config(snr={"rho": 1.0, "K": "infinite"}), "Invalid configuration"),
        (_config(los={"xi": -1.0}), "xi must be nonnegative"),
        (_config(sweep={"variable": "rho_db", "values": []}), "at least one value"),
        (_config(sweep={"variable": "bandwidth", "values": [1]}), "Invalid configuration"),
        (_config(N="two"), "Invalid configuration"),
    ],
)
def test_parse_config_rejects_invalid_input(text: str, message: str) -> None:
    """Test that malformed and out-of-range configurations raise a configuration error."""
    with pytest.raises(ConfigError, match=message):
        parse_config(text)


def test_schema_errors_report_the_json_path() -> None:
    """Test that schema violations name the offending field."""
    with pytest.raises(ConfigError, match=r"\$\.doppler\.kind"):
        parse_config(_config(doppler={"kind": "rayleigh"}))


def test_config_error_is_a_value_error() -> None:
    """Test that configuration errors can be caught as value errors."""
    assert issubclass(ConfigError, ValueError)


def test_load_config_from_a_file(tmp_path: Path) -> None:
    """Test that configurations load from a string or a path."""
    path = tmp_path / "model.json"
    path.write_text(_config())
    assert load_config(path) == parse_config(_config())
    assert load_config(str(path)) == parse_config(_config())


def test_load_config_from_a_missing_file(tmp_path: Path) -> None:
    """Test that a missing file is a configuration error."""
    with pytest.raises(ConfigError, match="Cannot read configuration"):
        load_config(tmp_path / "missing.json")


def test_we_can_roundtrip_a_config() -> None:
    """Test that an encoded configuration decodes to the same value."""
    config = parse_config(_config())
    assert parse_config(dump_config(config)) == config


def test_build_model_normalizes_to_the_snr() -> None:
    """Test that a built model has the configured SNR and Ricean split."""
    model = build_model(parse_config(_config()))
    assert model.rho == pytest.approx(10.0, rel=1e-10)
    assert model.sigma_sq == pytest.approx(2.5, rel=1e-10)
    assert model.doppler.kind is DopplerKind.Jakes
    assert model.profile.kind is ProfileKind.Exponential
    assert model.grid.size == 64


def test_build_model_rejects_impossible_models() -> None:
    """Test that a Ricean factor without LOS taps is a configuration error."""
    config = parse_config(_config(los=None))
    with pytest.raises(ConfigError, match="Invalid model"):
        build_model(config)


def test_build_model_rejects_out_of_range_doppler() -> None:
    """Test that a Jakes frequency outside (0, 0.5) is a configuration error."""
    config = parse_config(_config(doppler={"kind": "jakes", "f_d": 0.75}))
    with pytest.raises(ConfigError, match="must lie in"):
        build_model(config)


@pytest.mark.parametrize(
    ("variable", "value", "check"),
    [
        (SweepVariable.RhoDb, 0.0, lambda c: c.snr.rho_db == 0.0 and c.snr.rho is None),
        (SweepVariable.K, 7.0, lambda c: c.snr.K == 7.0),
        (SweepVariable.K, math.inf, lambda c: c.snr.K == "inf"),
        (SweepVariable.Xi, 4.0, lambda c: c.los == LosConfig(xi=4.0)),
        (SweepVariable.FD, 0.2, lambda c: c.doppler.f_d == 0.2 and c.doppler.reg == 0.002),
    ],
)
def test_apply_sweep_value(
    variable: SweepVariable, value: float, check: Callable[[ModelConfig], bool]
) -> None:
    """Test that a sweep value replaces exactly the swept parameter."""
    config = parse_config(_config())
    swept = apply_sweep_value(config, variable, value)
    assert check(swept)
    assert (swept.N, swept.T, swept.L) == (config.N, config.T, config.L)


def test_window_sweeps_leave_the_model_unchanged() -> None:
    """Test that a window sweep value does not change the model."""
    config = parse_config(_config())
    assert apply_sweep_value(config, SweepVariable.M, 41.0) == config


@pytest.mark.parametrize(
    ("overrides", "sweep", "message"),
    [
        ({"los": None}, SweepConfig(SweepVariable.Xi, (1.0,)), "needs a model with a line"),
        ({"doppler": {"kind": "delta"}}, SweepConfig(SweepVariable.FD, (0.1,)), "f_d sweep needs"),
        ({"los": None}, SweepConfig(SweepVariable.K, (0.0, 1.0)), "K sweep with K > 0"),
        ({}, SweepConfig(SweepVariable.M, (40.0,)), "positive odd integers"),
        ({}, SweepConfig(SweepVariable.M, (4.5,)), "positive odd integers"),
        ({}, SweepConfig(SweepVariable.Xi, (-1.0,)), "must be nonnegative"),
        ({}, SweepConfig(SweepVariable.FD, (0.0,)), "f_d values must be positive"),
        ({}, SweepConfig(SweepVariable.RhoDb, (math.inf,)), "must be finite"),
    ],
)
def test_check_sweep_rejects_inapplicable_sweeps(
    overrides: dict[str, object], sweep: SweepConfig, message: str
) -> None:
    """Test that sweeps are validated against the model before anything is solved."""
    config = parse_config(_config(**overrides))
    with pytest.raises(ConfigError, match=message):
        check_sweep(config, sweep)


def test_check_sweep_accepts_infinite_ricean_factors() -> None:
    """Test that a K sweep may run up to a purely deterministic channel."""
    check_sweep(parse_config(_config()), SweepConfig(SweepVariable.K, (0.0, 10.0, math.inf)))


def test_sweep_variable_behaves_as_string() -> None:
    """Test that sweep variables print as their configuration names."""
    assert str(SweepVariable.FD) == "f_d"
    assert SweepVariable("M") is SweepVariable.M


def test_snr_config_in_decibels() -> None:
    """Test the linear and decibel views of an SNR given in decibels."""
    snr = SnrConfig(K=0.0, rho_db=20.0)
    assert snr.linear == pytest.approx(100.0)
    assert snr.decibels == 20.0


def test_model_config_direct_construction_validates() -> None:
    """Test that configurations built in code are validated like decoded ones."""
    with pytest.raises(ValueError, match="Unsupported config version"):
        ModelConfig(
            version=0,
            N=1,
            T=1,
            L=0,
            doppler=DopplerConfig(kind=DopplerKind.Delta),
            snr=SnrConfig(K=0.0, rho=1.0),
        )
