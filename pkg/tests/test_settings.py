"""
Tests for settings resolution and the settings debug helpers.
"""

import pytest
from pydantic import ValidationError

from cascade_lab.debug_settings import format_setting, get_setting_source, iter_settings
from cascade_lab.params import CascadeParams, IntegratorConfig, ToyParams
from cascade_lab.settings import Settings, load_settings


@pytest.fixture(autouse=True)
def clean_env(monkeypatch, tmp_path):
    """Run from an empty directory without cascade-lab variables."""
    monkeypatch.chdir(tmp_path)
    for name in ("TOY__N", "TOY__DELTA", "CASCADE_LAB_THREADS", "SWEEP__DELTAS"):
        monkeypatch.delenv(name, raising=False)


def test_defaults():
    settings = load_settings()
    assert settings.toy.n == 6
    assert settings.toy.sigma == 0.15
    assert settings.threads == 1
    assert settings.sweep.nu == 0.4


def test_nested_environment_override(monkeypatch):
    monkeypatch.setenv("TOY__N", "8")
    monkeypatch.setenv("SWEEP__DELTAS", "[0.01, 0.001]")
    settings = load_settings()
    assert settings.toy.n == 8
    assert settings.sweep.deltas == [0.01, 0.001]


def test_environment_beats_config_file(monkeypatch, tmp_path):
    config = tmp_path / "experiment.env"
    config.write_text("TOY__N=7\nTOY__DELTA=0.01\n")
    monkeypatch.setenv("TOY__N", "9")
    settings = load_settings(config)
    assert settings.toy.n == 9
    assert settings.toy.delta == 0.01


def test_thread_count_variable(monkeypatch):
    monkeypatch.setenv("CASCADE_LAB_THREADS", "4")
    assert Settings().threads == 4


def test_invalid_environment_value(monkeypatch):
    monkeypatch.setenv("TOY__N", "3")
    with pytest.raises(ValidationError):
        load_settings()


def test_parameter_records_from_settings():
    settings = load_settings()
    params = CascadeParams.from_settings(settings.toy, settings.cascade)
    assert params.toy == ToyParams(N=6, delta=1e-3)
    assert IntegratorConfig.from_settings(settings.integrator) == IntegratorConfig()


def test_setting_sources(monkeypatch, tmp_path):
    config = tmp_path / "experiment.env"
    config.write_text("TOY__DELTA=0.01\n")
    (tmp_path / ".env").write_text("LATTICE__SEED=3\n")
    monkeypatch.setenv("TOY__N", "9")
    assert get_setting_source("TOY__N", config) == ("environment", "9")
    assert get_setting_source("TOY__DELTA", config) == (f"config {config}", "0.01")
    assert get_setting_source("LATTICE__SEED", config) == (".env file", "3")
    assert get_setting_source("TOY__SIGMA", config) == ("default", None)


def test_iter_settings():
    names = {env: value for _, env, value in iter_settings(Settings())}
    assert names["TOY__N"] == 6
    assert names["CASCADE_LAB_THREADS"] == 1
    assert "TOY__N" in format_setting("TOY__N", 6, "default")
