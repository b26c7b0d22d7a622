import json

import pytest

from src.config import CONFIG_ENV_VAR, RunConfig
from src.errors import ConfigError


def test_defaults():
    config = RunConfig()
    assert config.tol_rel == 1e-9
    assert config.tol_decomp == 1e-12
    assert config.closure_bound == 100000
    assert config.rng_seed == 42


def test_from_file_and_unknown_keys(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"tol_rel": 1e-6, "rng_seed": 3}))
    config = RunConfig.from_file(path)
    assert config.tol_rel == 1e-6
    assert config.rng_seed == 3

    path.write_text(json.dumps({"tolerance": 1e-6}))
    with pytest.raises(ConfigError, match="tolerance"):
        RunConfig.from_file(path)


def test_environment_variable_names_the_file(tmp_path, monkeypatch):
    path = tmp_path / "env.json"
    path.write_text(json.dumps({"closure_bound": 50}))
    monkeypatch.setenv(CONFIG_ENV_VAR, str(path))
    assert RunConfig.from_env().closure_bound == 50
    assert RunConfig.load(None).closure_bound == 50

    monkeypatch.delenv(CONFIG_ENV_VAR)
    assert RunConfig.load(None) == RunConfig()


def test_invalid_values_are_rejected():
    with pytest.raises(ConfigError):
        RunConfig(tol_rel=0.0)
    with pytest.raises(ConfigError):
        RunConfig(closure_bound=-1)


def test_overrides_skip_none():
    config = RunConfig().with_overrides(tol_rel=1e-4, rng_seed=None)
    assert config.tol_rel == 1e-4
    assert config.rng_seed == 42
    assert config.as_dict()["tol_rel"] == 1e-4
