import os

import pytest

from tsvf.config import Config
from tsvf.errors import ConfigError


def test_defaults_when_file_is_missing():
    cfg = Config.load()
    assert cfg.mc_samples == 100_000
    assert cfg.mc_workers == 1
    assert cfg.mc_seed == 20240607
    assert cfg.z_threshold == 5.0
    assert cfg.degeneracy_tol == 1e-9
    assert cfg.orthogonality_tol == 1e-10
    assert cfg.pointer_g == 1e-3
    assert cfg.min_points == 4096
    assert cfg.output_format == "table"


def test_load_from_environment(tmp_path, monkeypatch):
    path = tmp_path / "env.yaml"
    path.write_text("monte_carlo:\n  samples: 500\n  workers: 3\npointer:\n  sigma: 2.5\n")
    monkeypatch.setenv("TSVF_CONFIG", str(path))
    cfg = Config.load()
    assert cfg.mc_samples == 500
    assert cfg.mc_workers == 3
    assert cfg.pointer_sigma == 2.5
    assert cfg.pointer_g == 1e-3


def test_explicit_path_wins_over_environment(tmp_path):
    path = tmp_path / "explicit.yaml"
    path.write_text("output:\n  format: json\nscenarios:\n  directions: 12\n  seed: 3\n")
    cfg = Config.load(str(path))
    assert cfg.output_format == "json"
    assert cfg.directions == 12
    assert cfg.scenario_seed == 3


def test_empty_file_gives_defaults(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("")
    assert Config.load(str(path)).mc_samples == 100_000


def test_shipped_config_loads():
    cfg = Config.load(os.path.join(os.path.dirname(__file__), "..", "config", "config.yaml"))
    assert cfg.mc_workers == 4
    assert cfg.output_format in ("table", "json")


@pytest.mark.parametrize(
    "text, message",
    [
        ("monte_carlo: [1, 2\n", "config"),
        ("- 1\n- 2\n", "mapping"),
        ("output:\n  format: xml\n", "format"),
        ("monte_carlo:\n  workers: 0\n", "workers"),
        ("monte_carlo:\n  samples: 0\n", "samples"),
        ("monte_carlo:\n  samples: many\n", "invalid configuration"),
        ("pointer: 3\n", "invalid configuration"),
    ],
)
def test_invalid_config(tmp_path, text, message):
    path = tmp_path / "config.yaml"
    path.write_text(text)
    with pytest.raises(ConfigError, match=message):
        Config.load(str(path))
