import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(autouse=True)
def _no_config_env(monkeypatch, tmp_path):
    # tests never pick up a developer's config/config.yaml
    monkeypatch.setenv("TSVF_CONFIG", str(tmp_path / "absent.yaml"))
