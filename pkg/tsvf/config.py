# tsvf/config.py
import os

import yaml

from tsvf.errors import ConfigError

DEFAULT_PATH = "config/config.yaml"


class Config:
    @staticmethod
    def load(path=None):
        path = path or os.environ.get("TSVF_CONFIG", DEFAULT_PATH)
        if not os.path.exists(path):
            return Config()
        try:
            with open(path) as f:
                cfg = yaml.safe_load(f) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        return Config(**cfg)

    def __init__(self, **cfg):
        try:
            tol = cfg.get("tolerances", {})
            self.degeneracy_tol = float(tol.get("degeneracy", 1e-9))
            self.orthogonality_tol = float(tol.get("orthogonality", 1e-10))

            mc = cfg.get("monte_carlo", {})
            self.mc_seed = int(mc.get("seed", 20240607))
            self.mc_samples = int(mc.get("samples", 100_000))
            self.mc_workers = int(mc.get("workers", 1))
            self.z_threshold = float(mc.get("z_threshold", 5.0))

            pointer = cfg.get("pointer", {})
            self.pointer_g = float(pointer.get("g", 1e-3))
            self.pointer_sigma = float(pointer.get("sigma", 1.0))
            self.half_range_factor = float(pointer.get("half_range_factor", 10.0))
            self.min_points = int(pointer.get("min_points", 4096))
            self.points_per_sigma = int(pointer.get("points_per_sigma", 10))

            scen = cfg.get("scenarios", {})
            self.directions = int(scen.get("directions", 100))
            self.scenario_seed = int(scen.get("seed", 7))

            self.output_format = cfg.get("output", {}).get("format", "table")
        except (TypeError, ValueError, AttributeError) as exc:
            raise ConfigError(f"invalid configuration: {exc}") from exc

        if self.output_format not in ("table", "json"):
            raise ConfigError(f"output.format must be table or json, got {self.output_format!r}")
        if self.mc_workers < 1:
            raise ConfigError("monte_carlo.workers must be >= 1")
        if self.mc_samples < 1:
            raise ConfigError("monte_carlo.samples must be >= 1")
