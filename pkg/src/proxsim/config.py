"""Run configuration: everything a pipeline run depends on, loadable from JSON."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import _serde
from ._serde import ConfigError
from .features import FeatureOptions
from .learn import ForestParams
from .scenario import ScenarioConfig

DEFAULT_SIGMA_GRID = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0)


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    features: FeatureOptions = field(default_factory=FeatureOptions)
    forest: ForestParams = field(default_factory=ForestParams)
    test_fraction: float = 0.3
    split_seed: int = 0
    sigma_grid: tuple[float, ...] = DEFAULT_SIGMA_GRID
    # scenarios per cell for each noise-sweep point
    sweep_scenarios_per_cell: int = 20
    out_dir: str = "proxsim-out"

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("test_fraction must lie in (0, 1)")
        if not self.sigma_grid:
            raise ConfigError("sigma_grid must not be empty")
        if any(s < 0 for s in self.sigma_grid):
            raise ConfigError("sigma_grid values must be non-negative")
        if self.sweep_scenarios_per_cell < 2:
            raise ConfigError("sweep_scenarios_per_cell must be >= 2")

    @property
    def hash(self) -> str:
        # where results are written does not change what they are
        return _serde.config_hash(replace(self, out_dir=""))

    def to_json(self) -> str:
        return json.dumps(_serde.to_jsonable(self), indent=1, sort_keys=True)

    def with_overrides(self, *, seed: int | None = None, scenarios_per_cell: int | None = None,
                       sigma_grid=None, out_dir: str | None = None) -> "RunConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, scenario=replace(cfg.scenario, master_seed=seed))
        if scenarios_per_cell is not None:
            cfg = replace(cfg, scenario=replace(cfg.scenario, n_scenarios_per_cell=scenarios_per_cell),
                          sweep_scenarios_per_cell=scenarios_per_cell)
        if sigma_grid is not None:
            cfg = replace(cfg, sigma_grid=tuple(float(s) for s in sigma_grid))
        if out_dir is not None:
            cfg = replace(cfg, out_dir=str(out_dir))
        return cfg


def load_config(path) -> RunConfig:
    """Parse a JSON run config; missing keys keep defaults, unknown keys are errors."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return _serde.from_jsonable(RunConfig, data)
