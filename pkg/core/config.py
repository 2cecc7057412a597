"""
Configuration for the HDX toolkit.

Config reads config.json (writing the defaults when the file is missing) and
serves values by dot notation. RunConfig carries the parameters of one CLI run.
"""

import copy
import json
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional

from core.errors import UsageError

BUDGET_ENV_VAR = "HDX_BUDGET_MB"

DEFAULT_CONFIG: Dict[str, Any] = {
    "field": {
        "table_limit": 3200,
        "min_prime": 4
    },
    "budgets": {
        "memory_mb": 4096,
        "max_group_order": 20000000,
        "max_closure_elements": 20000000,
        "max_link_elements": 250000,
        "max_g2_vertices": 400000,
        "max_walk_tuples": 5000000
    },
    "spectra": {
        "tolerance": 1e-9,
        "max_iterations": 2000,
        "dense_limit": 4000,
        "seed": 42
    },
    "complex": {
        "realization_default": {"A2": "sl3", "B2": "sp4"},
        "chunk_size": 1000000
    },
    "calibration": {
        "trials": 100,
        "p": 5
    },
    "logging": {
        "level": "INFO",
        "file_logging": True,
        "log_dir": "logs"
    },
    "reports": {
        "directory": "reports"
    }
}


def _deep_merge(base: Dict[str, Any], overlay: Dict[str, Any]) -> Dict[str, Any]:
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _deep_merge(base[key], value)
        else:
            base[key] = value
    return base


class Config:
    """Dot-notation view over config.json merged onto DEFAULT_CONFIG."""

    def __init__(self, config_file: str = "config.json"):
        self.config_file = config_file
        self.config_data = copy.deepcopy(DEFAULT_CONFIG)
        self._load()

    def _load(self) -> None:
        if not os.path.exists(self.config_file):
            self._write_defaults()
            return
        try:
            with open(self.config_file, 'r') as f:
                _deep_merge(self.config_data, json.load(f))
        except (OSError, ValueError) as e:
            print(f"❌ Config load error, using defaults: {e}")

    def _write_defaults(self) -> None:
        try:
            with open(self.config_file, 'w') as f:
                json.dump(self.config_data, f, indent=4)
        except OSError as e:
            print(f"❌ Default config save error: {e}")

    def get(self, key: str, default: Any = None) -> Any:
        """Value at a dotted key such as "spectra.seed", or default."""
        node = self.config_data
        for part in key.split('.'):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def memory_budget_mb(self) -> float:
        """Memory budget in MB; the environment variable wins over the file."""
        env_value = os.environ.get(BUDGET_ENV_VAR)
        if env_value:
            try:
                return float(env_value)
            except ValueError:
                print(f"⚠️ Ignoring non-numeric {BUDGET_ENV_VAR}={env_value!r}")
        return float(self.get("budgets.memory_mb", DEFAULT_CONFIG["budgets"]["memory_mb"]))

    def override(self, key: str, value: Any) -> None:
        """Set a value for this process only; config.json is left untouched."""
        *parents, leaf = key.split('.')
        node = self.config_data
        for part in parents:
            node = node.setdefault(part, {})
        node[leaf] = value


@dataclass
class RunConfig:
    """Parameters of one CLI run, validated before dispatch."""
    family: Optional[str] = None
    rank: Optional[int] = None
    p: int = 5
    m: int = 1
    realization: Optional[str] = None
    memory_mb: Optional[float] = None
    tolerance: float = 1e-9
    output: Optional[str] = None
    report: Optional[str] = None
    seed: int = 42
    threads: int = 1
    heavy: bool = False
    allow_small_p: bool = False
    extra: Dict[str, Any] = field(default_factory=dict)

    def validate(self, certificate: bool = False) -> "RunConfig":
        """Check the combination against module preconditions."""
        from core.algebra.gf import is_prime

        if not is_prime(self.p):
            raise UsageError(f"p={self.p} is not prime")
        if self.m < 1:
            raise UsageError(f"m={self.m} must be at least 1")
        if self.tolerance <= 0:
            raise UsageError("tolerance must be positive")
        if self.threads < 1:
            raise UsageError("threads must be at least 1")
        if certificate and self.p <= 3 and not self.allow_small_p:
            raise UsageError(f"HDX certificates need p > 3 (got p={self.p}); pass --allow-small-p to experiment")
        return self

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


# Global config instance
config = Config()
