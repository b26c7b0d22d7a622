"""Application configuration."""

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional

from src.errors import ConfigError

CONFIG_ENV_VAR = "ANELKIN_CONFIG"


@dataclass(frozen=True)
class RunConfig:
    """Run configuration loaded from a JSON file, the environment, or defaults."""

    # Relative tolerance for holonomicity, gradient and equivalence tests
    tol_rel: float = 1e-9
    # Required multiply-back accuracy of the decomposition
    tol_decomp: float = 1e-12
    # Upper bound on morphisms generated during groupoid closure
    closure_bound: int = 100000
    # Seed for the synthetic data generators
    rng_seed: int = 42
    # Degeneracy threshold, scaled by mesh size ** dim
    degeneracy_eps: float = 1e-14
    # Tangent maps with larger condition number are rejected
    cond_max: float = 1e12
    log_level: str = "INFO"

    def __post_init__(self):
        for name in ("tol_rel", "tol_decomp", "degeneracy_eps", "cond_max"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.closure_bound <= 0:
            raise ConfigError(f"closure_bound must be positive, got {self.closure_bound!r}")

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        """Load configuration from a JSON object with RunConfig field names."""
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys in {path}: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_env(cls) -> "RunConfig":
        """Load configuration from the file named by ANELKIN_CONFIG, if set."""
        path = os.getenv(CONFIG_ENV_VAR)
        if path:
            return cls.from_file(path)
        return cls()

    @classmethod
    def load(cls, path: Optional[str | Path] = None) -> "RunConfig":
        """Explicit path first, then the environment, then defaults."""
        if path is not None:
            return cls.from_file(path)
        return cls.from_env()

    def with_overrides(self, **overrides) -> "RunConfig":
        """Copy with the non-None overrides applied."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **changes) if changes else self

    def as_dict(self) -> dict:
        return asdict(self)
