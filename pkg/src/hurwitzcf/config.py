"""Run configuration: seeds, budgets and tolerances.

The file format is flat ``key = value`` lines; unknown keys are rejected
so typos surface instead of silently using defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .errors import DomainError


@dataclass(frozen=True)
class RunConfig:
    precision_bits: int = 212
    seed: int = 1
    max_words: int = 1 << 18
    max_digits: int = 4096
    horizon: int = 1_000_000
    bisection_tol: float = 1e-3
    ratio_tol: float = 0.1
    float_tol: float = 1e-12

    def __post_init__(self) -> None:
        for name in ("precision_bits", "max_words", "max_digits", "horizon"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be positive")
        for name in ("bisection_tol", "ratio_tol", "float_tol"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be positive")

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        known = {f.name: f.type for f in fields(cls)}
        values: dict[str, int | float] = {}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            if key not in known:
                raise DomainError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = float(val) if "float" in str(known[key]) else int(val)
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: bad value {val!r}") from exc
        return cls(**values)

    def override(self, **kwargs) -> "RunConfig":
        clean = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **clean) if clean else self

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}
