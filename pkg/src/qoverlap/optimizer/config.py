from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs of the structure search.

    ``T0 = None`` means 0.1 times the cost of the initial random algorithm.
    """

    d: int = 8
    max_iters: int = 2000
    T0: float | None = None
    temp_decay: float = 0.995
    compress_every: int = 25
    sweep_tol: float = 1e-4
    fd_step: float = 1e-5
    move_geometric_p: float = 0.5
    restarts: int = 20

    def __post_init__(self):
        if self.d < 1:
            raise ConfigError("d must be >= 1")
        if self.max_iters < 1 or self.restarts < 1 or self.compress_every < 1:
            raise ConfigError("max_iters, restarts and compress_every must be positive")
        if self.T0 is not None and self.T0 <= 0:
            raise ConfigError("T0 must be positive")
        if not 0.0 < self.temp_decay < 1.0:
            raise ConfigError("temp_decay must be in (0, 1)")
        if self.sweep_tol <= 0 or self.fd_step <= 0:
            raise ConfigError("sweep_tol and fd_step must be positive")
        if not 0.0 < self.move_geometric_p < 1.0:
            raise ConfigError("move_geometric_p must be in (0, 1)")

    def replace(self, **kw) -> "OptimizerConfig":
        return dataclasses.replace(self, **kw)

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name} = {'auto' if v is None else v}")
        return "\n".join(lines) + "\n"


_INT_FIELDS = {"d", "max_iters", "compress_every", "restarts"}


def parse_config(text: str, base: OptimizerConfig | None = None) -> OptimizerConfig:
    """``key = value`` lines; ``#`` comments; unknown keys are errors."""
    names = {f.name for f in dataclasses.fields(OptimizerConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in names:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            if key == "T0" and val == "auto":
                values[key] = None
            elif key in _INT_FIELDS:
                values[key] = int(val)
            else:
                values[key] = float(val)
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from None
    return (base or OptimizerConfig()).replace(**values)


def load_config(path: str | Path, base: OptimizerConfig | None = None) -> OptimizerConfig:
    return parse_config(Path(path).read_text(), base)
