"""Flat ``key = value`` configuration with repeated ``body =`` lines."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..convex_body import BodyError, parse_body
from ..lattice import DEFAULT_BUDGET

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "load_config"]


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    dims: list[int] = field(default_factory=lambda: [2])
    qs: list[int] = field(default_factory=lambda: [8, 16, 32])
    bodies: list[str] = field(default_factory=lambda: ["ball"])
    delta_factor: float = 0.5  # delta = delta_factor / q
    budget: int = DEFAULT_BUDGET
    threads: int = 1
    seed: int = 12345
    r0: float = 0.4
    mattila: bool = False
    duality: bool = False
    falconer_s: float | None = None
    criteria: list[int] | None = None

    def delta(self, q: float) -> float:
        return self.delta_factor / q

    def header(self) -> dict:
        return {
            "dims": ",".join(map(str, self.dims)),
            "q": ",".join(map(str, self.qs)),
            "delta": f"{self.delta_factor}/q",
            "seed": self.seed,
            "r0": self.r0,
            "budget": self.budget,
        }


def _ints(v):
    try:
        return [int(x) for x in v.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected a comma-separated integer list, got {v!r}") from None


def _bool(v):
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {v!r}")


def _delta(v):
    # accepts "0.5", "1/2", or "1/(2q)"
    v = v.replace(" ", "")
    if v.endswith("q)") and v.startswith("1/("):
        inner = v[3:-2] or "1"
        return 1.0 / float(Fraction(inner))
    if v.endswith("/q"):
        return float(Fraction(v[:-2]))
    try:
        return float(Fraction(v))
    except ValueError:
        raise ConfigError(f"cannot read delta rule {v!r}") from None


_KEYS = {
    "d": ("dims", _ints),
    "dims": ("dims", _ints),
    "q": ("qs", _ints),
    "delta": ("delta_factor", _delta),
    "budget": ("budget", int),
    "threads": ("threads", int),
    "seed": ("seed", int),
    "r0": ("r0", float),
    "mattila": ("mattila", _bool),
    "duality": ("duality", _bool),
    "falconer_s": ("falconer_s", float),
    "criteria": ("criteria", _ints),
}


def parse_config(text: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    bodies = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = key.strip().lower(), value.strip()
        if key == "body":
            bodies.append(value)
            continue
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        attr, conv = _KEYS[key]
        try:
            setattr(cfg, attr, conv(value))
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value {value!r} for {key}") from None
    if bodies:
        cfg.bodies = bodies
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig):
    if not cfg.dims or any(d < 2 for d in cfg.dims):
        raise ConfigError("dimensions must be >= 2")
    if not cfg.qs or any(q < 1 for q in cfg.qs):
        raise ConfigError("q values must be positive")
    if not 0.25 <= cfg.delta_factor <= 4.0:
        raise ConfigError("delta must lie in [1/(4q), 4/q]")
    if cfg.threads < 1 or cfg.budget < 1:
        raise ConfigError("threads and budget must be positive")
    if cfg.r0 <= 0:
        raise ConfigError("r0 must be positive")
    for spec in cfg.bodies:
        for d in cfg.dims:
            try:
                parse_body(spec, d)
            except BodyError as exc:
                raise ConfigError(f"body {spec!r} in d={d}: {exc}") from None


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
