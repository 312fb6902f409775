"""Model parameters and unit handling.

Every rate inside the package is per year and every duration is in years.
Conversions from hours/days/weeks happen only in :func:`parse_duration` and
:func:`parse_rate`, which the CLI and the config-file loader use.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields, replace

HOURS_PER_YEAR = 8760.0
DURATION_UNITS = {"h": 1.0 / HOURS_PER_YEAR, "d": 24.0 / HOURS_PER_YEAR,
                  "w": 168.0 / HOURS_PER_YEAR, "y": 1.0}

# defaults: drive MTTF 10 years, repair 6 hours, sector errors every 2 days,
# scrub every 6 hours, 5-year deployment
DEFAULT_LAMBDA = 0.1
DEFAULT_MU = HOURS_PER_YEAR / 6.0
DEFAULT_LAMBDA_S = 365.0 / 2.0
DEFAULT_MU_S = HOURS_PER_YEAR / 6.0
DEFAULT_HORIZON = 5.0


class ConfigError(ValueError):
    """Invalid parameter value or unparseable config input."""


@dataclass(frozen=True)
class RaidConfig:
    n_data: int
    m_check: int
    lam: float = DEFAULT_LAMBDA
    mu: float = DEFAULT_MU
    p: float = 0.0
    lambda_s: float = DEFAULT_LAMBDA_S
    mu_s: float = DEFAULT_MU_S
    h: float = 0.0
    horizon: float = DEFAULT_HORIZON

    def __post_init__(self):
        if int(self.n_data) != self.n_data or self.n_data < 1:
            raise ConfigError(f"n_data must be an integer >= 1, got {self.n_data!r}")
        if int(self.m_check) != self.m_check or self.m_check < 0:
            raise ConfigError(f"m_check must be an integer >= 0, got {self.m_check!r}")
        for name in ("lam", "mu", "lambda_s", "mu_s", "h"):
            v = getattr(self, name)
            if not (v >= 0.0 and v < float("inf")):
                raise ConfigError(f"{name} must be finite and >= 0, got {v!r}")
        if not 0.0 <= self.p < 1.0:
            raise ConfigError(f"p must lie in [0, 1), got {self.p!r}")
        if not (self.horizon > 0.0 and self.horizon < float("inf")):
            raise ConfigError(f"horizon must be finite and > 0, got {self.horizon!r}")

    @property
    def total(self) -> int:
        return self.n_data + self.m_check

    def with_(self, **changes) -> "RaidConfig":
        return replace(self, **changes)


# config-file / CLI key -> RaidConfig field
CONFIG_KEYS = {
    "n": "n_data", "m": "m_check", "lambda": "lam", "mu": "mu", "p": "p",
    "lambda_s": "lambda_s", "mu_s": "mu_s", "h": "h", "horizon": "horizon",
    "t": "horizon",
}
RATE_KEYS = {"lambda", "mu", "lambda_s", "mu_s"}
DURATION_KEYS = {"h", "horizon", "t"}
INT_KEYS = {"n", "m"}

_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_DURATION_RE = re.compile(rf"^\s*({_NUM})\s*([hdwy]?)\s*$")


def parse_duration(text: str, raw: bool = False) -> float:
    """'6h' -> years. A bare number is already in years."""
    m = _DURATION_RE.match(text)
    if m is None:
        raise ConfigError(f"cannot parse duration {text!r}")
    value, unit = float(m.group(1)), m.group(2)
    if raw:
        if unit:
            raise ConfigError(f"unit suffix not allowed with raw units: {text!r}")
        return value
    return value * DURATION_UNITS[unit or "y"]


def parse_rate(text: str, raw: bool = False) -> float:
    """Rate per year from '0.1', '1/10y', '1/6h' or '3/1w'."""
    if "/" in text:
        num, _, den = text.partition("/")
        try:
            numerator = float(num)
        except ValueError:
            raise ConfigError(f"cannot parse rate {text!r}") from None
        duration = parse_duration(den, raw=raw)
        if duration <= 0:
            raise ConfigError(f"rate denominator must be positive: {text!r}")
        return numerator / duration
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"cannot parse rate {text!r}") from None


def parse_value(key: str, text: str, raw: bool = False):
    if key in INT_KEYS:
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {text!r}") from None
    if key in RATE_KEYS:
        return parse_rate(text, raw)
    if key in DURATION_KEYS:
        return parse_duration(text, raw)
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"cannot parse {key} = {text!r}") from None


def read_config_values(path, raw: bool = False) -> dict:
    """Parse a ``key = value`` file into RaidConfig field values.

    Blank lines and ``#`` comments are ignored. Unknown keys and malformed
    lines raise :class:`ConfigError` naming the line number.
    """
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, text = line.partition("=")
            key = key.strip().lower()
            if not sep or not text.strip():
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            if key not in CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[CONFIG_KEYS[key]] = parse_value(key, text.strip(), raw)
            except ConfigError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return values


def load_config(path, overrides: dict | None = None, raw: bool = False) -> RaidConfig:
    """Build a RaidConfig from a file; ``overrides`` (field -> value) win."""
    values = read_config_values(path, raw=raw)
    values.update(overrides or {})
    known = {f.name for f in fields(RaidConfig)}
    missing = {"n_data", "m_check"} - values.keys()
    if missing:
        raise ConfigError(f"{path}: missing required keys {sorted(missing)}")
    return RaidConfig(**{k: v for k, v in values.items() if k in known})
