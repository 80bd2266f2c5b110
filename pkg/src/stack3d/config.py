"""Flat ``key = value`` run configuration.

One entry per line, ``#`` starts a comment, blank lines are ignored. Values
are kept as strings until a subcommand asks for them with a type, so every
error can name the key and the line it came from.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = []
        if key is not None:
            where.append(f"key {key!r}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.key = key
        self.line = line


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass
class Config:
    values: dict[str, str] = field(default_factory=dict)
    lines: dict[str, int] = field(default_factory=dict)
    source: str = "<config>"

    def __contains__(self, key):
        return key in self.values

    def line(self, key):
        return self.lines.get(key)

    def _err(self, key, msg):
        return ConfigError(msg, key, self.line(key))

    def check_keys(self, allowed) -> None:
        for key in self.values:
            if key not in allowed:
                raise self._err(key, "unknown key")

    def get_str(self, key, default=None, choices=None):
        if key not in self.values:
            if default is None:
                raise ConfigError("missing required key", key)
            return default
        v = self.values[key]
        if choices is not None and v not in choices:
            raise self._err(key, f"expected one of {', '.join(choices)}, got {v!r}")
        return v

    def get_float(self, key, default=None, *, low=None, high=None, low_open=False):
        if key not in self.values:
            if default is None:
                raise ConfigError("missing required key", key)
            return default
        raw = self.values[key]
        try:
            v = float(raw)
        except ValueError:
            raise self._err(key, f"not a number: {raw!r}") from None
        if v != v:
            raise self._err(key, "NaN is not allowed")
        if low is not None and (v < low or (low_open and v == low)):
            raise self._err(key, f"must be {'>' if low_open else '>='} {low}, got {v}")
        if high is not None and v > high:
            raise self._err(key, f"must be <= {high}, got {v}")
        return v

    def get_int(self, key, default=None, *, low=None):
        if key not in self.values:
            if default is None:
                raise ConfigError("missing required key", key)
            return default
        raw = self.values[key]
        try:
            v = int(raw)
        except ValueError:
            raise self._err(key, f"not an integer: {raw!r}") from None
        if low is not None and v < low:
            raise self._err(key, f"must be >= {low}, got {v}")
        return v

    def get_bool(self, key, default=False):
        if key not in self.values:
            return default
        v = self.values[key].lower()
        if v in _TRUE:
            return True
        if v in _FALSE:
            return False
        raise self._err(key, f"not a boolean: {self.values[key]!r}")

    def get_list(self, key, default=None):
        if key not in self.values:
            if default is None:
                raise ConfigError("missing required key", key)
            return list(default)
        return [t.strip() for t in self.values[key].split(",") if t.strip()]

    def get_floats(self, key, default=None, *, low=None, low_open=False):
        """Comma list, or ``start:stop:step`` with an inclusive stop."""
        if key not in self.values:
            if default is None:
                raise ConfigError("missing required key", key)
            return list(default)
        raw = self.values[key]
        try:
            if ":" in raw:
                a, b, s = (float(t) for t in raw.split(":"))
                if s <= 0 or b < a:
                    raise self._err(key, f"bad range {raw!r}")
                n = int(round((b - a) / s))
                out = [a + i * s for i in range(n + 1) if a + i * s <= b + 1e-9 * max(1.0, abs(b))]
            else:
                out = [float(t) for t in raw.split(",") if t.strip()]
        except ValueError:
            raise self._err(key, f"not a number list: {raw!r}") from None
        for v in out:
            if low is not None and (v < low or (low_open and v == low)):
                raise self._err(key, f"every value must be {'>' if low_open else '>='} {low}, got {v}")
        return out


def parse_config(text: str, source: str = "<config>") -> Config:
    cfg = Config(source=source)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {raw.strip()!r}", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", line=lineno)
        if key in cfg.values:
            raise ConfigError(f"duplicate key (first set on line {cfg.lines[key]})", key, lineno)
        cfg.values[key] = value
        cfg.lines[key] = lineno
    return cfg


def load_config(path: str | os.PathLike | None) -> Config:
    if path is None:
        return Config()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {os.fspath(path)!r}: {e.strerror}") from None
    return parse_config(text, os.fspath(path))


def parse_seeds(spec: str) -> list[int]:
    """``"7"``, ``"1,2,5"`` or ``"0-19"`` (inclusive), mixed freely."""
    seeds = []
    for tok in spec.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            if "-" in tok:
                a, b = (int(t) for t in tok.split("-", 1))
                if b < a:
                    raise ValueError
                seeds.extend(range(a, b + 1))
            else:
                seeds.append(int(tok))
        except ValueError:
            raise ConfigError(f"bad seed list {spec!r}", "--seed") from None
    if not seeds or any(s < 0 for s in seeds):
        raise ConfigError(f"bad seed list {spec!r}", "--seed")
    if len(set(seeds)) != len(seeds):
        raise ConfigError(f"duplicate seeds in {spec!r}", "--seed")
    return seeds
