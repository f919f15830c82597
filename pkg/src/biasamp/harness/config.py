"""Flat key=value config files and the provenance hash embedded in outputs.

Schema: one ``key = value`` pair per line, ``#`` starts a comment, blank
lines are ignored. Keys are lowercase words joined by ``.``, ``_`` or ``-``;
values are kept as raw strings here and coerced where they are consumed.
List-valued settings are comma-separated. Duplicate keys are an error so a
mistyped override cannot silently lose.
"""

from __future__ import annotations

import hashlib
import re
from pathlib import Path

__all__ = [
    "ConfigError",
    "parse_config_text",
    "read_config",
    "canonical_text",
    "config_hash",
    "coerce_int",
    "coerce_float",
    "coerce_bool",
    "coerce_float_list",
    "coerce_int_list",
]

_KEY_RE = re.compile(r"^[a-z0-9]+([._-][a-z0-9]+)*$")


class ConfigError(ValueError):
    """A config file or config value that cannot be used."""


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not _KEY_RE.match(key):
            raise ConfigError(f"{source}:{lineno}: malformed key {key!r}")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def read_config(path: str | Path) -> dict[str, str]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config_text(p.read_text(), source=str(p))


def canonical_text(settings: dict[str, str]) -> str:
    """Settings as sorted ``key = value`` lines; the hashing preimage."""
    return "".join(f"{k} = {settings[k]}\n" for k in sorted(settings))


def config_hash(settings: dict[str, str]) -> str:
    """Short stable digest of the fully-resolved settings."""
    return hashlib.sha256(canonical_text(settings).encode()).hexdigest()[:12]


def _fail(key: str, value: str, expected: str) -> ConfigError:
    return ConfigError(f"config key {key!r}: expected {expected}, got {value!r}")


def coerce_int(settings: dict[str, str], key: str, default: int) -> int:
    if key not in settings:
        return default
    try:
        return int(settings[key])
    except ValueError:
        raise _fail(key, settings[key], "an integer") from None


def coerce_float(settings: dict[str, str], key: str, default: float) -> float:
    if key not in settings:
        return default
    try:
        return float(settings[key])
    except ValueError:
        raise _fail(key, settings[key], "a real number") from None


def coerce_bool(settings: dict[str, str], key: str, default: bool) -> bool:
    if key not in settings:
        return default
    value = settings[key].lower()
    if value in ("true", "yes", "1", "on"):
        return True
    if value in ("false", "no", "0", "off"):
        return False
    raise _fail(key, settings[key], "a boolean (true/false)")


def coerce_float_list(settings: dict[str, str], key: str, default: list[float]) -> list[float]:
    if key not in settings:
        return list(default)
    items = [s.strip() for s in settings[key].split(",") if s.strip()]
    if not items:
        raise _fail(key, settings[key], "a comma-separated list of reals")
    try:
        return [float(s) for s in items]
    except ValueError:
        raise _fail(key, settings[key], "a comma-separated list of reals") from None


def coerce_int_list(settings: dict[str, str], key: str, default: list[int]) -> list[int]:
    if key not in settings:
        return list(default)
    items = [s.strip() for s in settings[key].split(",") if s.strip()]
    if not items:
        raise _fail(key, settings[key], "a comma-separated list of integers")
    try:
        return [int(s) for s in items]
    except ValueError:
        raise _fail(key, settings[key], "a comma-separated list of integers") from None
