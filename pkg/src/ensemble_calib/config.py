"""Flat ``key = value`` configuration files for :class:`StudyConfig`.

Blank lines and ``#`` comments are ignored. Keys mirror the fields of
``StudyConfig``; list-valued keys (``prior_means``, ``seeds``) take comma
separated integers or an inclusive range ``a..b``. ``missing_beta`` may be
``none``. Unknown keys are rejected.

Example::

    # second study, strong missing feature
    missing_beta = 3
    mode = sampling
    seeds = 0..9
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, fields
from pathlib import Path

from .errors import ConfigError
from .simulation import StudyConfig

_INT = {"d", "n_train", "n_calib", "n_test", "n_samples", "grid_size", "mc_reps", "inner_reps"}
_FLOAT = {"sigma2", "prior_scale", "alpha", "epsilon"}
_LIST = {"prior_means", "seeds"}


def parse_int_list(text: str, key: str = "seeds") -> tuple[int, ...]:
    text = text.strip()
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError
            return tuple(range(lo, hi + 1))
        items = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(key, f"{key}: expected integers or a range a..b, got {text!r}") from None
    if not items:
        raise ConfigError(key, f"{key}: empty list")
    return items


def _parse_bool(text: str, key: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(key, f"{key}: expected a boolean, got {text!r}")


def coerce(key: str, text: str):
    """Convert the raw string ``text`` to the type of field ``key``."""
    try:
        if key in _INT:
            return int(text)
        if key in _FLOAT:
            return float(text)
    except ValueError:
        raise ConfigError(key, f"{key}: cannot parse {text!r}") from None
    if key in _LIST:
        return parse_int_list(text, key)
    if key == "fixed_beta":
        return _parse_bool(text, key)
    if key == "mode":
        return text.strip().lower()
    if key == "missing_beta":
        if text.strip().lower() in ("", "none", "absent"):
            return None
        try:
            return float(text)
        except ValueError:
            raise ConfigError(key, f"{key}: cannot parse {text!r}") from None
    raise ConfigError(key, f"unknown configuration key {key!r}")


def parse_config_text(text: str, **overrides) -> StudyConfig:
    known = {f.name for f in fields(StudyConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ConfigError(key, f"unknown configuration key {key!r}")
        values[key] = coerce(key, value)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return StudyConfig(**values)


def parse_config(path, **overrides) -> StudyConfig:
    """Read and validate a config file; an empty file yields the first-study defaults.

    Raises ``FileNotFoundError``/``OSError`` for unreadable paths and
    ``ConfigError`` naming the key for invalid entries.
    """
    text = Path(path).read_text(encoding="utf-8")
    return parse_config_text(text, **overrides)


def config_hash(cfg: StudyConfig) -> str:
    """SHA-256 over a canonical JSON rendering of the config."""
    payload = json.dumps(asdict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def dump_config(cfg: StudyConfig) -> str:
    """Render ``cfg`` back to the ``key = value`` format."""
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        elif value is None:
            value = "none"
        elif isinstance(value, bool):
            value = str(value).lower()
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"
