"""Flat TOML configuration with NEWSKY_<KEY> environment overrides.

Every key in the file maps 1:1 to a Config field; unknown keys are
rejected so typos fail loudly instead of silently using defaults.
"""

from __future__ import annotations

import dataclasses
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Union

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ENV_PREFIX = "NEWSKY_"


class ConfigError(ValueError):
    """Unreadable file, unknown key or uncoercible value."""


@dataclass
class Config:
    store_path: str = "newsky.db"
    # rating files; orientation files are optional
    score_file: Optional[str] = None
    mbfc_file: Optional[str] = None
    allsides_file: Optional[str] = None
    newsguard_file: Optional[str] = None
    # record-fetch endpoint
    appview_url: str = "https://public.api.bsky.app"
    resolver_rate_per_sec: float = 10.0
    resolver_batch_limit: int = 25
    resolver_cache_capacity: int = 500_000
    resolver_retries: int = 3
    # ingest
    live_endpoint: str = "wss://bsky.network/xrpc/com.atproto.sync.subscribeRepos"
    queue_size: int = 10_000
    flush_every: int = 200
    # api
    api_host: str = "127.0.0.1"
    api_port: int = 8420
    max_buckets: int = 50_000
    cache_max_age: int = 60
    # analytics defaults
    seed: int = 42
    min_cooccurrence: int = 1
    mixed_counts_as: str = "unreliable"
    top_words: int = 20


_FIELDS = {field.name: field for field in dataclasses.fields(Config)}


def _coerce(name: str, value, target) -> object:
    if target == "Optional[str]" or target is Optional[str]:
        return str(value)
    if target is str or target == "str":
        return str(value)
    if target is int or target == "int":
        if isinstance(value, bool):
            raise ConfigError(f"{name}: expected integer, got boolean")
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{name}: expected integer, got {value!r}") from None
    if target is float or target == "float":
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{name}: expected number, got {value!r}") from None
    return value


def load_config(
    path: Optional[Union[str, Path]] = None,
    env: Optional[Mapping] = None,
) -> Config:
    """File values (if any) layered under environment overrides."""
    values: dict = {}
    if path is not None:
        path = Path(path)
        try:
            with path.open("rb") as fh:
                data = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
        for key, value in data.items():
            if key not in _FIELDS:
                raise ConfigError(f"{path}: unknown config key {key!r}")
            values[key] = _coerce(key, value, _FIELDS[key].type)

    env = os.environ if env is None else env
    for name, field in _FIELDS.items():
        env_key = ENV_PREFIX + name.upper()
        if env_key in env:
            values[name] = _coerce(name, env[env_key], field.type)

    return Config(**values)
