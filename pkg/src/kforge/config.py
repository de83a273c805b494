"""Server configuration: file, environment, and flag layering.

Precedence is flags > environment (KF_*) > config file > defaults.
Config files are TOML or JSON, picked by extension.  Secrets are passed
by value through the environment, never written back to disk.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import ConfigInvalid

ENV_PREFIX = "KF_"


@dataclass(frozen=True)
class ServerConfig:
    site_name: str = "Knowledge Forge"
    tagline: str = "Version-controlled collaborative knowledge"
    base_url: str = "http://localhost:8000"
    host: str = "127.0.0.1"
    port: int = 8000

    # forge access
    forge_api_base: str = "sim://"  # sim:// selects the in-memory simulator
    forge_token: str = ""
    forge_oauth_token_url: str = ""
    forge_oauth_client_id: str = ""
    forge_oauth_client_secret: str = ""
    template_repo: str = "kforge/article-template"

    content_file: str = "README.md"
    namespace_prefix: str = "askci-term-"
    failure_threshold: int = 3
    review_pending_timeout: float = 3600.0

    mail_backend: str = "memory"  # memory | smtp
    mail_url: str = ""
    mail_from: str = "noreply@localhost"

    discourse_secret: str = ""
    admin_logins: tuple[str, ...] = ()

    store_path: str = ""  # empty means purely in-memory

    def validate(self) -> "ServerConfig":
        if not self.namespace_prefix:
            raise ConfigInvalid("namespace_prefix", "must be non-empty")
        if not self.content_file:
            raise ConfigInvalid("content_file", "must be non-empty")
        if not self.site_name:
            raise ConfigInvalid("site_name", "must be non-empty")
        if self.failure_threshold < 1:
            raise ConfigInvalid("failure_threshold", "must be positive")
        if self.mail_backend not in ("memory", "smtp"):
            raise ConfigInvalid("mail_backend", "must be 'memory' or 'smtp'")
        if self.mail_backend == "smtp" and not self.mail_url:
            raise ConfigInvalid("mail_url", "required for the smtp backend")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(ServerConfig)}


def _coerce(name: str, value):
    current = getattr(ServerConfig(), name)
    if isinstance(current, bool):
        return str(value).lower() in ("1", "true", "yes")
    if isinstance(current, int) and not isinstance(current, bool):
        return int(value)
    if isinstance(current, float):
        return float(value)
    if isinstance(current, tuple):
        if isinstance(value, (list, tuple)):
            return tuple(value)
        return tuple(v.strip() for v in str(value).split(",") if v.strip())
    return str(value)


def _from_file(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigInvalid("config_file", f"{path} does not exist")
    if path.suffix == ".json":
        data = json.loads(path.read_text())
    elif path.suffix == ".toml":
        data = tomllib.loads(path.read_text())
    else:
        raise ConfigInvalid("config_file", f"unsupported extension {path.suffix!r}")
    if not isinstance(data, dict):
        raise ConfigInvalid("config_file", "top level must be a table/object")
    return data


def load_config(
    path: str | Path | None = None,
    env: dict | None = None,
    overrides: dict | None = None,
) -> ServerConfig:
    env = os.environ if env is None else env
    values: dict = {}
    if path:
        values.update(_from_file(path))
    for name in _FIELD_TYPES:
        env_key = ENV_PREFIX + name.upper()
        if env_key in env:
            values[name] = env[env_key]
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    unknown = set(values) - set(_FIELD_TYPES)
    if unknown:
        raise ConfigInvalid(sorted(unknown)[0], "unknown config field")
    coerced = {name: _coerce(name, value) for name, value in values.items()}
    return ServerConfig(**coerced).validate()
