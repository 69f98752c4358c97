"""Loading of run configurations from files and the environment."""

import json
import logging
import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Mapping

from dotenv import dotenv_values, find_dotenv
from pydantic import ValidationError

from tincell.errors import ConfigError
from tincell.models.config import LoadedConfig, RunConfig

logger = logging.getLogger(__name__)

ENV_PREFIX = "TINCELL_"


def _read_file(path: Path) -> dict[str, Any]:
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    suffix = path.suffix.lower()
    if suffix == ".toml":
        try:
            with path.open("rb") as fh:
                return tomllib.load(fh)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"{path}: {e}") from e
    if suffix == ".json":
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(
                f"{path}: line {e.lineno}, column {e.colno}: {e.msg}"
            ) from e
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return data
    raise ConfigError(f"unsupported config format '{suffix}', use .toml or .json")


def read_env(
    environ: Mapping[str, str] | None = None, env_file: Path | None = None
) -> dict[str, str]:
    """``TINCELL_*`` settings from a .env file overlaid with the process environment.

    Args:
        environ: Environment to read; defaults to ``os.environ``
        env_file: Explicit .env file; by default the nearest one is searched
            from the working directory upwards

    Returns:
        Mapping of lower-cased field names (prefix stripped) to raw strings
    """
    dotenv_path = env_file if env_file is not None else find_dotenv(usecwd=True)
    merged = {
        **{k: v for k, v in dotenv_values(dotenv_path).items() if v is not None},
        **(os.environ if environ is None else environ),
    }
    return {
        key[len(ENV_PREFIX) :].lower(): value
        for key, value in merged.items()
        if key.startswith(ENV_PREFIX)
    }


def _check_known(values: Mapping[str, Any], origin: str) -> None:
    known = RunConfig.model_fields
    for key in values:
        if key not in known:
            raise ConfigError(f"{origin}: unknown key '{key}'", field=key)


def load_config(
    path: Path | None = None,
    overrides: Mapping[str, Any] | None = None,
    environ: Mapping[str, str] | None = None,
    env_file: Path | None = None,
) -> LoadedConfig:
    """Resolve a run configuration.

    Precedence is overrides (CLI flags) > config file > environment >
    built-in defaults. ``None`` overrides are ignored.

    Args:
        path: TOML or JSON config file
        overrides: Values set on the command line
        environ: Environment to read ``TINCELL_*`` keys from
        env_file: .env file to read before the environment

    Returns:
        LoadedConfig with the validated RunConfig and the list of defaulted
        fields

    Raises:
        ConfigError: On unreadable files, unknown keys, or values that
            violate a field constraint; ``field`` names the offending key
    """
    env = read_env(environ, env_file)
    _check_known(env, "environment")
    file_values = _read_file(path) if path is not None else {}
    _check_known(file_values, str(path))
    cli_values = {k: v for k, v in (overrides or {}).items() if v is not None}
    _check_known(cli_values, "command line")

    merged = {**env, **file_values, **cli_values}
    try:
        run = RunConfig.model_validate(merged)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or None
        where = f"value for '{field}'" if field else "configuration"
        raise ConfigError(f"invalid {where}: {first['msg']}", field=field) from e

    defaults = tuple(sorted(set(RunConfig.model_fields) - set(merged)))
    from_env = tuple(sorted(set(env) - set(file_values) - set(cli_values)))
    logger.debug("config resolved; defaults used for %s", ", ".join(defaults) or "none")
    return LoadedConfig(run=run, source=path, defaults=defaults, from_env=from_env)
