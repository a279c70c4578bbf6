"""
Configuration manager for NDSQ.
Loads JSON or YAML experiment files, merges command-line overrides and
saves the effective configuration next to run outputs.
"""

import json
import re
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from pydantic import ValidationError

from core.exceptions import ConfigError
from utils.logger import get_logger

from .schema import ExperimentConfig, validate_config_file

EFFECTIVE_CONFIG = "config.json"


def _key_line(text: str, key: str) -> Optional[int]:
    """First line declaring ``key`` in JSON or YAML text."""
    pattern = re.compile(r'^\s*["\']?' + re.escape(key) + r'["\']?\s*:|[{,]\s*"' + re.escape(key) + r'"\s*:')
    for line_no, line in enumerate(text.splitlines(), start=1):
        if pattern.search(line):
            return line_no
    return None


class ConfigManager:
    """Experiment configuration from a file plus overrides."""

    def __init__(self, config_file: Optional[Union[str, Path]] = None,
                 overrides: Optional[Dict[str, Any]] = None):
        """
        Initialize configuration manager.

        Args:
            config_file: optional JSON (``.json``) or YAML (``.yaml``/``.yml``) file
            overrides: values that win over the file (``None`` entries are ignored)

        Raises:
            ConfigError: for unreadable or malformed files, unknown keys and
                inconsistent values; messages name the key and file line
        """
        self.logger = get_logger("config.manager")
        self.config_file = Path(config_file) if config_file else None
        self._text = ""
        data = self._load_file() if self.config_file else {}
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
        self.config = self._validate(data)

    def _load_file(self) -> Dict[str, Any]:
        path = self.config_file
        try:
            self._text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config file {path}: {e}", path=str(path)) from e

        if path.suffix.lower() in (".yaml", ".yml"):
            try:
                data = yaml.safe_load(self._text)
            except yaml.YAMLError as e:
                mark = getattr(e, "problem_mark", None)
                line = mark.line + 1 if mark is not None else None
                raise ConfigError(f"{path}:{line}: malformed YAML: {e}", path=str(path), line=line) from e
        else:
            try:
                data = json.loads(self._text)
            except json.JSONDecodeError as e:
                raise ConfigError(f"{path}:{e.lineno}: malformed JSON: {e.msg}",
                                  path=str(path), line=e.lineno) from e

        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping of keys to values", path=str(path))
        unknown = [k for k in data if k not in ExperimentConfig.model_fields]
        if unknown:
            key = unknown[0]
            line = _key_line(self._text, key)
            raise ConfigError(f"{path}:{line}: unknown key '{key}'", path=str(path), key=key, line=line)
        self.logger.info(f"Configuration loaded from {path}")
        return dict(data)

    def _validate(self, data: Dict[str, Any]) -> ExperimentConfig:
        try:
            return validate_config_file(data)
        except ValidationError as e:
            error = e.errors()[0]
            key = ".".join(str(p) for p in error.get("loc", ())) or None
            where = ""
            if key and self.config_file is not None:
                line = _key_line(self._text, key)
                where = f"{self.config_file}:{line}: " if line else f"{self.config_file}: "
            message = error.get("msg", str(e)).removeprefix("Value error, ")
            raise ConfigError(f"{where}{key + ': ' if key else ''}{message}", key=key) from e

    def get(self, key: str, default=None):
        return getattr(self.config, key, default)

    def set(self, key: str, value) -> ExperimentConfig:
        """Set one key; the configuration is revalidated."""
        if key not in ExperimentConfig.model_fields:
            raise ConfigError(f"unknown key '{key}'", key=key)
        data = self.config.model_dump()
        data[key] = value
        self.config = self._validate(data)
        return self.config

    def save(self, path: Optional[Union[str, Path]] = None) -> Path:
        """
        Write the effective configuration as JSON.

        Args:
            path: destination; defaults to ``<output_dir>/config.json``
        """
        path = save_config(self.config, path)
        self.logger.debug(f"Configuration saved to {path}")
        return path


def save_config(config: ExperimentConfig, path: Optional[Union[str, Path]] = None) -> Path:
    """Write a validated configuration as JSON (default ``<output_dir>/config.json``)."""
    path = Path(path) if path else Path(config.output_dir) / EFFECTIVE_CONFIG
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(config.model_dump(mode="json"), f, indent=2, sort_keys=True)
    return path


def parse_config(path: Optional[Union[str, Path]] = None,
                 overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Configuration from an optional file merged with overrides (overrides win)."""
    return ConfigManager(path, overrides).config
