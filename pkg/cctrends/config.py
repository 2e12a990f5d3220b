from pathlib import Path
import json
import logging
import os

from pydantic import ValidationError

from cctrends.errors import InputError, ParseError
from cctrends.models.types import AnalysisConfig

logger = logging.getLogger(__name__)

# Config directory
CONFIG_DIR = Path.home() / ".cctrends"
CACHE_ENV_VAR = "CCTRENDS_CACHE_DIR"


class Settings:
    """Environment-derived settings."""

    def __init__(self, cache_dir: str | Path | None = None):
        if cache_dir is None:
            cache_dir = os.environ.get(CACHE_ENV_VAR) or CONFIG_DIR / "tables"
        self.cache_dir = Path(cache_dir).expanduser()


def load_config(path: str | Path | None, overrides: dict | None = None) -> AnalysisConfig:
    """
    Build the effective analysis configuration.

    Args:
        path: Optional JSON file with AnalysisConfig fields
        overrides: Explicit values (from command-line flags); None entries are ignored

    Returns:
        Validated AnalysisConfig

    Raises:
        InputError: If the file is missing or a value is invalid
    """
    data: dict = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise InputError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ParseError(f"config file {path} is not valid JSON: {e}")
        if not isinstance(data, dict):
            raise ParseError(f"config file {path} must hold a JSON object")
        logger.debug(f"[load_config] {path}: {sorted(data)}")

    if overrides:
        data.update({k: v for k, v in overrides.items() if v is not None})

    try:
        return AnalysisConfig.model_validate(data)
    except ValidationError as e:
        raise InputError(f"invalid configuration: {e}")
