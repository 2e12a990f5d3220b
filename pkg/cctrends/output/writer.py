from pathlib import Path
import json
import logging

from pydantic import BaseModel

from cctrends.errors import InputError

logger = logging.getLogger(__name__)


def atomic_write_text(path: str | Path, text: str) -> Path:
    """
    Write text to path through a temp file and an atomic rename.

    Args:
        path: Destination file; parent directories are created
        text: Content

    Returns:
        The destination path

    Raises:
        InputError: If the file cannot be written
    """
    path = Path(path)
    temp_path = path.with_name(path.name + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        temp_path.write_text(text, encoding="utf-8")
        temp_path.replace(path)
    except OSError as e:
        # Clean up temp file if it exists
        if temp_path.exists():
            temp_path.unlink()
        raise InputError(f"Failed to write {path}: {e}")
    logger.debug(f"[atomic_write_text] wrote {path}")
    return path


def dump_json(obj: BaseModel | dict | list) -> str:
    """Deterministic JSON: sorted keys, two-space indent, trailing newline."""
    if isinstance(obj, BaseModel):
        obj = obj.model_dump(mode="json")
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path: str | Path, obj: BaseModel | dict | list) -> Path:
    return atomic_write_text(path, dump_json(obj))
