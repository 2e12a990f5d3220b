from pathlib import Path
from typing import List, Optional
import json
import logging

from pydantic import ValidationError

from cctrends.cache.lru import LRUCache, cache_key
from cctrends.errors import AnalysisError, TableError
from cctrends.models.types import TABLE_FORMAT_VERSION, LimitLawCatalog, LimitLawTable
from cctrends.output.writer import write_json

logger = logging.getLogger(__name__)

# Global in-memory layer shared by every TableCache
table_memory: LRUCache[LimitLawTable] = LRUCache(max_entries=256)


def table_key(s: int, n_steps: int, n_reps: int, seed: int) -> str:
    return cache_key(s, n_steps, n_reps, seed, f"v{TABLE_FORMAT_VERSION}")


def parse_table(data: dict, source: str) -> LimitLawTable:
    """
    Validate a table body, refusing other format versions.

    Raises:
        TableError: Wrong version or invalid body
    """
    version = data.get("format_version")
    if version != TABLE_FORMAT_VERSION:
        raise TableError(
            f"{source}: table format version {version} does not match {TABLE_FORMAT_VERSION}"
        )
    try:
        return LimitLawTable.model_validate(data)
    except ValidationError as e:
        raise TableError(f"{source}: invalid limit-law table: {e}")


class TableCache:
    """
    Limit-law tables keyed by (s, n_steps, n_reps, seed, format version).

    Lookup goes memory → disk. Disk failures are logged and the caller
    computes in memory.
    """

    def __init__(self, cache_dir: str | Path, memory: LRUCache[LimitLawTable] | None = None):
        self.cache_dir = Path(cache_dir)
        self.memory = table_memory if memory is None else memory

    def path(self, s: int, n_steps: int, n_reps: int, seed: int) -> Path:
        return self.cache_dir / f"zeta_s{s}_{table_key(s, n_steps, n_reps, seed)}.json"

    def get(self, s: int, n_steps: int, n_reps: int, seed: int) -> Optional[LimitLawTable]:
        key = table_key(s, n_steps, n_reps, seed)
        table = self.memory.get(key)
        if table is not None:
            return table

        path = self.path(s, n_steps, n_reps, seed)
        if not path.exists():
            return None
        try:
            table = parse_table(json.loads(path.read_text()), str(path))
        except TableError as e:
            logger.warning(f"Ignoring cached table: {e.detail}")
            return None
        except (OSError, json.JSONDecodeError) as e:
            logger.warning(f"Failed to read cached table {path}: {e}")
            return None

        self.memory.put(key, table)
        return table

    def put(self, table: LimitLawTable):
        self.memory.put(table_key(table.s, table.n_steps, table.n_reps, table.seed), table)
        path = self.path(table.s, table.n_steps, table.n_reps, table.seed)
        try:
            write_json(path, table)
            logger.debug(f"[TableCache.put] {path}")
        except AnalysisError as e:
            logger.warning(f"Table for s={table.s} kept in memory only: {e.detail}")

    def list(self) -> List[LimitLawTable]:
        """Readable tables on disk, sorted by (s, n_steps, n_reps, seed)."""
        if not self.cache_dir.is_dir():
            return []
        tables: List[LimitLawTable] = []
        for path in sorted(self.cache_dir.glob("zeta_s*.json")):
            try:
                tables.append(parse_table(json.loads(path.read_text()), str(path)))
            except (TableError, OSError, json.JSONDecodeError) as e:
                logger.warning(f"Skipping {path}: {e}")
        return sorted(tables, key=lambda t: (t.s, t.n_steps, t.n_reps, t.seed))


def load_catalog(path: str | Path) -> LimitLawCatalog:
    """
    Read a catalog written by `critval --out`.

    Raises:
        TableError: Missing file, wrong version or invalid body
    """
    path = Path(path)
    if not path.exists():
        raise TableError(f"critical-value file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise TableError(f"Failed to read {path}: {e}")
    raw = data.get("tables", {}) if isinstance(data, dict) else {}
    if not raw:
        raise TableError(f"{path} holds no limit-law tables")
    tables = {int(s): parse_table(body, f"{path} (s={s})") for s, body in raw.items()}
    return LimitLawCatalog(tables=tables)
