from collections import OrderedDict
from threading import Lock
from typing import Generic, Hashable, Optional, TypeVar
import hashlib

V = TypeVar("V")


def cache_key(*parts: Hashable) -> str:
    key_str = "_".join(str(p) for p in parts)
    return hashlib.md5(key_str.encode()).hexdigest()


class LRUCache(Generic[V]):
    """LRU cache with entry-count eviction"""

    def __init__(self, max_entries: int = 64):
        self.max_entries = max_entries
        self.cache: OrderedDict[str, V] = OrderedDict()
        self._lock = Lock()

    def get(self, key: str) -> Optional[V]:
        with self._lock:
            if key in self.cache:
                self.cache.move_to_end(key)
                return self.cache[key]
            return None

    def put(self, key: str, value: V):
        with self._lock:
            # Remove if exists
            if key in self.cache:
                del self.cache[key]

            # Evict if needed
            while len(self.cache) >= self.max_entries and self.cache:
                self.cache.popitem(last=False)

            self.cache[key] = value

    def __len__(self) -> int:
        return len(self.cache)

    def clear(self):
        with self._lock:
            self.cache.clear()
