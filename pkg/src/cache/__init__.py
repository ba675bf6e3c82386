"""Result cache for experiment runs.

SQLite storage of finished report texts with TTL expiry.
"""

from src.cache.sqlite_cache import ResultCache, result_key

__all__ = ["ResultCache", "result_key"]
