"""SQLite-backed cache of finished experiment results.

Results are stored as the exact JSON text written to ``report.json``, so a
cache hit reproduces the artifact byte for byte. Keys are digests of the
resolved experiment section, the seed and the package version.
"""

import asyncio
import hashlib
import json
from datetime import UTC, datetime, timedelta
from pathlib import Path
from typing import Any

import aiosqlite
import structlog

logger = structlog.get_logger(__name__)


def result_key(section: dict[str, Any], seed: int, version: str) -> str:
    """sha256 of the canonical JSON of (section, seed, version)."""
    payload = json.dumps(
        {"section": section, "seed": seed, "version": version},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ResultCache:
    """TTL cache of report texts keyed by experiment digest.

    Attributes:
        db_path: Path to the SQLite database file.
        default_ttl: TTL in seconds for new entries.
    """

    def __init__(self, db_path: str, default_ttl: int = 7 * 24 * 3600) -> None:
        self.db_path = db_path
        self.default_ttl = default_ttl
        self._lock = asyncio.Lock()
        self._db: aiosqlite.Connection | None = None

    async def initialize(self) -> None:
        """Open the database and create the results table."""
        async with self._lock:
            Path(self.db_path).parent.mkdir(parents=True, exist_ok=True)
            self._db = await aiosqlite.connect(self.db_path)
            self._db.row_factory = aiosqlite.Row
            await self._db.execute(
                """
                CREATE TABLE IF NOT EXISTS results (
                    key TEXT PRIMARY KEY,
                    kind TEXT NOT NULL,
                    report TEXT NOT NULL,
                    expires_at TEXT NOT NULL
                )
                """
            )
            await self._db.execute(
                "CREATE INDEX IF NOT EXISTS idx_results_expires_at ON results(expires_at)"
            )
            await self._db.commit()
            logger.info("result_cache_initialized", db_path=self.db_path)

    async def _connection(self) -> aiosqlite.Connection:
        if self._db is None:
            await self.initialize()
        assert self._db is not None
        return self._db

    async def get(self, key: str) -> str | None:
        """Stored report text, or None when missing or expired."""
        db = await self._connection()
        async with self._lock:
            cursor = await db.execute(
                "SELECT report, expires_at FROM results WHERE key = ?", (key,)
            )
            row = await cursor.fetchone()
            if not row:
                logger.debug("result_cache_miss", key=key)
                return None
            if datetime.now(UTC) > datetime.fromisoformat(row["expires_at"]):
                logger.debug("result_cache_expired", key=key)
                await db.execute("DELETE FROM results WHERE key = ?", (key,))
                await db.commit()
                return None
            logger.debug("result_cache_hit", key=key)
            return str(row["report"])

    async def set(self, key: str, report: str, kind: str = "", ttl: int | None = None) -> None:
        """Store a report text under ``key``."""
        db = await self._connection()
        ttl_seconds = self.default_ttl if ttl is None else ttl
        expires_at = datetime.now(UTC) + timedelta(seconds=ttl_seconds)
        async with self._lock:
            await db.execute(
                "INSERT OR REPLACE INTO results (key, kind, report, expires_at) VALUES (?, ?, ?, ?)",
                (key, kind, report, expires_at.isoformat()),
            )
            await db.commit()
            logger.debug("result_cache_set", key=key, kind=kind, ttl_seconds=ttl_seconds)

    async def delete(self, key: str) -> None:
        db = await self._connection()
        async with self._lock:
            await db.execute("DELETE FROM results WHERE key = ?", (key,))
            await db.commit()

    async def cleanup_expired(self) -> int:
        """Remove expired entries and return how many were removed."""
        db = await self._connection()
        now = datetime.now(UTC).isoformat()
        async with self._lock:
            cursor = await db.execute(
                "DELETE FROM results WHERE expires_at < ? RETURNING key", (now,)
            )
            count = len(list(await cursor.fetchall()))
            await db.commit()
            logger.info("result_cache_cleanup_completed", deleted_count=count)
            return count

    async def close(self) -> None:
        if self._db:
            await self._db.close()
            self._db = None
            logger.info("result_cache_closed")
