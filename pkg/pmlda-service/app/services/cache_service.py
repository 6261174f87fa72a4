import logging
from datetime import datetime, timedelta
from typing import Optional, Dict, Any
import hashlib
import json

from app.config import settings
from app.models.cache_models import CachedRun

logger = logging.getLogger(__name__)
"""
RunCacheService

Keeps the results of expensive runs (PM-LDA inference, FCM) so an identical request
is answered without sampling again. Inference is deterministic given the corpus, the
run configuration and the seed, so a hash of those three identifies a result exactly.

1. __init__:
   - Reads cache settings from app.config.settings.
   - Connects to MongoDB when PMLDA_MONGODB_URI is set, otherwise keeps entries in memory.

2. _connect:
   - Opens the MongoDB collection and creates the lookup and expiry indexes.

3. request_hash:
   - SHA-256 of the canonical JSON of (operation, corpus, config).

4. get / put:
   - Look up or store a result under its hash, honouring the expiry time.

5. cleanup_expired / clear / stats:
   - Housekeeping used by the /cache routes and the cleanup middleware.
"""


class RunCacheService:
    def __init__(self, enabled: Optional[bool] = None, expiry_hours: Optional[int] = None,
                 mongodb_uri: Optional[str] = None):
        self.cache_enabled = settings.cache_enabled if enabled is None else enabled
        self.cache_expiry_hours = settings.cache_expiry_hours if expiry_hours is None else expiry_hours
        self.mongodb_uri = settings.mongodb_uri if mongodb_uri is None else mongodb_uri

        self._memory_cache: Dict[str, Dict[str, Any]] = {}

        self.client = None
        self.collection = None

        if self.cache_enabled and self.mongodb_uri:
            self._connect()

    def _connect(self):
        try:
            from pymongo import MongoClient
            self.client = MongoClient(self.mongodb_uri, serverSelectionTimeoutMS=2000)
            db = self.client.get_database(settings.mongodb_database)
            self.collection = db.get_collection("cached_runs")

            self.collection.create_index("request_hash", unique=True)
            self.collection.create_index("expires_at")

            logger.info(f"✅ Connected to MongoDB at {settings.mongodb_database}.cached_runs")
        except Exception as e:
            logger.warning(f"❌ MongoDB connection failed, using memory cache: {e}")
            self.client = None
            self.collection = None

    @staticmethod
    def request_hash(operation: str, corpus: Any, config: Dict[str, Any]) -> str:
        """Hash of the request; corpus and config must be JSON-serialisable."""
        payload = {"operation": operation, "corpus": corpus, "config": config}
        request_str = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(request_str.encode()).hexdigest()

    def _expires_at(self) -> Optional[datetime]:
        if self.cache_expiry_hours <= 0:
            return None
        return datetime.utcnow() + timedelta(hours=self.cache_expiry_hours)

    def get(self, operation: str, corpus: Any, config: Dict[str, Any]) -> Optional[Dict[str, Any]]:
        if not self.cache_enabled:
            return None

        request_hash = self.request_hash(operation, corpus, config)
        try:
            if self.collection is not None:
                cached = self.collection.find_one({
                    "request_hash": request_hash,
                    "$or": [{"expires_at": {"$gt": datetime.utcnow()}}, {"expires_at": None}]
                })
                if cached:
                    logger.info(f"📦 MongoDB cache hit for {operation} {request_hash[:12]}")
                    return cached["response_data"]

            entry = self._memory_cache.get(request_hash)
            if entry is not None:
                if entry["expires_at"] is None or entry["expires_at"] > datetime.utcnow():
                    logger.info(f"📦 Memory cache hit for {operation} {request_hash[:12]}")
                    return entry["response_data"]
                del self._memory_cache[request_hash]

        except Exception as e:
            logger.error(f"Cache retrieval error: {e}")

        return None

    def put(self, operation: str, corpus: Any, config: Dict[str, Any], response_data: Dict[str, Any]) -> bool:
        if not self.cache_enabled:
            return False

        request_hash = self.request_hash(operation, corpus, config)
        entry = CachedRun(
            request_hash=request_hash,
            operation=operation,
            config=config,
            response_data=response_data,
            created_at=datetime.utcnow(),
            expires_at=self._expires_at(),
        ).model_dump()
        try:
            if self.collection is not None:
                self.collection.replace_one({"request_hash": request_hash}, entry, upsert=True)
                logger.info(f"Cached {operation} result to MongoDB: {request_hash[:12]}")
                return True

            self._memory_cache[request_hash] = entry
            logger.info(f"Cached {operation} result to memory: {request_hash[:12]}")
            return True

        except Exception as e:
            logger.error(f"Cache save error: {e}")
            return False

    def cleanup_expired(self) -> int:
        if not self.cache_enabled:
            return 0
        removed = 0
        try:
            now = datetime.utcnow()
            if self.collection is not None:
                result = self.collection.delete_many({"expires_at": {"$lt": now}})
                removed += result.deleted_count
                logger.info(f"Removed {result.deleted_count} expired MongoDB entries")

            expired = [k for k, v in self._memory_cache.items() if v["expires_at"] and v["expires_at"] < now]
            for k in expired:
                del self._memory_cache[k]
            removed += len(expired)

            if expired:
                logger.info(f"Removed {len(expired)} expired memory entries")

        except Exception as e:
            logger.error(f"Cache cleanup error: {e}")
        return removed

    def clear(self) -> int:
        removed = len(self._memory_cache)
        self._memory_cache.clear()
        if self.collection is not None:
            removed += self.collection.delete_many({}).deleted_count
        logger.info(f"Cleared {removed} cache entries")
        return removed

    def stats(self) -> Dict[str, Any]:
        if not self.cache_enabled:
            return {"cache_enabled": False}

        try:
            now = datetime.utcnow()
            expired = sum(1 for v in self._memory_cache.values() if v["expires_at"] and v["expires_at"] < now)
            stats = {"cache_enabled": True, "backend": "mongodb" if self.collection is not None else "memory",
                     "memory_entries": len(self._memory_cache), "memory_expired_entries": expired}
            if self.collection is not None:
                total = self.collection.count_documents({})
                expired = self.collection.count_documents({"expires_at": {"$lt": now}})
                stats.update({
                    "mongodb_total_entries": total,
                    "mongodb_active_entries": total - expired,
                    "mongodb_expired_entries": expired
                })
            return stats
        except Exception as e:
            logger.error(f"Failed to get cache stats: {e}")
            return {"cache_enabled": True, "error": str(e)}


_cache_service: Optional[RunCacheService] = None


def get_cache_service() -> RunCacheService:
    """Process-wide cache shared by the routes and the cleanup middleware."""
    global _cache_service
    if _cache_service is None:
        _cache_service = RunCacheService()
    return _cache_service
