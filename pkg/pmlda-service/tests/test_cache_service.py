from datetime import datetime, timedelta

import pytest

from app.services.cache_service import RunCacheService


@pytest.fixture
def cache():
    return RunCacheService(enabled=True, expiry_hours=1, mongodb_uri="")


class TestRunCacheService:
    def test_hash_is_stable_and_order_free(self):
        a = RunCacheService.request_hash("fit", [[[1.0]]], {"K": 2, "T": 5})
        b = RunCacheService.request_hash("fit", [[[1.0]]], {"T": 5, "K": 2})
        assert a == b and len(a) == 64
        assert a != RunCacheService.request_hash("fcm", [[[1.0]]], {"K": 2, "T": 5})
        assert a != RunCacheService.request_hash("fit", [[[1.0]]], {"K": 2, "T": 6})

    def test_put_then_get(self, cache):
        assert cache.get("fit", [[[1.0]]], {"K": 2}) is None
        assert cache.put("fit", [[[1.0]]], {"K": 2}, {"log_joint": -3.5})
        assert cache.get("fit", [[[1.0]]], {"K": 2}) == {"log_joint": -3.5}
        assert cache.stats() == {"cache_enabled": True, "backend": "memory",
                                 "memory_entries": 1, "memory_expired_entries": 0}

    def test_expired_entries(self, cache):
        cache.put("fit", [], {}, {"x": 1})
        for entry in cache._memory_cache.values():
            entry["expires_at"] = datetime.utcnow() - timedelta(minutes=1)
        assert cache.stats()["memory_expired_entries"] == 1
        assert cache.cleanup_expired() == 1
        assert cache.get("fit", [], {}) is None

    def test_no_expiry(self):
        cache = RunCacheService(enabled=True, expiry_hours=0, mongodb_uri="")
        cache.put("fcm", [], {}, {"x": 1})
        assert cache.cleanup_expired() == 0
        assert cache.get("fcm", [], {}) == {"x": 1}

    def test_clear(self, cache):
        cache.put("fit", [], {"K": 2}, {})
        cache.put("fit", [], {"K": 3}, {})
        assert cache.clear() == 2
        assert cache.stats()["memory_entries"] == 0

    def test_disabled(self):
        cache = RunCacheService(enabled=False)
        assert not cache.put("fit", [], {}, {"x": 1})
        assert cache.get("fit", [], {}) is None
        assert cache.stats() == {"cache_enabled": False}
