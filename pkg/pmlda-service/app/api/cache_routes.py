from fastapi import APIRouter, HTTPException

from ..models.cache_models import CacheActionResult
from ..services.cache_service import get_cache_service

router = APIRouter(prefix="/cache", tags=["cache"])


@router.get("/stats")
def get_cache_stats():
    """Get cache statistics"""
    return get_cache_service().stats()


@router.post("/cleanup", response_model=CacheActionResult)
def cleanup_cache():
    """Clean up expired cache entries"""
    removed = get_cache_service().cleanup_expired()
    return CacheActionResult(message="Cache cleanup completed", removed=removed)


@router.delete("/clear", response_model=CacheActionResult)
def clear_cache():
    """Clear all cached runs"""
    try:
        removed = get_cache_service().clear()
        return CacheActionResult(message=f"Cleared {removed} cache entries", removed=removed)
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))
