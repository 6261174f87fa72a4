from datetime import datetime
from typing import Any, Dict, Optional

from pydantic import BaseModel


class CachedRun(BaseModel):
    request_hash: str
    operation: str
    config: Dict[str, Any]
    response_data: Dict[str, Any]
    created_at: datetime
    expires_at: Optional[datetime] = None


class CacheActionResult(BaseModel):
    message: str
    removed: int = 0
