from fastapi import Request
from starlette.middleware.base import BaseHTTPMiddleware
import random
from ..services.cache_service import get_cache_service


class CacheCleanupMiddleware(BaseHTTPMiddleware):
    def __init__(self, app, cleanup_probability: float = 0.01, rng: random.Random = None):
        super().__init__(app)
        self.cleanup_probability = cleanup_probability
        self.rng = rng or random.Random()

    async def dispatch(self, request: Request, call_next):
        response = await call_next(request)

        # occasional cleanup after a request (1% chance by default)
        if self.rng.random() < self.cleanup_probability:
            get_cache_service().cleanup_expired()

        return response
