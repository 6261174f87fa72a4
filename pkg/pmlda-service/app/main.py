import logging

import uvicorn
from fastapi import FastAPI

from app.api.middleware import setup_middleware
from app.api.routes import health, inference, segmentation
from app.config import settings
from .api import cache_routes

logger = logging.getLogger(__name__)


def create_app() -> FastAPI:
    """Create and configure FastAPI application"""
    app = FastAPI(
        title="PM-LDA Service",
        version="1.0.0",
        description="Partial-membership topic modelling for image segmentation"
    )

    setup_middleware(app)

    app.include_router(health.router, tags=["health"])
    app.include_router(inference.router, tags=["inference"])
    app.include_router(segmentation.router, tags=["segmentation"])
    app.include_router(cache_routes.router)
    return app


app = create_app()

if __name__ == "__main__":
    logging.basicConfig(level=settings.log_level.upper())
    logger.info("🚀 Starting PM-LDA API...")
    logger.info(f"🗄️ Result cache: {'MongoDB' if settings.mongodb_uri else 'memory'}"
                f"{'' if settings.cache_enabled else ' (disabled)'}")

    uvicorn.run(
        "app.main:app",
        host="0.0.0.0",
        port=8000,
        reload=True,
        log_level=settings.log_level.lower()
    )
