import logging

from fastapi import HTTPException

from app.utils.errors import InputError, NumericalFailure

logger = logging.getLogger(__name__)


def to_http_exception(e: Exception) -> HTTPException:
    """400 for bad input, 422 for numerical breakdown, 500 for anything else."""
    if isinstance(e, NumericalFailure):
        logger.error(f"❌ Numerical failure: {e}")
        return HTTPException(status_code=422, detail=str(e))
    if isinstance(e, ValueError):
        logger.warning(f"❌ Validation error: {e}")
        return HTTPException(status_code=400, detail=str(e))
    logger.exception(f"❌ Unexpected error: {e}")
    return HTTPException(status_code=500, detail=f"Internal server error: {str(e)}")
