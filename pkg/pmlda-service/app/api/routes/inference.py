from fastapi import APIRouter, Depends

from app.api.errors import to_http_exception
from app.models.params import GenSpec
from app.models.requests import FcmRequest, FitRequest
from app.models.responses import FcmResponse, FitResponse, GenerateResponse
from app.services.pmlda_service import PmldaService

router = APIRouter()


def get_pmlda_service() -> PmldaService:
    return PmldaService()


@router.post("/generate", response_model=GenerateResponse)
def generate(spec: GenSpec, service: PmldaService = Depends(get_pmlda_service)):
    """Simulate a corpus from the generative model"""
    try:
        return service.generate(spec)
    except Exception as e:
        raise to_http_exception(e)


@router.post("/fit", response_model=FitResponse)
def fit(request: FitRequest, service: PmldaService = Depends(get_pmlda_service)):
    """MAP inference by Metropolis-within-Gibbs sampling"""
    try:
        return service.fit(request)
    except Exception as e:
        raise to_http_exception(e)


@router.post("/fcm", response_model=FcmResponse)
def fuzzy_c_means(request: FcmRequest, service: PmldaService = Depends(get_pmlda_service)):
    """Fuzzy c-means memberships for the same corpus layout"""
    try:
        return service.fcm(request)
    except Exception as e:
        raise to_http_exception(e)
