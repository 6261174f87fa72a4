from typing import Optional

from fastapi import APIRouter, Depends, File, Form, UploadFile

from app.api.errors import to_http_exception
from app.api.routes.inference import get_pmlda_service
from app.config import load_run_config
from app.models.requests import RocRequest, SegmentRequest
from app.models.responses import FeaturesResponse, RocResponse, SegmentResponse
from app.services.pmlda_service import PmldaService

router = APIRouter()


@router.post("/features", response_model=FeaturesResponse)
async def extract_features(
    image: UploadFile = File(...),
    extractor: str = Form("intensity_entropy"),
    window: Optional[int] = Form(None),
    stride: Optional[int] = Form(None),
    sigma: Optional[float] = Form(None),
    entropy_window: Optional[int] = Form(None),
    labels: Optional[UploadFile] = File(None),
    service: PmldaService = Depends(get_pmlda_service),
):
    """Visual words from an uploaded PGM/PPM, tiled or grouped by a label map"""
    try:
        config = load_run_config(overrides={"window": window, "stride": stride, "sigma": sigma,
                                            "entropy_window": entropy_window})
        image_bytes = await image.read()
        label_bytes = await labels.read() if labels is not None else None
        labels_csv = labels is not None and (labels.filename or "").lower().endswith(".csv")
        return service.features(image_bytes, extractor, config, label_bytes, labels_csv)
    except Exception as e:
        raise to_http_exception(e)


@router.post("/segment", response_model=SegmentResponse)
def segment(request: SegmentRequest, service: PmldaService = Depends(get_pmlda_service)):
    """Membership maps, crisp labels and transition mask"""
    try:
        return service.segment(request)
    except Exception as e:
        raise to_http_exception(e)


@router.post("/roc", response_model=RocResponse)
def evaluate_roc(request: RocRequest, service: PmldaService = Depends(get_pmlda_service)):
    """Pixel-level ROC of a score map against a binary truth mask"""
    try:
        return service.roc(request)
    except Exception as e:
        raise to_http_exception(e)
