from typing import Any, Dict, List, Optional

from pydantic import BaseModel


class TopicsOut(BaseModel):
    means: List[List[float]]
    sigma2: float


class DocumentStateOut(BaseModel):
    pi: List[float]
    s: float
    memberships: List[List[float]]


class GenerateResponse(BaseModel):
    corpus: List[List[List[float]]]
    truth: List[DocumentStateOut]
    topics: TopicsOut
    log_joint: Optional[float] = None


class FitResponse(BaseModel):
    topics: TopicsOut
    documents: List[DocumentStateOut]
    log_joint: float
    log_joint_series: List[float]
    acceptance_rates: Dict[str, float]
    sigma_bound: float
    cached: bool = False


class FcmResponse(BaseModel):
    centers: List[List[float]]
    memberships: List[List[List[float]]]
    objective_series: List[float]
    n_iter: int
    cached: bool = False


class FeaturesResponse(BaseModel):
    corpus: List[List[List[float]]]
    layout: List[List[List[int]]]
    height: int
    width: int
    dim: int
    provenance: Dict[str, Any]


class SegmentResponse(BaseModel):
    maps: List[List[List[float]]]
    coverage: List[List[bool]]
    crisp: List[List[int]]
    transition: List[List[bool]]


class RocResponse(BaseModel):
    fpr: List[float]
    tpr: List[float]
    # None stands for the +inf / -inf end thresholds
    thresholds: List[Optional[float]]
    auc: float
    crisp_point: Optional[List[float]] = None
