from typing import List, Optional

from pydantic import BaseModel, Field

from app.config import RunConfig

# corpus as nested lists: documents x words x features
Corpus = List[List[List[float]]]


class FitRequest(BaseModel):
    corpus: Corpus = Field(min_length=1)
    config: RunConfig = Field(default_factory=RunConfig)
    n_workers: Optional[int] = Field(default=None, ge=1)


class FcmRequest(BaseModel):
    corpus: Corpus = Field(min_length=1)
    config: RunConfig = Field(default_factory=RunConfig)


class SegmentRequest(BaseModel):
    memberships: Corpus = Field(min_length=1)
    layout: List[List[List[int]]] = Field(min_length=1)
    height: int = Field(ge=1)
    width: int = Field(ge=1)
    lo: float = 0.4
    hi: float = 0.6


class RocRequest(BaseModel):
    scores: List[List[float]]
    truth: List[List[int]]
    coverage: Optional[List[List[bool]]] = None
    crisp: Optional[List[List[int]]] = None
    topic: Optional[int] = Field(default=None, ge=0)
