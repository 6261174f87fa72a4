import io
import logging
from typing import List, Optional

import numpy as np

from app.config import RunConfig
from app.external import netpbm
from app.models.domain import BLOCKS, DocLayout, Document, ModelState
from app.models.params import GenSpec
from app.models.requests import FcmRequest, FitRequest, RocRequest, SegmentRequest
from app.models.responses import (
    DocumentStateOut, FcmResponse, FeaturesResponse, FitResponse, GenerateResponse,
    RocResponse, SegmentResponse, TopicsOut,
)
from app.services import features, roc, segmentation
from app.services.cache_service import RunCacheService, get_cache_service
from app.services.fcm import fcm
from app.services.generative import sample_corpus
from app.services.sampler import run_inference
from app.utils import seeding
from app.utils.errors import InputError

logger = logging.getLogger(__name__)


def _to_corpus(raw: List[List[List[float]]]) -> List[Document]:
    try:
        return [Document(np.asarray(words, dtype=np.float64)) for words in raw]
    except ValueError as e:
        raise InputError(f"malformed corpus: {e}")


def _states_out(state: ModelState) -> List[DocumentStateOut]:
    return [DocumentStateOut(pi=ds.pi.tolist(), s=float(ds.s), memberships=ds.Z.tolist()) for ds in state.docs]


def _topics_out(state: ModelState) -> TopicsOut:
    return TopicsOut(means=state.topics.means.tolist(), sigma2=state.topics.sigma2)


def _finite_or_none(values: np.ndarray) -> List[Optional[float]]:
    return [float(v) if np.isfinite(v) else None for v in values]


class PmldaService:
    """Request-level orchestration for the HTTP routes: payload conversion plus result caching."""

    def __init__(self, cache_service: Optional[RunCacheService] = None):
        self.cache_service = cache_service or get_cache_service()

    def generate(self, spec: GenSpec) -> GenerateResponse:
        corpus, truth = sample_corpus(spec)
        log_joint = float(truth.log_joint) if np.isfinite(truth.log_joint) else None
        return GenerateResponse(corpus=[doc.words.tolist() for doc in corpus], truth=_states_out(truth),
                                topics=_topics_out(truth), log_joint=log_joint)

    def fit(self, request: FitRequest) -> FitResponse:
        config_key = request.config.model_dump(by_alias=True)
        cached = self.cache_service.get("fit", request.corpus, config_key)
        if cached:
            return FitResponse(**{**cached, "cached": True})

        corpus = _to_corpus(request.corpus)
        trace = run_inference(corpus, request.config.sampler_config(n_workers=request.n_workers))
        response = FitResponse(
            topics=_topics_out(trace.best_state),
            documents=_states_out(trace.best_state),
            log_joint=trace.best_log_joint,
            log_joint_series=trace.log_joint_series,
            acceptance_rates={b: trace.acceptance_rates[b][-1] for b in BLOCKS},
            sigma_bound=trace.sigma_bound,
        )
        self.cache_service.put("fit", request.corpus, config_key, response.model_dump())
        return response

    def fcm(self, request: FcmRequest) -> FcmResponse:
        config = request.config
        config_key = {k: v for k, v in config.model_dump().items() if k in ("K", "m", "tol", "max_iter", "seed")}
        cached = self.cache_service.get("fcm", request.corpus, config_key)
        if cached:
            return FcmResponse(**{**cached, "cached": True})

        corpus = _to_corpus(request.corpus)
        X = np.vstack([doc.words for doc in corpus])
        result = fcm(X, config.K, config.m, config.tol, config.max_iter, seeding.substream(config.seed, seeding.FCM))
        blocks = np.split(result.memberships, np.cumsum([doc.N for doc in corpus])[:-1])
        response = FcmResponse(centers=result.centers.tolist(), memberships=[b.tolist() for b in blocks],
                               objective_series=result.objective_series, n_iter=result.n_iter)
        self.cache_service.put("fcm", request.corpus, config_key, response.model_dump())
        return response

    def features(self, image: bytes, extractor: str, config: RunConfig,
                 labels: Optional[bytes] = None, labels_csv: bool = False) -> FeaturesResponse:
        data = netpbm.read_image(io.BytesIO(image))
        if extractor == "gradient_color":
            if data.ndim != 3:
                raise InputError("gradient_color needs an RGB (PPM) image")
            fimg = features.extract_gradient_color(data, sigma=config.sigma)
        elif extractor == "intensity_entropy":
            fimg = features.extract_intensity_entropy(data, window=config.entropy_window,
                                                      intensity_scale=config.intensity_scale)
        elif extractor == "filter_bank":
            fimg = features.extract_filter_bank(data)
        else:
            raise InputError(f"unknown extractor {extractor}")

        if labels is not None:
            corpus, layout = features.group_by_labels(fimg, netpbm.read_label_map(io.BytesIO(labels), labels_csv))
        else:
            corpus, layout = features.tile_documents(fimg, config.window, config.stride)
        return FeaturesResponse(corpus=[doc.words.tolist() for doc in corpus],
                                layout=[c.tolist() for c in layout.coords],
                                height=fimg.height, width=fimg.width, dim=fimg.dim,
                                provenance=fimg.provenance)

    def segment(self, request: SegmentRequest) -> SegmentResponse:
        layout = DocLayout([np.asarray(c, dtype=np.int64) for c in request.layout], request.height, request.width)
        memberships = [np.asarray(Z, dtype=np.float64) for Z in request.memberships]
        mmap = segmentation.assemble_maps(memberships, layout, request.height, request.width)
        return SegmentResponse(
            maps=mmap.values.tolist(),
            coverage=mmap.coverage.tolist(),
            crisp=segmentation.crisp_map(mmap).tolist(),
            transition=segmentation.transition_map(mmap, request.lo, request.hi).tolist(),
        )

    def roc(self, request: RocRequest) -> RocResponse:
        truth = np.asarray(request.truth) != 0
        mask = None if request.coverage is None else np.asarray(request.coverage, dtype=bool)
        curve = roc.roc_curve(np.asarray(request.scores, dtype=np.float64), truth, mask)
        crisp_point = None
        if request.crisp is not None:
            if request.topic is None:
                raise InputError("a crisp map needs the positive topic")
            crisp_point = list(roc.crisp_operating_point(np.asarray(request.crisp), request.topic, truth))
        return RocResponse(fpr=curve.fpr.tolist(), tpr=curve.tpr.tolist(),
                           thresholds=_finite_or_none(curve.thresholds), auc=curve.auc, crisp_point=crisp_point)
