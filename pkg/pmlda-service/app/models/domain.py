from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from app.utils.errors import InputError

SIMPLEX_TOL = 1e-12


@dataclass
class TopicParams:
    """Gaussian topics: means (K, dim) with a shared isotropic variance sigma2.

    ``cov_diag`` optionally gives per-topic diagonal covariances (K, dim); it is
    only used when simulating or blending, the sampler always learns sigma2.
    """

    means: np.ndarray
    sigma2: float
    cov_diag: Optional[np.ndarray] = None

    def __post_init__(self):
        self.means = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        self.sigma2 = float(self.sigma2)
        if self.means.shape[0] < 2:
            raise InputError(f"need at least two topics, got {self.means.shape[0]}")
        if not np.all(np.isfinite(self.means)):
            raise InputError("topic means must be finite")
        if not self.sigma2 > 0:
            raise InputError("sigma2 must be positive")
        if self.cov_diag is not None:
            self.cov_diag = np.asarray(self.cov_diag, dtype=np.float64)
            if self.cov_diag.shape != self.means.shape:
                raise InputError("cov_diag must have the same shape as means")
            if np.any(self.cov_diag <= 0):
                raise InputError("topic variances must be positive")

    @property
    def K(self) -> int:
        return self.means.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def covariances(self) -> np.ndarray:
        if self.cov_diag is not None:
            return self.cov_diag
        return np.full(self.means.shape, self.sigma2)

    def with_mean(self, k: int, mean: np.ndarray) -> "TopicParams":
        means = self.means.copy()
        means[k] = mean
        return TopicParams(means, self.sigma2, self.cov_diag)

    def with_sigma2(self, sigma2: float) -> "TopicParams":
        return TopicParams(self.means.copy(), sigma2, self.cov_diag)


@dataclass
class Document:
    words: np.ndarray
    geometry: Optional[np.ndarray] = None

    def __post_init__(self):
        self.words = np.asarray(self.words, dtype=np.float64)
        if self.words.ndim == 1:
            self.words = self.words[:, None]
        if self.words.ndim != 2 or self.words.shape[0] < 1:
            raise InputError("a document needs at least one word")
        if not np.all(np.isfinite(self.words)):
            raise InputError("document words must be finite")
        if self.geometry is not None:
            self.geometry = np.asarray(self.geometry, dtype=np.int64).reshape(-1, 2)
            if self.geometry.shape[0] != self.words.shape[0]:
                raise InputError("geometry must give one (row, col) per word")

    @property
    def N(self) -> int:
        return self.words.shape[0]

    @property
    def dim(self) -> int:
        return self.words.shape[1]


@dataclass
class DocState:
    pi: np.ndarray
    s: float
    Z: np.ndarray

    def copy(self) -> "DocState":
        return DocState(self.pi.copy(), float(self.s), self.Z.copy())

    def validate(self, n_words: Optional[int] = None) -> None:
        if abs(self.pi.sum() - 1.0) > SIMPLEX_TOL or np.any(self.pi <= 0) or np.any(self.pi >= 1):
            raise InputError("pi must lie strictly inside the simplex")
        if not self.s > 0:
            raise InputError("s must be positive")
        if n_words is not None and self.Z.shape[0] != n_words:
            raise InputError(f"Z has {self.Z.shape[0]} rows, document has {n_words} words")
        if self.Z.shape[1] != self.pi.shape[0]:
            raise InputError("Z and pi disagree on K")
        if np.any(np.abs(self.Z.sum(axis=1) - 1.0) > SIMPLEX_TOL) or np.any(self.Z <= 0):
            raise InputError("membership rows must lie on the simplex")


@dataclass
class ModelState:
    docs: List[DocState]
    topics: TopicParams
    log_joint: float = float("nan")

    def copy(self) -> "ModelState":
        return ModelState([d.copy() for d in self.docs], copy.deepcopy(self.topics), self.log_joint)

    @property
    def memberships(self) -> np.ndarray:
        return np.vstack([d.Z for d in self.docs])


@dataclass
class DataStats:
    mean: np.ndarray
    cov_diag: np.ndarray
    spread: float

    def proposal_cov(self, f: float, floor: float) -> np.ndarray:
        return f * np.maximum(self.cov_diag, floor)


@dataclass
class StepResult:
    value: object
    accepted: bool
    log_ratio: float

    @property
    def accept_prob(self) -> float:
        return float(np.exp(min(0.0, self.log_ratio)))


BLOCKS = ("pi", "s", "z", "mu", "sigma")


@dataclass
class Trace:
    best_state: Optional[ModelState] = None
    best_log_joint: float = float("-inf")
    log_joint_series: List[float] = field(default_factory=list)
    best_series: List[float] = field(default_factory=list)
    acceptance_rates: Dict[str, List[float]] = field(default_factory=lambda: {b: [] for b in BLOCKS})
    sigma_bound: float = float("nan")
    thinned_samples: List[ModelState] = field(default_factory=list)
    final_state: Optional[ModelState] = None


@dataclass
class FeatureImage:
    data: np.ndarray
    provenance: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim == 2:
            self.data = self.data[:, :, None]
        if self.data.ndim != 3 or self.data.shape[2] < 1:
            raise InputError("feature image must be (height, width, dim)")
        if not np.all(np.isfinite(self.data)):
            raise InputError("feature image contains non-finite values")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def dim(self) -> int:
        return self.data.shape[2]


@dataclass
class DocLayout:
    """Per-document (row, col) pixel coordinates of every word."""

    coords: List[np.ndarray]
    height: int
    width: int
    scheme: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        self.coords = [np.asarray(c, dtype=np.int64).reshape(-1, 2) for c in self.coords]
        for d, c in enumerate(self.coords):
            if np.any(c < 0) or np.any(c[:, 0] >= self.height) or np.any(c[:, 1] >= self.width):
                raise InputError(f"document {d} maps words outside the {self.height}x{self.width} image")
            flat = c[:, 0] * self.width + c[:, 1]
            if np.unique(flat).size != flat.size:
                raise InputError(f"document {d} maps two words to the same pixel")


@dataclass
class FcmResult:
    centers: np.ndarray
    memberships: np.ndarray
    objective_series: List[float]
    n_iter: int


@dataclass
class MembershipMap:
    values: np.ndarray
    coverage: np.ndarray

    @property
    def K(self) -> int:
        return self.values.shape[0]


@dataclass
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float
