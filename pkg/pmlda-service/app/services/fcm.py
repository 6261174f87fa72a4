import logging
from typing import Optional

import numpy as np

from app.models.domain import FcmResult
from app.utils.errors import InputError

logger = logging.getLogger(__name__)


class FuzzyCMeans:
    """Fuzzy C-means by alternating membership and center updates.

    u_ik = 1 / sum_j (d_ik / d_jk)^(2/(m-1)),  c_k = sum_i u_ik^m x_i / sum_i u_ik^m

    Iteration stops once no center moves more than ``tol`` (max-norm) or after
    ``max_iter`` rounds. A point sitting exactly on a center gets membership 1
    there (lowest index first if several centers coincide).
    """

    def __init__(self, n_clusters: int = 3, m: float = 1.5, tol: float = 1e-6, max_iter: int = 300):
        if n_clusters < 2:
            raise InputError("need at least two clusters")
        if not m > 1:
            raise InputError(f"fuzzifier m must be > 1, got {m}")
        if max_iter < 1:
            raise InputError("max_iter must be at least 1")
        self.n_clusters = n_clusters
        self.m = m
        self.tol = tol
        self.max_iter = max_iter
        self.centers: Optional[np.ndarray] = None

    def initialize_centers(self, X: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        distinct = np.unique(X, axis=0)
        if distinct.shape[0] < self.n_clusters:
            raise InputError(f"only {distinct.shape[0]} distinct points for {self.n_clusters} clusters")
        picks = rng.choice(distinct.shape[0], size=self.n_clusters, replace=False)
        return distinct[np.sort(picks)].copy()

    def memberships(self, X: np.ndarray, centers: Optional[np.ndarray] = None) -> np.ndarray:
        centers = self.centers if centers is None else centers
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        d = np.linalg.norm(X[:, None, :] - centers[None, :, :], axis=2)

        U = np.zeros_like(d)
        hit = d == 0.0
        on_center = hit.any(axis=1)
        if on_center.any():
            U[on_center, np.argmax(hit[on_center], axis=1)] = 1.0

        # log-space inverse distance weights keep m close to 1 from overflowing
        free = ~on_center
        log_w = -(2.0 / (self.m - 1.0)) * np.log(d[free])
        log_w -= log_w.max(axis=1, keepdims=True)
        w = np.exp(log_w)
        U[free] = w / w.sum(axis=1, keepdims=True)
        return U

    def update_centers(self, X: np.ndarray, U: np.ndarray) -> np.ndarray:
        um = U ** self.m
        return (um.T @ X) / um.sum(axis=0)[:, None]

    def objective(self, X: np.ndarray, U: np.ndarray, centers: np.ndarray) -> float:
        d2 = np.sum((X[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        return float(np.sum(U ** self.m * d2))

    def fit(self, X, rng: np.random.Generator) -> FcmResult:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        if X.shape[0] < self.n_clusters:
            raise InputError(f"C={self.n_clusters} exceeds the number of points N={X.shape[0]}")

        centers = self.initialize_centers(X, rng)
        series = []
        n_iter = 0
        for n_iter in range(1, self.max_iter + 1):
            U = self.memberships(X, centers)
            series.append(self.objective(X, U, centers))
            new_centers = self.update_centers(X, U)
            shift = float(np.max(np.abs(new_centers - centers)))
            centers = new_centers
            if shift < self.tol:
                break

        self.centers = centers
        U = self.memberships(X, centers)
        series.append(self.objective(X, U, centers))
        logger.info(f"FCM finished after {n_iter} iterations, objective {series[-1]:.6g}")
        return FcmResult(centers=centers, memberships=U, objective_series=series, n_iter=n_iter)


def fcm(data, C: int, m: float, tol: float, max_iter: int, rng: np.random.Generator) -> FcmResult:
    return FuzzyCMeans(n_clusters=C, m=m, tol=tol, max_iter=max_iter).fit(data, rng)
