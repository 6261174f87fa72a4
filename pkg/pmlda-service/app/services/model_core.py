import logging
from typing import List, NamedTuple, Tuple

import numpy as np

from app.models.domain import DataStats, Document, DocState, ModelState, TopicParams
from app.models.params import Hyperparams
from app.utils.densities import (
    blend_gaussians,
    check_simplex,
    dirichlet_log_pdf_rows,
    exponential_log_pdf,
    gaussian_log_pdf,
    isotropic_log_pdf,
)
from app.utils.errors import InputError

logger = logging.getLogger(__name__)


class LogJointTerms(NamedTuple):
    """The four named pieces of one document's log joint."""

    prior_pi: float
    prior_s: float
    likelihood: float
    membership: float

    @property
    def total(self) -> float:
        return self.prior_pi + self.prior_s + self.likelihood + self.membership


def blend_topics(z, topics: TopicParams) -> Tuple[np.ndarray, np.ndarray]:
    """Blended Gaussian (mean, cov_diag) for membership vector ``z``."""
    z = check_simplex(z, "z")
    if z.shape != (topics.K,):
        raise InputError(f"z has shape {z.shape}, expected ({topics.K},)")
    return blend_gaussians(z, topics.means, topics.covariances)


def word_log_likelihood(x, z, topics: TopicParams) -> float:
    mean, cov = blend_topics(z, topics)
    return float(gaussian_log_pdf(x, mean, cov))


def word_log_likelihoods(X: np.ndarray, Z: np.ndarray, topics: TopicParams) -> np.ndarray:
    """Per-word blended log likelihoods for stacked words X (N, dim) and memberships Z (N, K)."""
    if topics.cov_diag is None:
        return isotropic_log_pdf(X, Z @ topics.means, topics.sigma2)
    mean, cov = blend_gaussians(Z, topics.means, topics.cov_diag)
    return gaussian_log_pdf(X, mean, cov)


def membership_log_terms(Z: np.ndarray, pi: np.ndarray, s: float) -> np.ndarray:
    """Per-word ln Dir(z_n | s·pi)."""
    return dirichlet_log_pdf_rows(Z, s * pi)


def blend_path(topics: TopicParams, steps: int = 11) -> List[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Blended Gaussians along z = [t, 1 - t] for t from 0 to 1 in ``steps`` points."""
    if topics.K != 2:
        raise InputError("blend_path interpolates between exactly two topics")
    if steps < 2:
        raise InputError("steps must be at least 2")
    path = []
    for t in np.linspace(0.0, 1.0, steps):
        z = np.array([t, 1.0 - t])
        mean, cov = blend_gaussians(z, topics.means, topics.covariances)
        path.append((z, mean, cov))
    return path


def check_doc_state(doc: Document, state: DocState, hp: Hyperparams, topics: TopicParams) -> None:
    if topics.K != hp.K:
        raise InputError(f"topics have K={topics.K}, hyperparameters K={hp.K}")
    if doc.dim != topics.dim:
        raise InputError(f"words have dimension {doc.dim}, topics {topics.dim}")
    if state.pi.shape != (hp.K,):
        raise InputError("pi has the wrong length")
    state.validate(doc.N)


def doc_log_joint_terms(doc: Document, state: DocState, hp: Hyperparams,
                        topics: TopicParams, check: bool = True) -> LogJointTerms:
    if check:
        check_doc_state(doc, state, hp, topics)
    prior_pi = float(dirichlet_log_pdf_rows(state.pi, hp.alpha_array))
    prior_s = float(exponential_log_pdf(state.s, hp.lambda_))
    likelihood = float(np.sum(word_log_likelihoods(doc.words, state.Z, topics)))
    membership = float(np.sum(membership_log_terms(state.Z, state.pi, state.s)))
    return LogJointTerms(prior_pi, prior_s, likelihood, membership)


def doc_log_joint(doc: Document, state: DocState, hp: Hyperparams,
                  topics: TopicParams, check: bool = True) -> float:
    return doc_log_joint_terms(doc, state, hp, topics, check).total


def corpus_log_posterior(state: ModelState, corpus: List[Document], hp: Hyperparams,
                         check: bool = True) -> float:
    if len(state.docs) != len(corpus):
        raise InputError(f"state has {len(state.docs)} documents, corpus has {len(corpus)}")
    return float(sum(doc_log_joint(doc, ds, hp, state.topics, check)
                     for doc, ds in zip(corpus, state.docs)))


def stack_words(corpus: List[Document]) -> np.ndarray:
    if not corpus:
        raise InputError("corpus is empty")
    dims = {doc.dim for doc in corpus}
    if len(dims) != 1:
        raise InputError(f"documents disagree on word dimension: {sorted(dims)}")
    return np.vstack([doc.words for doc in corpus])


def data_stats(corpus: List[Document]) -> DataStats:
    """Mean, per-dimension variance and the σ² proposal bound S of all words.

    S = ½ (max_n d²(x_n, μ_D) − min_n d²(x_n, μ_D)) with squared Euclidean d².
    """
    X = stack_words(corpus)
    mean = X.mean(axis=0)
    d2 = np.sum((X - mean) ** 2, axis=1)
    spread = 0.5 * float(d2.max() - d2.min())
    return DataStats(mean=mean, cov_diag=X.var(axis=0), spread=spread)
