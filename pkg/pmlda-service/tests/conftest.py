import numpy as np
import pytest

from app.models.domain import Document, DocState, ModelState, TopicParams
from app.models.params import Hyperparams


def random_simplex(rng, K, size=None):
    g = rng.gamma(2.0, size=(K,) if size is None else (size, K))
    return g / g.sum(axis=-1, keepdims=True)


def random_instance(rng, D=2, N=3, K=2, dim=2):
    """Small corpus with a valid random state, for oracle comparisons."""
    corpus = [Document(rng.normal(0.0, 2.0, size=(N, dim))) for _ in range(D)]
    docs = [DocState(random_simplex(rng, K), float(rng.uniform(0.5, 5.0)), random_simplex(rng, K, N))
            for _ in range(D)]
    topics = TopicParams(rng.normal(0.0, 3.0, size=(K, dim)), float(rng.uniform(0.5, 2.0)))
    hp = Hyperparams(alpha=list(rng.uniform(0.5, 3.0, size=K)), lambda_=float(rng.uniform(0.2, 2.0)), K=K)
    return corpus, ModelState(docs, topics), hp


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def two_topics():
    return TopicParams(np.array([[-4.0, -4.0], [6.0, 6.0]]), 1.0)
