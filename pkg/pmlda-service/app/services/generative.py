import logging
from typing import List, Optional, Tuple

import numpy as np

from app.models.domain import Document, DocState, ModelState
from app.models.params import GenSpec
from app.services.model_core import corpus_log_posterior
from app.utils import seeding
from app.utils.densities import blend_gaussians, check_simplex, clamp_simplex
from app.utils.errors import InputError
from app.utils.simplex import sample_dirichlet

logger = logging.getLogger(__name__)

MIN_CONCENTRATION = 1e-8


def _membership_concentration(pi: np.ndarray, s: float) -> np.ndarray:
    concentration = s * pi
    if np.any(concentration < MIN_CONCENTRATION):
        logger.warning(f"Dirichlet concentration s*pi underflows (min {concentration.min():.3g}), "
                       f"clamping at {MIN_CONCENTRATION}")
        concentration = np.maximum(concentration, MIN_CONCENTRATION)
    return concentration


def sample_membership(pi, s: float, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """Draw z ~ Dir(s·pi), clamped away from the simplex boundary."""
    pi = check_simplex(pi, "pi")
    if not s > 0:
        raise InputError("s must be positive")
    return clamp_simplex(sample_dirichlet(rng, _membership_concentration(pi, s), size=size))


def sample_document(spec: GenSpec, rng: np.random.Generator) -> Tuple[Document, DocState]:
    """Run the generative chain pi -> s -> z -> x for one document."""
    topics = spec.topics()
    if spec.fixed_pi is not None:
        pi = clamp_simplex(np.asarray(spec.fixed_pi, dtype=np.float64))
    else:
        pi = clamp_simplex(sample_dirichlet(rng, np.asarray(spec.alpha, dtype=np.float64)))
    if spec.fixed_s is not None:
        s = float(spec.fixed_s)
    else:
        s = 0.0
        while s <= 0.0:
            s = float(rng.exponential(1.0 / spec.lambda_))

    if spec.fixed_z is not None:
        Z = np.tile(clamp_simplex(np.asarray(spec.fixed_z, dtype=np.float64)), (spec.N, 1))
    else:
        Z = clamp_simplex(sample_dirichlet(rng, _membership_concentration(pi, s), size=spec.N))

    mean, cov = blend_gaussians(Z, topics.means, topics.covariances)
    X = mean + np.sqrt(cov) * rng.standard_normal(mean.shape)
    return Document(X), DocState(pi, s, Z)


def sample_corpus(spec: GenSpec, seed: Optional[int] = None) -> Tuple[List[Document], ModelState]:
    """Simulate D independent documents; each one draws from its own seeded substream."""
    seed = spec.seed if seed is None else seed
    corpus, states = [], []
    for d in range(spec.D):
        doc, state = sample_document(spec, seeding.substream(seed, seeding.GENERATE, d))
        corpus.append(doc)
        states.append(state)

    truth = ModelState(states, spec.topics())
    hp = spec.hyperparams()
    if hp is not None:
        truth.log_joint = corpus_log_posterior(truth, corpus, hp)
    logger.info(f"Generated {spec.D} documents x {spec.N} words with K={spec.K}")
    return corpus, truth
