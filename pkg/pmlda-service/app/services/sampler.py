import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.models.domain import BLOCKS, DataStats, Document, DocState, ModelState, StepResult, TopicParams, Trace
from app.models.params import Hyperparams, SamplerConfig
from app.services.model_core import (
    corpus_log_posterior,
    data_stats,
    membership_log_terms,
    stack_words,
    word_log_likelihoods,
)
from app.utils import seeding
from app.utils.densities import clamp_simplex, dirichlet_log_pdf_rows, exponential_log_pdf, gaussian_log_pdf
from app.utils.errors import InputError, NumericalFailure
from app.utils.simplex import sample_dirichlet, sample_uniform_simplex

logger = logging.getLogger(__name__)


class Proposals:
    """Candidate distributions of the five Metropolis blocks.

    pi ~ Dir(alpha), s ~ exp(lambda), z ~ Dir(1_K), mu_k ~ N(mu_D, f Sigma_D),
    sigma2 ~ U(floor, S]. None of them depends on the current value.
    """

    def pi(self, rng, current, alpha):
        return clamp_simplex(sample_dirichlet(rng, alpha))

    def s(self, rng, current, lam):
        return float(rng.exponential(1.0 / lam))

    def z(self, rng, current):
        return clamp_simplex(sample_uniform_simplex(rng, current.shape[-1], size=current.shape[0]))

    def mu(self, rng, current, mean, cov):
        return rng.normal(mean, np.sqrt(cov))

    def sigma2(self, rng, current, floor, bound):
        return float(bound - rng.random() * (bound - floor))


class FrozenProposals(Proposals):
    """Point masses at the current state; a sweep with these must leave the chain unchanged."""

    def pi(self, rng, current, alpha):
        return current.copy()

    def s(self, rng, current, lam):
        return float(current)

    def z(self, rng, current):
        return current.copy()

    def mu(self, rng, current, mean, cov):
        return current.copy()

    def sigma2(self, rng, current, floor, bound):
        return float(current)


DEFAULT_PROPOSALS = Proposals()


def _accept(log_ratio: float, u: float) -> bool:
    if log_ratio >= 0:
        return True
    return u > 0 and np.log(u) < log_ratio


def init_state(corpus: List[Document], hp: Hyperparams, rng: np.random.Generator,
               sigma_floor: float = 1e-6, fix_pi=None, fix_s: Optional[float] = None) -> ModelState:
    if not corpus:
        raise InputError("cannot initialise on an empty corpus")
    stats = data_stats(corpus)
    alpha = hp.alpha_array
    pi = clamp_simplex(np.asarray(fix_pi, dtype=np.float64) if fix_pi is not None else alpha / alpha.sum())
    s = float(fix_s) if fix_s is not None else 1.0 / hp.lambda_

    scale = np.sqrt(np.maximum(stats.cov_diag, sigma_floor))
    means = rng.normal(stats.mean, scale, size=(hp.K, stats.mean.size))
    while np.unique(means, axis=0).shape[0] < hp.K:
        means = rng.normal(stats.mean, scale, size=(hp.K, stats.mean.size))

    sigma2 = float(np.mean(stats.cov_diag))
    if sigma2 < sigma_floor:
        logger.warning(f"Data variance {sigma2:.3g} is below the floor, using sigma2={sigma_floor}")
        sigma2 = sigma_floor

    docs = [DocState(pi.copy(), s, np.tile(pi, (doc.N, 1))) for doc in corpus]
    state = ModelState(docs, TopicParams(means, sigma2))
    state.log_joint = corpus_log_posterior(state, corpus, hp)
    return state


def step_pi(doc: Document, state: DocState, hp: Hyperparams, topics: TopicParams,
            rng: np.random.Generator, proposals: Proposals = DEFAULT_PROPOSALS) -> StepResult:
    """Independence Metropolis-Hastings update of the topic proportion pi^d."""
    alpha = hp.alpha_array
    candidate = proposals.pi(rng, state.pi, alpha)
    u = rng.random()

    def pi_terms(pi):
        prior = float(dirichlet_log_pdf_rows(pi, alpha))
        return prior, prior + float(np.sum(membership_log_terms(state.Z, pi, state.s)))

    prior_old, joint_old = pi_terms(state.pi)
    prior_new, joint_new = pi_terms(candidate)
    log_ratio = (joint_new - joint_old) + (prior_old - prior_new)
    accepted = _accept(log_ratio, u)
    if accepted:
        state.pi = candidate
    return StepResult(state.pi, accepted, log_ratio)


def step_s(doc: Document, state: DocState, hp: Hyperparams, topics: TopicParams,
           rng: np.random.Generator, proposals: Proposals = DEFAULT_PROPOSALS) -> StepResult:
    """Independence Metropolis-Hastings update of the scaling factor s^d."""
    candidate = proposals.s(rng, state.s, hp.lambda_)
    u = rng.random()
    if not candidate > 0:
        return StepResult(state.s, False, float("-inf"))

    def s_terms(s):
        prior = float(exponential_log_pdf(s, hp.lambda_))
        return prior, prior + float(np.sum(membership_log_terms(state.Z, state.pi, s)))

    prior_old, joint_old = s_terms(state.s)
    prior_new, joint_new = s_terms(candidate)
    log_ratio = (joint_new - joint_old) + (prior_old - prior_new)
    accepted = _accept(log_ratio, u)
    if accepted:
        state.s = candidate
    return StepResult(state.s, accepted, log_ratio)


def _word_terms(X: np.ndarray, Z: np.ndarray, state: DocState, topics: TopicParams) -> np.ndarray:
    return word_log_likelihoods(X, Z, topics) + membership_log_terms(Z, state.pi, state.s)


def step_z(doc: Document, n: int, state: DocState, hp: Hyperparams, topics: TopicParams,
           rng: np.random.Generator, proposals: Proposals = DEFAULT_PROPOSALS) -> StepResult:
    """Update the membership of word n; only that word's terms enter the ratio."""
    if not 0 <= n < doc.N:
        raise InputError(f"word index {n} out of range for a document of {doc.N} words")
    current = state.Z[n:n + 1]
    candidate = proposals.z(rng, current)
    u = rng.random()
    x = doc.words[n:n + 1]
    log_ratio = float(_word_terms(x, candidate, state, topics)[0] - _word_terms(x, current, state, topics)[0])
    accepted = _accept(log_ratio, u)
    if accepted:
        state.Z[n] = candidate[0]
    return StepResult(state.Z[n], accepted, log_ratio)


def step_z_all(doc: Document, state: DocState, hp: Hyperparams, topics: TopicParams,
               rng: np.random.Generator, proposals: Proposals = DEFAULT_PROPOSALS) -> int:
    """Run the z update for every word of a document at once.

    Given pi^d, s^d and the topics the per-word updates share no terms, so
    drawing all candidates together is the same kernel as the word-by-word loop.
    Returns the number of accepted words.
    """
    candidates = proposals.z(rng, state.Z)
    u = rng.random(doc.N)
    log_ratio = _word_terms(doc.words, candidates, state, topics) - _word_terms(doc.words, state.Z, state, topics)
    with np.errstate(divide="ignore"):
        accepted = (log_ratio >= 0) | (np.log(u) < log_ratio)
    state.Z[accepted] = candidates[accepted]
    return int(accepted.sum())


def step_mu(k: int, state: ModelState, corpus: List[Document], stats: DataStats, hp: Hyperparams,
            rng: np.random.Generator, sigma_floor: float = 1e-6,
            proposals: Proposals = DEFAULT_PROPOSALS, X=None, Z=None) -> StepResult:
    """Independence update of topic mean k against the whole corpus.

    The Hastings correction uses the density the candidate was actually drawn
    from, N(mu_D, f Sigma_D).
    """
    X = stack_words(corpus) if X is None else X
    Z = state.memberships if Z is None else Z
    topics = state.topics
    cov = stats.proposal_cov(hp.f, sigma_floor)
    candidate = proposals.mu(rng, topics.means[k], stats.mean, cov)
    u = rng.random()
    moved = topics.with_mean(k, candidate)
    log_ratio = float(np.sum(word_log_likelihoods(X, Z, moved)) - np.sum(word_log_likelihoods(X, Z, topics)))
    log_ratio += float(gaussian_log_pdf(topics.means[k], stats.mean, cov) - gaussian_log_pdf(candidate, stats.mean, cov))
    accepted = _accept(log_ratio, u)
    if accepted:
        state.topics = moved
    return StepResult(state.topics.means[k], accepted, log_ratio)


def step_sigma(state: ModelState, corpus: List[Document], stats: DataStats, hp: Hyperparams,
               rng: np.random.Generator, sigma_floor: float = 1e-6,
               proposals: Proposals = DEFAULT_PROPOSALS, X=None, Z=None) -> StepResult:
    """Update the shared variance with a uniform candidate on (sigma_floor, S]."""
    topics = state.topics
    bound = stats.spread
    if bound <= sigma_floor:
        return StepResult(topics.sigma2, False, float("-inf"))
    X = stack_words(corpus) if X is None else X
    Z = state.memberships if Z is None else Z
    candidate = proposals.sigma2(rng, topics.sigma2, sigma_floor, bound)
    u = rng.random()
    moved = topics.with_sigma2(candidate)
    log_ratio = float(np.sum(word_log_likelihoods(X, Z, moved)) - np.sum(word_log_likelihoods(X, Z, topics)))
    accepted = _accept(log_ratio, u)
    if accepted:
        state.topics = moved
    return StepResult(state.topics.sigma2, accepted, log_ratio)


class MetropolisWithinGibbsSampler:
    """MAP inference by Metropolis-within-Gibbs sweeps.

    Sweep order: for each document pi, s, then every z; then each topic mean;
    then the shared variance. Documents are updated against the topics of the
    sweep start and may run on several threads; every block draws from its own
    seeded substream, so the trace does not depend on ``n_workers``.
    """

    def __init__(self, corpus: List[Document], config: SamplerConfig,
                 proposals: Proposals = DEFAULT_PROPOSALS):
        if not corpus:
            raise InputError("corpus is empty")
        self.corpus = corpus
        self.config = config
        self.hp = config.hp
        self.proposals = proposals
        self.X = stack_words(corpus)
        if self.X.shape[1] < 1:
            raise InputError("words must have at least one feature")
        self.stats = data_stats(corpus)
        self.fix_pi = None if config.fix_pi is None else np.asarray(config.fix_pi, dtype=np.float64)
        self._accepted = {b: 0 for b in BLOCKS}
        self._proposed = {b: 0 for b in BLOCKS}

    def init_state(self) -> ModelState:
        return init_state(self.corpus, self.hp, seeding.substream(self.hp.seed, seeding.INIT),
                          self.config.sigma_floor, self.fix_pi, self.config.fix_s)

    def _update_document(self, args: Tuple[int, int, DocState, TopicParams]) -> Tuple[DocState, Dict[str, int]]:
        t, d, doc_state, topics = args
        doc = self.corpus[d]
        rng = seeding.substream(self.hp.seed, seeding.DOCUMENT, t, d)
        state = doc_state.copy()
        counts = {"pi": 0, "s": 0, "z": 0}
        if self.fix_pi is None:
            counts["pi"] = int(step_pi(doc, state, self.hp, topics, rng, self.proposals).accepted)
        if self.config.fix_s is None:
            counts["s"] = int(step_s(doc, state, self.hp, topics, rng, self.proposals).accepted)
        counts["z"] = step_z_all(doc, state, self.hp, topics, rng, self.proposals)
        return state, counts

    def sweep(self, state: ModelState, t: int, executor: Optional[ThreadPoolExecutor] = None) -> None:
        topics = state.topics
        jobs = [(t, d, ds, topics) for d, ds in enumerate(state.docs)]
        results = list(executor.map(self._update_document, jobs)) if executor else list(map(self._update_document, jobs))
        state.docs = [ds for ds, _ in results]
        for _, counts in results:
            for block, n in counts.items():
                self._accepted[block] += n
        if self.fix_pi is None:
            self._proposed["pi"] += len(self.corpus)
        if self.config.fix_s is None:
            self._proposed["s"] += len(self.corpus)
        self._proposed["z"] += self.X.shape[0]

        Z = state.memberships
        for k in range(self.hp.K):
            rng = seeding.substream(self.hp.seed, seeding.TOPIC_MEAN, t, k)
            result = step_mu(k, state, self.corpus, self.stats, self.hp, rng,
                             self.config.sigma_floor, self.proposals, self.X, Z)
            self._accepted["mu"] += int(result.accepted)
            self._proposed["mu"] += 1

        rng = seeding.substream(self.hp.seed, seeding.VARIANCE, t)
        result = step_sigma(state, self.corpus, self.stats, self.hp, rng,
                            self.config.sigma_floor, self.proposals, self.X, Z)
        self._accepted["sigma"] += int(result.accepted)
        self._proposed["sigma"] += 1

        state.log_joint = corpus_log_posterior(state, self.corpus, self.hp, check=False)
        if not np.isfinite(state.log_joint):
            raise NumericalFailure(
                f"log joint became {state.log_joint} at sweep {t} "
                f"(sigma2={state.topics.sigma2:.6g}, means={state.topics.means.tolist()})"
            )
        if self.config.debug_checks:
            self.check_invariants(state)

    def check_invariants(self, state: ModelState) -> None:
        for doc, ds in zip(self.corpus, state.docs):
            ds.validate(doc.N)
        recomputed = corpus_log_posterior(state, self.corpus, self.hp)
        if abs(recomputed - state.log_joint) > 1e-9 * max(1.0, abs(recomputed)):
            raise NumericalFailure(f"cached log joint {state.log_joint} != recomputed {recomputed}")

    def acceptance_rate(self, block: str) -> float:
        proposed = self._proposed[block]
        return self._accepted[block] / proposed if proposed else 0.0

    def run(self) -> Trace:
        hp = self.hp
        state = self.init_state()
        trace = Trace(best_state=state.copy(), best_log_joint=state.log_joint, sigma_bound=self.stats.spread)
        if self.stats.spread <= self.config.sigma_floor:
            logger.warning(f"Data spread S={self.stats.spread:.3g} is below sigma_floor, sigma2 stays fixed")
        logger.info(f"Starting inference: D={len(self.corpus)} words={self.X.shape[0]} K={hp.K} T={hp.T} "
                    f"workers={self.config.n_workers}")

        executor = ThreadPoolExecutor(max_workers=self.config.n_workers) if self.config.n_workers > 1 else None
        try:
            report_every = max(1, hp.T // 10)
            for t in range(1, hp.T + 1):
                self.sweep(state, t, executor)
                trace.log_joint_series.append(state.log_joint)
                for block in BLOCKS:
                    trace.acceptance_rates[block].append(self.acceptance_rate(block))
                if state.log_joint > trace.best_log_joint:
                    trace.best_log_joint = state.log_joint
                    trace.best_state = state.copy()
                trace.best_series.append(trace.best_log_joint)
                if self.config.thin and t % self.config.thin == 0:
                    trace.thinned_samples.append(state.copy())
                if t % report_every == 0:
                    logger.info(f"Sweep {t}/{hp.T}: log joint {state.log_joint:.4f}, best {trace.best_log_joint:.4f}")
        finally:
            if executor is not None:
                executor.shutdown()

        trace.final_state = state
        logger.info(f"Inference done, MAP log joint {trace.best_log_joint:.4f}")
        return trace


def run_inference(corpus: List[Document], config: SamplerConfig, seed: Optional[int] = None,
                  proposals: Proposals = DEFAULT_PROPOSALS) -> Trace:
    if seed is not None:
        config = config.model_copy(update={"hp": config.hp.model_copy(update={"seed": seed})})
    return MetropolisWithinGibbsSampler(corpus, config, proposals).run()
