import numpy as np


def sample_dirichlet(rng: np.random.Generator, concentration, size=None) -> np.ndarray:
    """Draw Dirichlet vectors by normalising Gamma variates in log space.

    Small concentrations (s·π_k ≪ 1) make plain Gamma draws underflow to zero, so
    each Gamma(a) variate is built as Gamma(a + 1) · U^{1/a} and kept as a log.
    """
    concentration = np.asarray(concentration, dtype=np.float64)
    shape = concentration.shape if size is None else (size,) + concentration.shape
    log_g = np.log(rng.standard_gamma(concentration + 1.0, size=shape))
    log_g += np.log1p(-rng.random(shape)) / concentration
    log_g -= log_g.max(axis=-1, keepdims=True)
    g = np.exp(log_g)
    return g / g.sum(axis=-1, keepdims=True)


def sample_uniform_simplex(rng: np.random.Generator, dim: int, size=None) -> np.ndarray:
    """Uniform draws on the simplex (Dir(1_K)) via normalised Exp(1) variates."""
    shape = (dim,) if size is None else (size, dim)
    g = rng.exponential(scale=1.0, size=shape)
    return g / g.sum(axis=-1, keepdims=True)
