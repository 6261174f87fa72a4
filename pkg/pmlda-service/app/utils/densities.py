import numpy as np
from scipy.special import gammaln

from app.utils.errors import InputError

# -----------------------------------------------------------------------------------------
# Log densities used by the partial-membership topic model
#
# Everything here works in log space and is vectorised over leading axes:
#   - Dirichlet:    ln Dir(x|a) = ln Γ(Σa) − Σ ln Γ(a_k) + Σ (a_k − 1) ln x_k
#   - Exponential:  ln exp(s|λ) = ln λ − λ s
#   - Gaussian:     ln N(x|μ, diag(c)) = −½ [ d ln 2π + Σ ln c_j + Σ (x_j − μ_j)² / c_j ]
#
# Membership vectors z live on the simplex and enter the Dirichlet term as ln z_k,
# which diverges at the boundary. They are clamped to [EPS, 1 − EPS] and renormalised
# before any log is taken.
#
# Blending (natural-parameter identity):
#   For Gaussians with diagonal covariances, ∏_k N(x|μ_k, C_k)^{z_k} is proportional in x to
#   the Gaussian with natural parameters Σ_k z_k η_k, i.e.
#       precision = Σ_k z_k / C_k
#       mean      = (Σ_k z_k μ_k / C_k) / precision
#   The per-word likelihood is that normalised blended density. With one shared covariance
#   the mean is the plain convex combination Σ_k z_k μ_k and the covariance is unchanged.
# -----------------------------------------------------------------------------------------

EPS = 1e-10
SIMPLEX_TOL = 1e-9
LOG_2PI = np.log(2.0 * np.pi)


def clamp_simplex(z: np.ndarray) -> np.ndarray:
    """Clip simplex rows to [EPS, 1 - EPS] and renormalise them."""
    z = np.clip(np.asarray(z, dtype=np.float64), EPS, 1.0 - EPS)
    return z / z.sum(axis=-1, keepdims=True)


def check_simplex(x: np.ndarray, name: str = "x") -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0 or x.shape[-1] < 2:
        raise InputError(f"{name} must have at least two components, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InputError(f"{name} contains non-finite values")
    if np.any(x < -SIMPLEX_TOL) or np.any(np.abs(x.sum(axis=-1) - 1.0) > SIMPLEX_TOL):
        raise InputError(f"{name} is not on the probability simplex")
    return x


def dirichlet_log_pdf(x, a) -> float:
    x = check_simplex(x)
    a = np.asarray(a, dtype=np.float64)
    if x.shape != a.shape:
        raise InputError(f"dimension mismatch: x has shape {x.shape}, a has shape {a.shape}")
    if np.any(a <= 0):
        raise InputError("Dirichlet concentration must be strictly positive")
    return float(dirichlet_log_pdf_rows(clamp_simplex(x), a))


def dirichlet_log_pdf_rows(x: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Unchecked Dirichlet log density over the last axis; x must already be clamped."""
    normaliser = gammaln(np.sum(a, axis=-1)) - np.sum(gammaln(a), axis=-1)
    return normaliser + np.sum((a - 1.0) * np.log(x), axis=-1)


def exponential_log_pdf(s, lam: float):
    if lam <= 0:
        raise InputError("exponential rate must be positive")
    return np.log(lam) - lam * np.asarray(s, dtype=np.float64)


def gaussian_log_pdf(x, mean, cov_diag):
    """ln N(x | mean, diag(cov_diag)); broadcasts over leading axes of x and mean."""
    x = np.asarray(x, dtype=np.float64)
    mean = np.asarray(mean, dtype=np.float64)
    cov_diag = np.asarray(cov_diag, dtype=np.float64)
    if x.shape[-1] != mean.shape[-1] or x.shape[-1] != cov_diag.shape[-1]:
        raise InputError("x, mean and cov_diag must share their last dimension")
    if np.any(cov_diag <= 0):
        raise InputError("variances must be strictly positive")
    return _gaussian_log_pdf(x, mean, cov_diag)


def _gaussian_log_pdf(x, mean, cov_diag):
    dim = x.shape[-1]
    quad = np.sum((x - mean) ** 2 / cov_diag, axis=-1)
    return -0.5 * (dim * LOG_2PI + np.sum(np.log(cov_diag), axis=-1) + quad)


def isotropic_log_pdf(x: np.ndarray, mean: np.ndarray, sigma2: float) -> np.ndarray:
    """Row-wise ln N(x | mean, sigma2 I) without validation (sampler hot path)."""
    dim = x.shape[-1]
    quad = np.sum((x - mean) ** 2, axis=-1) / sigma2
    return -0.5 * (dim * (LOG_2PI + np.log(sigma2)) + quad)


def blend_gaussians(z, means, covs):
    """Blend diagonal Gaussians by their natural parameters.

    z may be a single simplex vector (K,) or a stack of them (N, K); means and
    covs are (K, dim). Returns (mean, cov_diag) with the matching leading shape.
    """
    z = np.asarray(z, dtype=np.float64)
    means = np.asarray(means, dtype=np.float64)
    covs = np.asarray(covs, dtype=np.float64)
    if np.all(covs == covs[0]):
        return z @ means, np.broadcast_to(covs[0], z.shape[:-1] + covs.shape[1:]).copy()
    precision = z @ (1.0 / covs)
    mean = (z @ (means / covs)) / precision
    return mean, 1.0 / precision
