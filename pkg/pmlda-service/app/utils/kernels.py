import numpy as np

# -----------------------------------------------------------------------------------------
# Convolution kernels for the feature extractors
#
# All kernels are applied with true convolution (scipy.ndimage.convolve*), so an impulse
# input reproduces the kernel itself centred on the impulse.
#
#   gaussian_1d / gaussian_2d : sampled Gaussian, renormalised to sum 1 after cropping
#   gaussian_derivative_1d    : −x·g(x), zero sum, scaled so that Σ x·k(x) = −1; under
#                               convolution a ramp f(x) = c·x then responds with exactly c
#   log_2d                    : Laplacian of Gaussian (x² + y² − 2σ²)/σ⁴ · g, mean removed
#                               after cropping so that constant input gives zero
#   derivative_2d             : separable first derivative of a 2-D Gaussian along one axis,
#                               unit-slope normalised the same way as the 1-D kernel
# -----------------------------------------------------------------------------------------


def truncated_size(sigma: float) -> int:
    return 2 * int(np.ceil(3.0 * sigma)) + 1


def _axis(size: int) -> np.ndarray:
    half = (size - 1) // 2
    return np.arange(-half, half + 1, dtype=np.float64)


def gaussian_1d(sigma: float, size: int) -> np.ndarray:
    x = _axis(size)
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def gaussian_derivative_1d(sigma: float, size: int) -> np.ndarray:
    x = _axis(size)
    k = -x * np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / -np.sum(x * k)


def gaussian_2d(sigma: float, size: int = 15) -> np.ndarray:
    g = gaussian_1d(sigma, size)
    k = np.outer(g, g)
    return k / k.sum()


def log_2d(sigma: float, size: int = 15) -> np.ndarray:
    y, x = np.meshgrid(_axis(size), _axis(size), indexing="ij")
    var = sigma * sigma
    r2 = x * x + y * y
    k = (r2 - 2.0 * var) / (var * var) * np.exp(-r2 / (2.0 * var))
    return k - k.mean()


def derivative_2d(sigma: float, axis: int, size: int = 15) -> np.ndarray:
    """First derivative of a cropped 2-D Gaussian along ``axis`` (0 = y/rows, 1 = x/cols)."""
    d = gaussian_derivative_1d(sigma, size)
    g = gaussian_1d(sigma, size)
    return np.outer(d, g) if axis == 0 else np.outer(g, d)
