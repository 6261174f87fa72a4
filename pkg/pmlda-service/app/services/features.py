"""
Feature extraction and document construction for images.

Three extractors turn an image into a FeatureImage (one feature vector, a
"visual word", per pixel):

  - extract_intensity_entropy: windowed mean intensity and windowed Shannon entropy
    (sonar-style texture features)
  - extract_gradient_color: vertical Gaussian-derivative response of luminance plus
    the R and B channels
  - extract_filter_bank: 11 responses of Gaussian, LoG and Gaussian-derivative kernels
    on a 15 x 15 support

Borders are handled by replicate padding everywhere (``mode="nearest"``).

Two schemes then group pixels into documents and record where every word came
from, so membership maps can be reassembled later:

  - tile_documents: sliding windows of a fixed size and stride
  - group_by_labels: one document per label of an externally supplied label map
"""

import logging
from typing import List, Tuple

import numpy as np
from scipy import ndimage

from app.models.domain import Document, DocLayout, FeatureImage
from app.utils import kernels
from app.utils.errors import InputError

logger = logging.getLogger(__name__)

FILTER_BANK_SIZE = 15
GAUSSIAN_SIGMAS = (1.0, 2.0, 4.0)
LOG_SIGMAS = (1.0, 2.0, 4.0, 8.0)
DERIVATIVE_SIGMAS = (2.0, 4.0)


def to_unit_range(image: np.ndarray) -> np.ndarray:
    """8-bit images are scaled to [0, 1]; float images are taken as already scaled."""
    image = np.asarray(image)
    if image.dtype == np.uint8:
        return image.astype(np.float64) / 255.0
    if not np.issubdtype(image.dtype, np.number):
        raise InputError(f"unsupported image dtype {image.dtype}")
    return image.astype(np.float64)


def _check_gray(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image)
    if image.ndim != 2 or image.size == 0:
        raise InputError(f"expected a 2-D grayscale image, got shape {image.shape}")
    return image


def histogram_entropy(values) -> float:
    """Shannon entropy in bits of the 256-bin histogram of 8-bit values."""
    counts = np.bincount(np.asarray(values, dtype=np.int64).ravel(), minlength=256)
    p = counts[counts > 0] / counts.sum()
    return float(-np.sum(p * np.log2(p)))


def extract_intensity_entropy(image: np.ndarray, window: int = 21, intensity_scale: float = 10.0) -> FeatureImage:
    image = _check_gray(image)
    if image.dtype != np.uint8:
        raise InputError("intensity/entropy features need an 8-bit grayscale image")
    if window < 3 or window % 2 == 0:
        raise InputError(f"window must be an odd integer >= 3, got {window}")
    if window > min(image.shape):
        raise InputError(f"window {window} is larger than the {image.shape[0]}x{image.shape[1]} image")

    mean = ndimage.uniform_filter(image.astype(np.float64), size=window, mode="nearest") / 255.0

    # per-level window counts; entropy accumulates only over levels that occur
    area = window * window
    entropy = np.zeros(image.shape, dtype=np.float64)
    for level in np.unique(image):
        indicator = (image == level).astype(np.float64)
        counts = np.rint(ndimage.uniform_filter(indicator, size=window, mode="nearest") * area)
        p = counts / area
        with np.errstate(divide="ignore", invalid="ignore"):
            entropy -= np.where(p > 0, p * np.log2(p), 0.0)

    data = np.stack([mean * intensity_scale, entropy], axis=-1)
    return FeatureImage(data, {"extractor": "intensity_entropy", "window": window,
                               "intensity_scale": intensity_scale})


def extract_gradient_color(image: np.ndarray, sigma: float = 2.0) -> FeatureImage:
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise InputError(f"expected an RGB image (height, width, 3), got shape {image.shape}")
    if not sigma > 0:
        raise InputError("sigma must be positive")
    rgb = to_unit_range(image)
    luminance = rgb.mean(axis=2)
    kernel = kernels.gaussian_derivative_1d(sigma, kernels.truncated_size(sigma))
    gradient = ndimage.convolve1d(luminance, kernel, axis=0, mode="nearest")
    data = np.stack([gradient, rgb[:, :, 0], rgb[:, :, 2]], axis=-1)
    return FeatureImage(data, {"extractor": "gradient_color", "sigma": sigma})


def filter_bank() -> List[Tuple[str, np.ndarray]]:
    bank = [(f"gaussian_{s:g}", kernels.gaussian_2d(s, FILTER_BANK_SIZE)) for s in GAUSSIAN_SIGMAS]
    bank += [(f"log_{s:g}", kernels.log_2d(s, FILTER_BANK_SIZE)) for s in LOG_SIGMAS]
    for s in DERIVATIVE_SIGMAS:
        bank.append((f"dx_{s:g}", kernels.derivative_2d(s, axis=1, size=FILTER_BANK_SIZE)))
        bank.append((f"dy_{s:g}", kernels.derivative_2d(s, axis=0, size=FILTER_BANK_SIZE)))
    return bank


def extract_filter_bank(image: np.ndarray) -> FeatureImage:
    gray = to_unit_range(_check_gray(image))
    bank = filter_bank()
    data = np.stack([ndimage.convolve(gray, k, mode="nearest") for _, k in bank], axis=-1)
    return FeatureImage(data, {"extractor": "filter_bank", "channels": [name for name, _ in bank]})


def tile_documents(fimg: FeatureImage, window: int, stride: int) -> Tuple[List[Document], DocLayout]:
    """One document per sliding-window position, words in row-major order."""
    if window < 1 or stride < 1:
        raise InputError("window and stride must be positive")
    if window > min(fimg.height, fimg.width):
        raise InputError(f"window {window} is larger than the {fimg.height}x{fimg.width} image")

    rr, cc = np.meshgrid(np.arange(window), np.arange(window), indexing="ij")
    offsets = np.stack([rr.ravel(), cc.ravel()], axis=1)
    corpus, coords = [], []
    for r0 in range(0, fimg.height - window + 1, stride):
        for c0 in range(0, fimg.width - window + 1, stride):
            geometry = offsets + (r0, c0)
            corpus.append(Document(fimg.data[geometry[:, 0], geometry[:, 1]], geometry))
            coords.append(geometry)

    layout = DocLayout(coords, fimg.height, fimg.width, {"scheme": "sliding_window", "window": window, "stride": stride})
    logger.info(f"Tiled {fimg.height}x{fimg.width} image into {len(corpus)} documents (window={window}, stride={stride})")
    return corpus, layout


def group_by_labels(fimg: FeatureImage, labels: np.ndarray) -> Tuple[List[Document], DocLayout]:
    """One document per distinct label, in ascending label order."""
    labels = np.asarray(labels)
    if labels.shape != (fimg.height, fimg.width):
        raise InputError(f"label map shape {labels.shape} does not match image {fimg.height}x{fimg.width}")
    if not np.issubdtype(labels.dtype, np.integer):
        raise InputError("label map must hold integers")

    corpus, coords = [], []
    for label in np.unique(labels):
        rows, cols = np.nonzero(labels == label)
        geometry = np.stack([rows, cols], axis=1)
        corpus.append(Document(fimg.data[rows, cols], geometry))
        coords.append(geometry)

    layout = DocLayout(coords, fimg.height, fimg.width,
                       {"scheme": "labels", "labels": [int(v) for v in np.unique(labels)]})
    logger.info(f"Grouped {fimg.height}x{fimg.width} image into {len(corpus)} label documents")
    return corpus, layout
