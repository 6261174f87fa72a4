"""Binary netpbm images (PGM grayscale, PPM colour) and integer label maps."""

import logging
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from PIL import Image, UnidentifiedImageError

from app.utils.errors import InputError

logger = logging.getLogger(__name__)

_LABEL_MODES = {"L", "I", "I;16", "I;16B"}


def _open(path) -> Image.Image:
    try:
        image = Image.open(path)
        image.load()
        return image
    except FileNotFoundError:
        raise InputError(f"image not found: {path}")
    except (UnidentifiedImageError, OSError) as e:
        raise InputError(f"cannot read image {path}: {e}")


def read_image(path) -> np.ndarray:
    """8-bit image as uint8, (H, W) for PGM and (H, W, 3) for PPM."""
    image = _open(path)
    if image.mode in ("L", "RGB"):
        return np.asarray(image, dtype=np.uint8).copy()
    raise InputError(f"{path}: unsupported image mode {image.mode}, expected 8-bit PGM or PPM")


def read_pgm(path) -> np.ndarray:
    data = read_image(path)
    if data.ndim != 2:
        raise InputError(f"{path} is not a grayscale image")
    return data


def read_ppm(path) -> np.ndarray:
    data = read_image(path)
    if data.ndim != 3:
        raise InputError(f"{path} is not an RGB image")
    return data


def write_pgm(path, data: np.ndarray) -> None:
    data = np.asarray(data)
    if data.ndim != 2 or data.dtype != np.uint8:
        raise InputError("PGM output must be a 2-D uint8 array")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(data).save(path, format="PPM")
    logger.info(f"Wrote {data.shape[0]}x{data.shape[1]} PGM to {path}")


def membership_to_gray(values: np.ndarray) -> np.ndarray:
    """Membership in [0, 1] to 8-bit gray, round(255 * value)."""
    return np.rint(np.clip(values, 0.0, 1.0) * 255.0).astype(np.uint8)


def read_label_map(path, is_csv: Optional[bool] = None) -> np.ndarray:
    """Integer label map from a PGM (8 or 16 bit) or a headerless CSV matrix.

    ``path`` may be a file object; the format is then taken from ``is_csv``.
    """
    if is_csv is None:
        is_csv = Path(str(path)).suffix.lower() == ".csv"
    if is_csv:
        try:
            frame = pd.read_csv(path, header=None)
        except (OSError, ValueError) as e:
            raise InputError(f"cannot read label map {path}: {e}")
        values = frame.to_numpy()
        if not np.issubdtype(values.dtype, np.integer):
            raise InputError(f"label map {path} must hold integers only")
        return values.astype(np.int64)

    image = _open(path)
    if image.mode not in _LABEL_MODES:
        raise InputError(f"{path}: label maps must be grayscale, got mode {image.mode}")
    return np.asarray(image).astype(np.int64)
