import logging
from typing import List

import numpy as np

from app.models.domain import DocLayout, MembershipMap
from app.utils.errors import InputError

logger = logging.getLogger(__name__)

UNCOVERED = -1


def assemble_maps(memberships: List[np.ndarray], layout: DocLayout, height: int, width: int) -> MembershipMap:
    """Average the memberships of all words mapped to each pixel.

    Pixels that no word maps to keep value 0 and are left out of the coverage mask.
    """
    if (height, width) != (layout.height, layout.width):
        raise InputError(f"layout is {layout.height}x{layout.width}, requested {height}x{width}")
    if len(memberships) != len(layout.coords):
        raise InputError(f"{len(memberships)} membership blocks for {len(layout.coords)} layout documents")

    K = None
    for d, (Z, coords) in enumerate(zip(memberships, layout.coords)):
        Z = np.asarray(Z)
        if Z.ndim != 2 or Z.shape[0] != coords.shape[0]:
            raise InputError(f"document {d}: {Z.shape[0] if Z.ndim == 2 else '?'} memberships "
                             f"for {coords.shape[0]} mapped words")
        if K is None:
            K = Z.shape[1]
        elif Z.shape[1] != K:
            raise InputError("documents disagree on the number of topics")

    sums = np.zeros((K, height, width))
    counts = np.zeros((height, width))
    for Z, coords in zip(memberships, layout.coords):
        rows, cols = coords[:, 0], coords[:, 1]
        for k in range(K):
            np.add.at(sums[k], (rows, cols), Z[:, k])
        np.add.at(counts, (rows, cols), 1.0)

    coverage = counts > 0
    values = np.divide(sums, counts, out=np.zeros_like(sums), where=coverage)
    uncovered = int((~coverage).sum())
    if uncovered:
        logger.warning(f"{uncovered} pixels are not covered by any document")
    return MembershipMap(values, coverage)


def crisp_map(mmap: MembershipMap) -> np.ndarray:
    """Topic with the largest membership per pixel; ties go to the lowest index."""
    labels = np.argmax(mmap.values, axis=0)
    return np.where(mmap.coverage, labels, UNCOVERED)


def transition_map(mmap: MembershipMap, lo: float = 0.4, hi: float = 0.6) -> np.ndarray:
    """Covered pixels with at least one membership inside [lo, hi]."""
    if lo > hi:
        raise InputError(f"lo={lo} must not exceed hi={hi}")
    in_band = (mmap.values >= lo) & (mmap.values <= hi)
    return in_band.any(axis=0) & mmap.coverage
