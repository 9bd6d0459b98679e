"""
Block matching
Reference-block scheduling, search-window candidates, a locally learned
feature projection (PCA, or a fixed DCT basis) and assembly of similarity
data matrices (SDMs): the reference block plus its closest matches as columns.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.fft import dct
from scipy.linalg import eigh

from .config import NlwtParams
from .errors import DegenerateWindow, LengthMismatch, OutOfBounds, SignalTooShort
from .signal_model import SignalLike, as_array

logger = logging.getLogger(__name__)

# Relative size below which a covariance (or a basis entry) counts as zero.
_ZERO_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FeatureProjector:
    """Rows of basis are orthonormal; blocks are centered on a shared window mean before projecting."""
    basis: np.ndarray
    kind: str
    center: Optional[np.ndarray] = None

    @property
    def block_size(self) -> int:
        return int(self.basis.shape[1])

    def project(self, blocks: np.ndarray) -> np.ndarray:
        data = np.asarray(blocks, dtype=np.float64)
        if self.center is not None:
            data = data - self.center
        return data @ self.basis.T


@dataclass(eq=False)
class Sdm:
    """Similarity data matrix: column 0 is the reference block, then matches by ascending distance."""
    matrix: np.ndarray
    locations: np.ndarray
    reference_center: int
    distances: np.ndarray

    @property
    def column_count(self) -> int:
        return int(self.matrix.shape[1])


@dataclass(frozen=True)
class ReferenceSchedule:
    centers: np.ndarray
    arithmetic_count: int
    has_tail: bool

    def __len__(self) -> int:
        return int(self.centers.size)


def block_view(v: SignalLike, L: int) -> np.ndarray:
    """Read-only view of every full block; row r is the block centered at r + L."""
    x = as_array(v)
    if x.size < 2 * L + 1:
        raise SignalTooShort(f"signal of {x.size} samples holds no block of {2 * L + 1}")
    return sliding_window_view(x, 2 * L + 1)


def extract_block(v: SignalLike, center: int, L: int) -> np.ndarray:
    x = as_array(v)
    if not L <= center <= x.size - 1 - L:
        raise OutOfBounds(f"block centered at {center} with half-width {L} leaves [0, {x.size - 1}]")
    return x[center - L:center + L + 1].copy()


def reference_schedule(N: int, L: int, k: int) -> ReferenceSchedule:
    """Centers L, L+k, L+2k, ... plus a tail block at N-1-L when the last one stops short."""
    block = 2 * L + 1
    if N < block:
        raise SignalTooShort(f"{N} samples cannot hold a block of {block}")
    count = 1 + (N - block) // k
    centers = L + k * np.arange(count)
    has_tail = int(centers[-1]) + L < N - 1
    if has_tail:
        centers = np.append(centers, N - 1 - L)
    return ReferenceSchedule(centers.astype(np.int64), count, has_tail)


def candidate_range(N: int, reference_center: int, params: NlwtParams) -> Tuple[int, int]:
    """Inclusive range of candidate centers: the search window clamped to valid blocks."""
    L = params.L
    return max(L, reference_center - params.M), min(N - 1 - L, reference_center + params.M)


@lru_cache(maxsize=32)
def _dct_basis(block_size: int, n_components: int) -> np.ndarray:
    basis = dct(np.eye(block_size), type=2, norm="ortho", axis=0)[:n_components]
    basis.setflags(write=False)
    return basis


def dct_projector(block_size: int, n_components: int) -> FeatureProjector:
    """First n_components rows of the orthonormal type-II DCT."""
    return FeatureProjector(_dct_basis(block_size, n_components), "dct")


def _fix_signs(basis: np.ndarray) -> np.ndarray:
    for row in basis:
        significant = np.flatnonzero(np.abs(row) > _ZERO_TOL)
        if significant.size and row[significant[0]] < 0:
            row *= -1.0
    return basis


def fit_projector(v: SignalLike, reference_center: int, params: NlwtParams) -> FeatureProjector:
    """Learn the projection for one reference block from its search window."""
    x = as_array(v)
    L = params.L
    if not L <= reference_center <= x.size - 1 - L:
        raise OutOfBounds(f"reference center {reference_center} is not a valid block center")
    if params.projector == "dct":
        return dct_projector(params.block_size, params.n_components)

    lo, hi = candidate_range(x.size, reference_center, params)
    candidates = block_view(x, L)[lo - L:hi - L + 1]
    if candidates.shape[0] < 2:
        raise DegenerateWindow(f"window around {reference_center} holds {candidates.shape[0]} block(s)")

    mean = candidates.mean(axis=0)
    centered = candidates - mean
    cov = centered.T @ centered / (candidates.shape[0] - 1)
    size = params.block_size
    eigvals, eigvecs = eigh(cov, subset_by_index=[size - params.n_components, size - 1])
    scale = max(1.0, float(np.max(np.abs(candidates))) ** 2)
    if eigvals[-1] <= _ZERO_TOL * scale:
        logger.debug("zero covariance around %d, using DCT features", reference_center)
        return FeatureProjector(_dct_basis(size, params.n_components), "dct", mean)
    basis = _fix_signs(np.ascontiguousarray(eigvecs[:, ::-1].T))
    return FeatureProjector(basis, "pca", mean)


def similarity(a, b, proj: FeatureProjector) -> float:
    """Squared Euclidean distance between the projections of two blocks."""
    xa = np.asarray(a, dtype=np.float64).reshape(-1)
    xb = np.asarray(b, dtype=np.float64).reshape(-1)
    if xa.size != xb.size or xa.size != proj.block_size:
        raise LengthMismatch(f"blocks of length {xa.size} and {xb.size} for a projector of width {proj.block_size}")
    diff = proj.basis @ (xa - xb)
    return float(diff @ diff)


def window_projector(v: SignalLike, reference_center: int, params: NlwtParams) -> FeatureProjector:
    """fit_projector with the DCT basis standing in for windows too small to learn from."""
    try:
        return fit_projector(v, reference_center, params)
    except DegenerateWindow as e:
        logger.debug("%s; using DCT features", e)
        return dct_projector(params.block_size, params.n_components)


def extract_sdm(v: SignalLike, reference_center: int, params: NlwtParams,
                projector: Optional[FeatureProjector] = None) -> Sdm:
    """
    Gather the reference block and up to m-1 candidates with distance <= tau.
    Ties are broken by proximity to the reference, then by the smaller center.
    """
    x = as_array(v)
    L = params.L
    if not L <= reference_center <= x.size - 1 - L:
        raise OutOfBounds(f"reference center {reference_center} is not a valid block center")
    if projector is None:
        projector = window_projector(x, reference_center, params)

    blocks = block_view(x, L)
    lo, hi = candidate_range(x.size, reference_center, params)
    centers = np.arange(lo, hi + 1)
    features = projector.project(blocks[lo - L:hi - L + 1])
    distances = np.sum((features - features[reference_center - lo]) ** 2, axis=1)

    keep = (distances <= params.tau) & (centers != reference_center)
    matched, matched_dist = centers[keep], distances[keep]
    order = np.lexsort((matched, np.abs(matched - reference_center), matched_dist))[:params.m - 1]

    locations = np.concatenate([[reference_center], matched[order]]).astype(np.int64)
    return Sdm(
        matrix=np.ascontiguousarray(blocks[locations - L].T),
        locations=locations,
        reference_center=int(reference_center),
        distances=np.concatenate([[0.0], matched_dist[order]]),
    )


def extract_sdms(v: SignalLike, params: NlwtParams, centers: Optional[np.ndarray] = None) -> List[Sdm]:
    """SDMs for a run of consecutive references, refitting the projector every refit_every references."""
    x = as_array(v)
    if centers is None:
        centers = reference_schedule(x.size, params.L, params.k).centers
    sdms = []
    projector = None
    for index, center in enumerate(centers):
        if index % params.refit_every == 0:
            projector = window_projector(x, int(center), params)
        sdms.append(extract_sdm(x, int(center), params, projector))
    return sdms
