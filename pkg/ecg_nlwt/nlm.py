"""
Nonlocal means baseline
Each sample is replaced by a weighted average of the samples in its search
window, weighted by exp(-d² / (2·L_Δ·μ²)) where d² is the flat (unweighted)
squared distance between the two patches around them.

Patches and windows are clamped at the signal edges: only offsets k for which
both i+k and j+k are valid samples enter the distance, and L_Δ becomes the
number of such offsets.
"""

import logging
import math
import time
from typing import Optional

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from .config import NlmParams
from .errors import InvalidParameter, OutOfBounds, SignalTooShort
from .signal_model import Signal, SignalLike, as_array, estimate_sigma

logger = logging.getLogger(__name__)


def _bandwidth(v: SignalLike, params: NlmParams, sigma: Optional[float]) -> float:
    if params.mu is None and sigma is None:
        sigma = estimate_sigma(v)
        logger.debug("nlm: bandwidth from estimated sigma %.6g", sigma)
    mu = params.bandwidth(sigma)
    if not mu > 0:
        raise InvalidParameter(f"NLM bandwidth must be > 0, got {mu}")
    return mu


def patch_distance(v: SignalLike, i: int, j: int, patch_half_width: int):
    """(d², L_Δ): flat sum of squared differences over the patch offsets valid at both i and j."""
    x = as_array(v)
    N = x.size
    for idx in (i, j):
        if not 0 <= idx < N:
            raise OutOfBounds(f"sample index {idx} outside [0, {N - 1}]")
    lo = max(-patch_half_width, -i, -j)
    hi = min(patch_half_width, N - 1 - i, N - 1 - j)
    offsets = np.arange(lo, hi + 1)
    diff = x[i + offsets] - x[j + offsets]
    return float(diff @ diff), int(offsets.size)


def nlm_weight(v: SignalLike, i: int, j: int, params: Optional[NlmParams] = None, sigma: Optional[float] = None) -> float:
    """Similarity weight w(i, j) in (0, 1]; w(i, i) = 1."""
    params = (params or NlmParams()).validate()
    mu = _bandwidth(v, params, sigma)
    dist, count = patch_distance(v, i, j, params.patch_half_width)
    return math.exp(-dist / (2.0 * count * mu * mu))


def _window_sums(values: np.ndarray, half_width: int) -> np.ndarray:
    """Sum of values[i-h .. i+h] clipped to the array, for every i."""
    N = values.size
    cs = np.concatenate([[0.0], np.cumsum(values)])
    idx = np.arange(N)
    return cs[np.minimum(idx + half_width + 1, N)] - cs[np.maximum(idx - half_width, 0)]


def denoise_nlm(noisy: Signal, params: Optional[NlmParams] = None, sigma: Optional[float] = None) -> Signal:
    """
    NLM estimate of every sample.

    The average is accumulated as x[i] + Σ w·(x[j] - x[i]) / Σ w so that flat
    segments are reproduced exactly; the result is finally clipped into the
    search window's range, which a convex combination cannot leave anyway.
    With exclude_center the self weight is the largest weight of the other
    candidates; a sample whose candidates all weigh zero keeps its value.
    """
    params = (params or NlmParams()).validate()
    x = noisy.samples
    N = x.size
    P, S = params.patch_half_width, params.search_half_width
    if N <= 2 * (P + S):
        raise SignalTooShort(f"NLM needs more than 2(patch + search half-widths) = {2 * (P + S)} samples, got {N}")
    mu = _bandwidth(noisy, params, sigma)
    scale = 1.0 / (2.0 * mu * mu)

    start = time.perf_counter()
    indices = np.arange(N)
    numerator = np.zeros(N)
    weight_sum = np.zeros(N) if params.exclude_center else np.ones(N)
    max_weight = np.zeros(N)
    for d in range(-S, S + 1):
        if d == 0:
            continue
        # pairs (t, t+d) where both samples exist
        valid = (indices + d >= 0) & (indices + d < N)
        shifted = np.zeros(N)
        shifted[valid] = x[indices[valid] + d]
        sq = np.where(valid, (x - shifted) ** 2, 0.0)
        dist = _window_sums(sq, P)
        count = _window_sums(valid.astype(np.float64), P)
        # i is a center with a partner only when i+d is valid
        w = np.where(valid, np.exp(-dist * scale / np.maximum(count, 1.0)), 0.0)
        numerator += w * (shifted - x)
        weight_sum += w
        np.maximum(max_weight, w, out=max_weight)

    if params.exclude_center:
        weight_sum += max_weight
    stuck = weight_sum <= 0
    if stuck.any():
        logger.debug("nlm: %d sample(s) had only zero weights and keep their value", int(stuck.sum()))
    estimate = x + np.where(stuck, 0.0, numerator / np.where(stuck, 1.0, weight_sum))

    size = 2 * S + 1
    estimate = np.clip(estimate, minimum_filter1d(x, size, mode="nearest"), maximum_filter1d(x, size, mode="nearest"))
    logger.info("nlm: %d samples, patch %d, window %d, mu=%.4g, %.0f ms",
                N, params.patch_size, size, mu, 1000 * (time.perf_counter() - start))
    return noisy.with_samples(estimate)
