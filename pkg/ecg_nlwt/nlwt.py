"""
NLWT denoiser
SDM extraction -> 2-D DWT shrinkage of every SDM -> weighted aggregation of
all block estimates back onto the time axis.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .block_match import Sdm, extract_sdms, reference_schedule
from .config import NlwtParams
from .errors import InvalidParameter, SignalTooShort, UncoveredSample
from .signal_model import Signal
from .wavelet import default_levels, dwt2_forward, dwt2_inverse, get_filter, hard_threshold, max_levels, soft_threshold

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class ShrunkSdm:
    matrix: np.ndarray
    retained_count: int
    omega: float
    locations: np.ndarray
    reference_center: int


def visu_coeff(N_i: float) -> float:
    """Universal threshold multiplier sqrt(2 ln N_i)."""
    if not N_i >= 2:
        raise InvalidParameter(f"VisuShrink needs at least 2 coefficients, got {N_i}")
    return math.sqrt(2.0 * math.log(N_i))


def _levels_for(shape, params: NlwtParams) -> int:
    filt = get_filter(params.wavelet)
    if params.levels is None:
        return default_levels(shape, filt)
    size = min(shape) if shape[1] >= 2 else shape[0]
    return min(params.levels, max_levels(size, filt))


def shrink_sdm(sdm: Sdm, sigma: float, params: NlwtParams) -> ShrunkSdm:
    """Denoise one SDM by thresholding its 2-D DWT at lambda = c·sigma."""
    if not sigma > 0:
        raise InvalidParameter(f"sigma must be > 0, got {sigma}")
    filt = get_filter(params.wavelet)
    coeffs = dwt2_forward(sdm.matrix, filt, _levels_for(sdm.matrix.shape, params))

    c = visu_coeff(sdm.matrix.size) if params.threshold_policy == "visu" else params.c
    lam = c * sigma
    if params.threshold_mode == "soft":
        shrunk = soft_threshold(coeffs, lam)
        retained = shrunk.count_nonzero()
    else:
        shrunk, retained = hard_threshold(coeffs, lam)

    # An all-zero SDM keeps nothing; it is weighted as if one coefficient survived.
    n_s = max(retained, 1)
    omega = 1.0 if params.aggregation == "uniform" else 1.0 / (n_s * sigma * sigma)
    return ShrunkSdm(dwt2_inverse(shrunk, filt), n_s, omega, sdm.locations, sdm.reference_center)


class Aggregator:
    """Per-sample weighted sums of block estimates and of their weights."""

    def __init__(self, N: int):
        self.N = N
        self.weighted_sum = np.zeros(N)
        self.weight_sum = np.zeros(N)

    def add(self, shrunk: ShrunkSdm):
        rows = shrunk.matrix.shape[0]
        half = (rows - 1) // 2
        index = shrunk.locations[None, :] + np.arange(-half, half + 1)[:, None]
        np.add.at(self.weighted_sum, index, shrunk.omega * shrunk.matrix)
        np.add.at(self.weight_sum, index, shrunk.omega)

    def result(self) -> np.ndarray:
        uncovered = np.flatnonzero(self.weight_sum <= 0)
        if uncovered.size:
            raise UncoveredSample(f"{uncovered.size} sample(s) received no estimate, first at {uncovered[0]}")
        return self.weighted_sum / self.weight_sum


def aggregate(shrunk: Iterable[ShrunkSdm], N: int) -> np.ndarray:
    """
    Weighted average of every estimate of every sample; every occurrence counts
    with its SDM's weight. Returns the bare sample array; denoise_nlwt wraps it
    into a Signal carrying the input's sample rate and label.
    """
    agg = Aggregator(N)
    for item in shrunk:
        agg.add(item)
    return agg.result()


def _denoise_chunk(samples: np.ndarray, centers: np.ndarray, sigma: float, params: NlwtParams) -> List[ShrunkSdm]:
    return [shrink_sdm(sdm, sigma, params) for sdm in extract_sdms(samples, params, centers)]


def denoise_nlwt(noisy: Signal, sigma: float, params: Optional[NlwtParams] = None, workers: int = 1) -> Signal:
    """
    Full NLWT pipeline. References are processed in chunks of refit_every
    (one projector per chunk), possibly on several threads; aggregation always
    runs in ascending reference order, so the result does not depend on workers.
    """
    params = (params or NlwtParams()).validate()
    if not (sigma > 0 and math.isfinite(sigma)):
        raise InvalidParameter(f"sigma must be a positive finite number, got {sigma}")
    N = len(noisy)
    if N < params.block_size:
        raise SignalTooShort(f"NLWT needs at least 2L+1 = {params.block_size} samples, got {N}")

    start = time.perf_counter()
    schedule = reference_schedule(N, params.L, params.k)
    step = params.refit_every
    chunks: Sequence[np.ndarray] = [schedule.centers[i:i + step] for i in range(0, len(schedule), step)]
    samples = noisy.samples

    agg = Aggregator(N)
    columns = 0
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = pool.map(lambda chunk: _denoise_chunk(samples, chunk, sigma, params), chunks)
            for shrunk_chunk in results:
                for item in shrunk_chunk:
                    columns += item.locations.size
                    agg.add(item)
    else:
        for chunk in chunks:
            for item in _denoise_chunk(samples, chunk, sigma, params):
                columns += item.locations.size
                agg.add(item)

    logger.info(
        "nlwt: %d samples, %d SDMs (tail=%s), %.1f columns/SDM, %.0f ms",
        N, len(schedule), schedule.has_tail, columns / len(schedule), 1000 * (time.perf_counter() - start))
    return noisy.with_samples(agg.result())
