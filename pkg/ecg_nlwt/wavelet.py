"""
Orthogonal wavelets
Periodized Mallat transforms in 1-D and separable 2-D form, their inverses,
and the hard/soft shrinkage operators applied to 2-D coefficient sets.

Conventions
-----------
Analysis step along an axis of even length n, filter h of length F:

    a[k] = sum_j h[j] * x[(2k + j) mod n]
    d[k] = sum_j g[j] * x[(2k + j) mod n],   g[j] = (-1)**j * h[F-1-j]

An odd-length axis is first extended by repeating its last sample once. The
pre-step shape of every level is kept so the inverse can crop the extension.
In 2-D each level filters axis 0 (block samples) and then axis 1 (blocks);
subband names give the axis-0 band first: LH = low along axis 0, high along
axis 1. An axis of length 1 is left untouched, so an n x 1 matrix reduces to
the 1-D transform of its column.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Iterator, List, Optional, Tuple, Union

import numpy as np
import pywt

from .errors import InvalidLevels, InvalidParameter, MatrixTooSmall, ShapeMismatch, SignalTooShort

logger = logging.getLogger(__name__)

_SQRT_HALF = math.sqrt(0.5)
_SQRT3 = math.sqrt(3.0)
_DB2_NORM = 4.0 * math.sqrt(2.0)

# Reconstruction lowpass filters (PyWavelets orientation).
FILTER_TABLE = {
    "haar": (_SQRT_HALF, _SQRT_HALF),
    "db2": (
        (1.0 + _SQRT3) / _DB2_NORM,
        (3.0 + _SQRT3) / _DB2_NORM,
        (3.0 - _SQRT3) / _DB2_NORM,
        (1.0 - _SQRT3) / _DB2_NORM,
    ),
    "db4": (
        0.23037781330889650,
        0.71484657055291565,
        0.63088076792985889,
        -0.027983769416859854,
        -0.18703481171909309,
        0.030841381835560764,
        0.032883011666885200,
        -0.010597401785069032,
    ),
    "sym4": (
        0.032223100604042702,
        -0.012603967262037833,
        -0.099219543576847216,
        0.29785779560527736,
        0.80373875180591614,
        0.49761866763201545,
        -0.029635527645998510,
        -0.075765714789273325,
    ),
}
FILTER_ALIASES = {"db1": "haar"}

DEFAULT_MAX_LEVELS = 3


@dataclass(frozen=True)
class WaveletFilter:
    """Orthonormal filter pair; the highpass follows from the lowpass."""
    name: str
    analysis_lowpass: Tuple[float, ...]

    def __post_init__(self):
        h = np.asarray(self.analysis_lowpass, dtype=np.float64)
        if h.size < 2 or h.size % 2:
            raise InvalidParameter(f"wavelet '{self.name}': filter length must be even and >= 2")
        if abs(h.sum() - math.sqrt(2.0)) > 1e-8 or abs(np.dot(h, h) - 1.0) > 1e-8:
            raise InvalidParameter(f"wavelet '{self.name}' is not an orthonormal lowpass filter")

    @property
    def length(self) -> int:
        return len(self.analysis_lowpass)

    @property
    def lowpass(self) -> np.ndarray:
        return np.asarray(self.analysis_lowpass, dtype=np.float64)

    @property
    def highpass(self) -> np.ndarray:
        h = self.lowpass[::-1].copy()
        h[1::2] *= -1.0
        return h


@lru_cache(maxsize=None)
def get_filter(name: str) -> WaveletFilter:
    """Look up a filter by name: embedded table first, PyWavelets for other orthogonal names."""
    key = name.strip().lower()
    key = FILTER_ALIASES.get(key, key)
    if key in FILTER_TABLE:
        return WaveletFilter(key, FILTER_TABLE[key])
    try:
        wavelet = pywt.Wavelet(key)
    except ValueError as e:
        raise InvalidParameter(f"unknown wavelet '{name}'") from e
    if not wavelet.orthogonal:
        raise InvalidParameter(f"wavelet '{name}' is not orthogonal")
    logger.debug("wavelet %s taken from PyWavelets (%d taps)", key, wavelet.dec_len)
    return WaveletFilter(key, tuple(float(c) for c in wavelet.rec_lo))


def _as_filter(wavelet: Union[WaveletFilter, str]) -> WaveletFilter:
    return get_filter(wavelet) if isinstance(wavelet, str) else wavelet


def max_levels(n: int, wavelet: Union[WaveletFilter, str]) -> int:
    """Deepest useful decomposition of an axis of length n (at least 1 when n >= 2)."""
    if n < 2:
        return 0
    return max(1, pywt.dwt_max_level(n, _as_filter(wavelet).length))


def _transform_size(shape: Tuple[int, int]) -> int:
    rows, cols = shape
    return min(rows, cols) if cols >= 2 else rows


def default_levels(shape: Tuple[int, int], wavelet: Union[WaveletFilter, str]) -> int:
    """min(3, floor(log2(min(rows, cols)))), capped at max_levels."""
    size = _transform_size(shape)
    return max(1, min(DEFAULT_MAX_LEVELS, int(math.floor(math.log2(size))), max_levels(size, wavelet)))


def _step_indices(n: int, taps: int) -> np.ndarray:
    return (2 * np.arange(n // 2)[:, None] + np.arange(taps)[None, :]) % n


def _analysis_step(x: np.ndarray, filt: WaveletFilter, axis: int) -> Tuple[np.ndarray, np.ndarray]:
    data = np.moveaxis(x, axis, 0)
    if data.shape[0] % 2:
        data = np.concatenate([data, data[-1:]], axis=0)
    blocks = data[_step_indices(data.shape[0], filt.length)]
    approx = np.tensordot(blocks, filt.lowpass, axes=([1], [0]))
    detail = np.tensordot(blocks, filt.highpass, axes=([1], [0]))
    return np.moveaxis(approx, 0, axis), np.moveaxis(detail, 0, axis)


def _synthesis_step(approx: np.ndarray, detail: np.ndarray, filt: WaveletFilter, axis: int, n_out: int) -> np.ndarray:
    a = np.moveaxis(approx, axis, 0)
    d = np.moveaxis(detail, axis, 0)
    n = 2 * a.shape[0]
    bcast = (1, filt.length) + (1,) * (a.ndim - 1)
    contrib = a[:, None] * filt.lowpass.reshape(bcast) + d[:, None] * filt.highpass.reshape(bcast)
    out = np.zeros((n,) + a.shape[1:], dtype=np.float64)
    np.add.at(out, _step_indices(n, filt.length), contrib)
    return np.moveaxis(out[:n_out], 0, axis)


@dataclass
class Pyramid:
    """1-D Mallat pyramid: coarsest approximation, details finest first."""
    approx: np.ndarray
    details: List[np.ndarray]
    lengths: List[int]

    @property
    def level_count(self) -> int:
        return len(self.details)

    def coefficients(self) -> np.ndarray:
        return np.concatenate([self.approx] + self.details[::-1])


def dwt1_forward(x, wavelet: Union[WaveletFilter, str], levels: int = 1) -> Pyramid:
    """Multi-level 1-D periodized DWT."""
    filt = _as_filter(wavelet)
    data = np.asarray(x, dtype=np.float64).reshape(-1)
    if levels < 1:
        raise InvalidLevels(f"levels must be >= 1, got {levels}")
    if data.size < filt.length:
        raise SignalTooShort(f"{filt.name} needs at least {filt.length} samples, got {data.size}")
    if levels > max_levels(data.size, filt):
        raise InvalidLevels(f"{levels} levels exceed the maximum {max_levels(data.size, filt)} for length {data.size}")
    details, lengths = [], []
    approx = data
    for _ in range(levels):
        lengths.append(approx.size)
        approx, detail = _analysis_step(approx, filt, 0)
        details.append(detail)
    return Pyramid(approx, details, lengths)


def dwt1_inverse(pyramid: Pyramid, wavelet: Union[WaveletFilter, str]) -> np.ndarray:
    filt = _as_filter(wavelet)
    approx = pyramid.approx
    for detail, n in zip(reversed(pyramid.details), reversed(pyramid.lengths)):
        if approx.shape != detail.shape or approx.size != (n + 1) // 2:
            raise ShapeMismatch(f"level of length {n} expects {(n + 1) // 2} coefficients per band")
        approx = _synthesis_step(approx, detail, filt, 0, n)
    return approx


@dataclass
class Subbands:
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray

    def arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.lh, self.hl, self.hh

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "Subbands":
        return Subbands(fn(self.lh), fn(self.hl), fn(self.hh))


@dataclass
class Dwt2Coeffs:
    """
    2-D coefficient set. details[0] is the finest level; shapes[i] is the
    matrix shape entering level i (the padding descriptor).
    """
    ll: np.ndarray
    details: List[Subbands]
    shapes: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def level_count(self) -> int:
        return len(self.details)

    @property
    def original_shape(self) -> Tuple[int, int]:
        return self.shapes[0]

    def arrays(self) -> Iterator[np.ndarray]:
        yield self.ll
        for bands in self.details:
            yield from bands.arrays()

    def map_details(self, fn: Callable[[np.ndarray], np.ndarray]) -> "Dwt2Coeffs":
        return replace(self, details=[bands.map(fn) for bands in self.details])

    def count_nonzero(self) -> int:
        return int(sum(np.count_nonzero(a) for a in self.arrays()))

    def size(self) -> int:
        return int(sum(a.size for a in self.arrays()))

    def energy(self) -> float:
        return float(sum(np.sum(a * a) for a in self.arrays()))


def dwt2_forward(X, wavelet: Union[WaveletFilter, str], levels: Optional[int] = None) -> Dwt2Coeffs:
    """Separable multi-level 2-D DWT (axis 0, then axis 1, recursing on LL)."""
    filt = _as_filter(wavelet)
    current = np.asarray(X, dtype=np.float64)
    if current.ndim == 1:
        current = current[:, None]
    if current.ndim != 2 or current.shape[0] < 2 or current.shape[1] < 1:
        raise MatrixTooSmall(f"2-D transform needs at least 2 rows and 1 column, got shape {current.shape}")
    limit = max_levels(_transform_size(current.shape), filt)
    if levels is None:
        levels = default_levels(current.shape, filt)
    if not 1 <= levels <= limit:
        raise InvalidLevels(f"levels must lie in [1, {limit}] for shape {current.shape} and {filt.name}, got {levels}")

    details, shapes = [], []
    for _ in range(levels):
        shapes.append(current.shape)
        lo, hi = _analysis_step(current, filt, 0)
        if current.shape[1] >= 2:
            ll, lh = _analysis_step(lo, filt, 1)
            hl, hh = _analysis_step(hi, filt, 1)
        else:
            ll, hl = lo, hi
            lh = np.zeros((lo.shape[0], 0))
            hh = np.zeros((hi.shape[0], 0))
        details.append(Subbands(lh, hl, hh))
        current = ll
    return Dwt2Coeffs(current, details, shapes)


def dwt2_inverse(C: Dwt2Coeffs, wavelet: Union[WaveletFilter, str]) -> np.ndarray:
    """Exact inverse of dwt2_forward, cropped back to the original shape."""
    filt = _as_filter(wavelet)
    if len(C.shapes) != len(C.details) or not C.details:
        raise ShapeMismatch("padding descriptor does not match the number of levels")
    current = np.asarray(C.ll, dtype=np.float64)
    for bands, (rows, cols) in zip(reversed(C.details), reversed(C.shapes)):
        half_rows = (rows + 1) // 2
        split_cols = cols >= 2
        half_cols = (cols + 1) // 2 if split_cols else cols
        detail_cols = half_cols if split_cols else 0
        if (current.shape != (half_rows, half_cols) or bands.hl.shape != (half_rows, half_cols)
                or bands.lh.shape != (half_rows, detail_cols) or bands.hh.shape != (half_rows, detail_cols)):
            raise ShapeMismatch(f"subband shapes do not match a level entering with shape {(rows, cols)}")
        if split_cols:
            lo = _synthesis_step(current, bands.lh, filt, 1, cols)
            hi = _synthesis_step(bands.hl, bands.hh, filt, 1, cols)
        else:
            lo, hi = current, bands.hl
        current = _synthesis_step(lo, hi, filt, 0, rows)
    return current


def _check_lambda(lam: float):
    if not lam >= 0:
        raise InvalidParameter(f"threshold must be >= 0, got {lam}")


def hard_threshold(C: Dwt2Coeffs, lam: float) -> Tuple[Dwt2Coeffs, int]:
    """Keep detail coefficients with |t| >= lam; LL passes through. Returns (coeffs, nonzero count)."""
    _check_lambda(lam)
    shrunk = C.map_details(lambda t: np.where(np.abs(t) >= lam, t, 0.0))
    return shrunk, shrunk.count_nonzero()


def soft_threshold(C: Dwt2Coeffs, lam: float) -> Dwt2Coeffs:
    """sign(t)·max(|t|−lam, 0) on the detail subbands."""
    _check_lambda(lam)
    return C.map_details(lambda t: np.sign(t) * np.maximum(np.abs(t) - lam, 0.0))
