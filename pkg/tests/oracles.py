"""
Explicit-matrix reference transforms used to cross-check the fast code paths.

Every operator here is built as a dense matrix from the filter taps alone, so
it shares no code with ecg_nlwt.wavelet.
"""

import math

import numpy as np


def pad_matrix(n: int) -> np.ndarray:
    """n -> even length by repeating the last sample once."""
    m = n + (n % 2)
    P = np.zeros((m, n))
    P[np.arange(n), np.arange(n)] = 1.0
    if m != n:
        P[n, n - 1] = 1.0
    return P


def analysis_matrix(n: int, h) -> np.ndarray:
    """One periodized analysis step on an even length n: rows are [lowpass; highpass]."""
    h = np.asarray(h, dtype=np.float64)
    F = h.size
    g = np.array([(-1) ** j * h[F - 1 - j] for j in range(F)])
    A = np.zeros((n, n))
    for k in range(n // 2):
        for j in range(F):
            A[k, (2 * k + j) % n] += h[j]
            A[n // 2 + k, (2 * k + j) % n] += g[j]
    return A


def level_forward(n: int, h) -> np.ndarray:
    """(m x n) operator: pad then analyse; output is [approx; detail]."""
    P = pad_matrix(n)
    return analysis_matrix(P.shape[0], h) @ P


def level_inverse(n: int, h) -> np.ndarray:
    """(n x m) operator: synthesize the padded signal and crop it to n."""
    m = n + (n % 2)
    return analysis_matrix(m, h).T[:n]


def dwt2_oracle(X: np.ndarray, h, levels: int):
    """
    Multi-level separable transform through Kronecker products:
    vec(A X B^T) = (B kron A) vec(X) with column-major vec.
    Returns (LL, [(LH, HL, HH) finest first]).
    """
    current = np.asarray(X, dtype=np.float64)
    details = []
    for _ in range(levels):
        rows, cols = current.shape
        Ar = level_forward(rows, h)
        Bc = level_forward(cols, h) if cols >= 2 else np.eye(1)
        op = np.kron(Bc, Ar)
        out = (op @ current.reshape(-1, order="F")).reshape(Ar.shape[0], Bc.shape[0], order="F")
        hr = Ar.shape[0] // 2
        if cols >= 2:
            hc = Bc.shape[0] // 2
            ll, lh = out[:hr, :hc], out[:hr, hc:]
            hl, hh = out[hr:, :hc], out[hr:, hc:]
        else:
            ll, hl = out[:hr], out[hr:]
            lh = np.zeros((hr, 0))
            hh = np.zeros((hr, 0))
        details.append((lh, hl, hh))
        current = ll
    return current, details


def dwt1_operators(n: int, h, levels: int):
    """
    Dense forward (coefficients x n) and inverse (n x coefficients) operators of
    a multi-level 1-D transform, plus a mask marking the approximation rows.
    """
    sizes = []
    length = n
    detail_blocks = []
    current = np.eye(n)
    for _ in range(levels):
        step = level_forward(length, h) @ current
        half = step.shape[0] // 2
        detail_blocks.append(step[half:])
        current = step[:half]
        sizes.append(length)
        length = half
    forward = np.vstack([current] + detail_blocks[::-1])
    approx_count = current.shape[0]

    # Build the inverse level by level, from the coarsest up.
    def inverse(coeffs: np.ndarray) -> np.ndarray:
        approx = coeffs[:approx_count]
        offset = approx_count
        for level in reversed(range(levels)):
            size = sizes[level]
            half = (size + 1) // 2
            detail = coeffs[offset:offset + half]
            offset += half
            approx = level_inverse(size, h) @ np.concatenate([approx, detail])
        return approx

    mask = np.zeros(forward.shape[0], dtype=bool)
    mask[:approx_count] = True
    return forward, inverse, mask


def oracle_levels(n: int, filter_length: int) -> int:
    """min(3, floor(log2 n), max(1, floor(log2(n / (F - 1)))))."""
    limit = max(1, int(math.floor(math.log2(n / (filter_length - 1)))))
    return max(1, min(3, int(math.floor(math.log2(n))), limit))
