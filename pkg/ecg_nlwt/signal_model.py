"""
Signal model
The Signal record, amplitude normalization, calibrated AWGN injection,
a synthetic ECG generator, noise-level estimation and the three quality
metrics used to score a denoiser (SNR improvement, MSE, PRD).
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple, Union

import numpy as np

from .errors import AllZeroSignal, InvalidParameter, InvalidSignal, LengthMismatch, SignalTooShort, ZeroDenominator
from .wavelet import WaveletFilter, dwt1_forward, get_filter

logger = logging.getLogger(__name__)

UINT64_MAX = 2 ** 64 - 1

# Median absolute deviation of a standard normal variable.
MAD_SCALE = 0.6745


@dataclass(frozen=True, eq=False)
class Signal:
    """A uniformly sampled, real-valued 1-D record."""
    samples: np.ndarray
    sample_rate_hz: float
    label: str = ""
    unit: str = "mV"

    def __post_init__(self):
        data = np.array(self.samples, dtype=np.float64).reshape(-1)
        if data.size < 1:
            raise InvalidSignal("signal must hold at least one sample")
        if not np.all(np.isfinite(data)):
            raise InvalidSignal(f"signal '{self.label}' contains non-finite samples")
        if not (self.sample_rate_hz > 0 and math.isfinite(self.sample_rate_hz)):
            raise InvalidSignal(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        data.setflags(write=False)
        object.__setattr__(self, "samples", data)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self) -> int:
        return int(self.samples.size)

    def with_samples(self, samples: np.ndarray, label: Optional[str] = None) -> "Signal":
        """Return a signal sharing this one's metadata but holding new samples."""
        return Signal(samples, self.sample_rate_hz, self.label if label is None else label, self.unit)

    @property
    def power(self) -> float:
        return signal_power(self)


@dataclass(frozen=True)
class NoiseSpec:
    """Target SNR and seed of one AWGN realization; sigma is filled by derive()."""
    target_snr_db: float
    seed: int
    sigma: Optional[float] = None

    def __post_init__(self):
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= int(self.seed) <= UINT64_MAX:
            raise InvalidParameter(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not math.isfinite(self.target_snr_db):
            raise InvalidParameter(f"target_snr_db must be finite, got {self.target_snr_db}")

    def derive(self, signal: "SignalLike") -> "NoiseSpec":
        """Fix sigma from the exact power of the clean signal."""
        power = signal_power(signal)
        if power == 0.0:
            raise AllZeroSignal("cannot calibrate noise against a signal with zero power")
        sigma = math.sqrt(power / 10.0 ** (self.target_snr_db / 10.0))
        return replace(self, sigma=sigma)


@dataclass
class DenoiseReport:
    """Quality metrics of one denoising run plus its provenance."""
    method: str
    snr_imp_db: Optional[float]
    mse: float
    prd_percent: float
    clean_power: float
    perfect: bool = False
    seed: Optional[int] = None
    target_snr_db: Optional[float] = None
    sigma: Optional[float] = None
    sigma_source: str = "given"
    record: str = ""
    channel: str = ""
    realization: Optional[int] = None
    kind: str = "run"
    runtime_ms: Optional[float] = None
    params: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        """Convert to dictionary for serialization, in report-schema order."""
        return {
            "kind": self.kind,
            "record": self.record,
            "channel": self.channel,
            "method": self.method,
            "snr_in_db": self.target_snr_db,
            "realization": self.realization,
            "seed": self.seed,
            "snr_imp_db": self.snr_imp_db,
            "perfect": self.perfect,
            "mse": self.mse,
            "prd_percent": self.prd_percent,
            "clean_power": self.clean_power,
            "sigma": self.sigma,
            "sigma_source": self.sigma_source,
            "params": dict(self.params),
            "runtime_ms": self.runtime_ms,
        }

    @classmethod
    def from_dict(cls, row: Dict) -> "DenoiseReport":
        return cls(
            method=row["method"],
            snr_imp_db=row["snr_imp_db"],
            mse=row["mse"],
            prd_percent=row["prd_percent"],
            clean_power=row["clean_power"],
            perfect=bool(row.get("perfect", False)),
            seed=row.get("seed"),
            target_snr_db=row.get("snr_in_db"),
            sigma=row.get("sigma"),
            sigma_source=row.get("sigma_source", "given"),
            record=row.get("record", ""),
            channel=row.get("channel", ""),
            realization=row.get("realization"),
            kind=row.get("kind", "run"),
            runtime_ms=row.get("runtime_ms"),
            params=dict(row.get("params") or {}),
        )


SignalLike = Union[Signal, np.ndarray]


def as_array(x: SignalLike) -> np.ndarray:
    if isinstance(x, Signal):
        return x.samples
    return np.asarray(x, dtype=np.float64).reshape(-1)


def _aligned(a: SignalLike, b: SignalLike, what: str) -> Tuple[np.ndarray, np.ndarray]:
    xa, xb = as_array(a), as_array(b)
    if xa.size != xb.size:
        raise LengthMismatch(f"{what}: lengths differ ({xa.size} vs {xb.size})")
    return xa, xb


def signal_power(signal: SignalLike) -> float:
    """Mean power (1/N)·Σu²."""
    x = as_array(signal)
    return float(np.mean(x * x))


def normalize(signal: Signal) -> Signal:
    """Scale the signal so that its largest absolute sample is exactly 1."""
    peak = float(np.max(np.abs(signal.samples)))
    if peak == 0.0:
        raise AllZeroSignal(f"signal '{signal.label}' is identically zero")
    return signal.with_samples(signal.samples / peak)


def gaussian_sequence(n: int, seed: int) -> np.ndarray:
    """
    Standard normal sequence by the Box-Muller transform over a PCG64 stream.

    Uniform doubles are drawn in pairs (u1, u2); u1 is mapped to (0, 1] so the
    logarithm stays finite, and each pair yields r·cos(2πu2), r·sin(2πu2) with
    r = sqrt(-2 ln u1), interleaved in that order. The first n values are
    returned. The stream depends on the seed only.
    """
    if n < 0:
        raise InvalidParameter(f"sequence length must be nonnegative, got {n}")
    if not 0 <= int(seed) <= UINT64_MAX:
        raise InvalidParameter(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    pairs = (n + 1) // 2
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    uniforms = rng.random(2 * pairs)
    u1 = 1.0 - uniforms[0::2]
    u2 = uniforms[1::2]
    radius = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    out = np.empty(2 * pairs, dtype=np.float64)
    out[0::2] = radius * np.cos(theta)
    out[1::2] = radius * np.sin(theta)
    return out[:n]


def add_awgn(signal: Signal, spec: NoiseSpec) -> Tuple[Signal, float]:
    """Add white Gaussian noise calibrated to spec.target_snr_db; returns (noisy, sigma)."""
    derived = spec.derive(signal)
    noise = derived.sigma * gaussian_sequence(len(signal), derived.seed)
    logger.debug("awgn: label=%s snr=%.2f dB sigma=%.6g seed=%d", signal.label, spec.target_snr_db, derived.sigma, derived.seed)
    return signal.with_samples(signal.samples + noise), derived.sigma


def estimate_sigma(noisy: SignalLike, wavelet: Union[WaveletFilter, str] = "haar") -> float:
    """Noise standard deviation from the finest detail band: median(|d|)/0.6745."""
    x = as_array(noisy)
    if x.size < 4:
        raise SignalTooShort(f"noise estimation needs at least 4 samples, got {x.size}")
    filt = get_filter(wavelet) if isinstance(wavelet, str) else wavelet
    pyramid = dwt1_forward(x, filt, 1)
    return float(np.median(np.abs(pyramid.details[0])) / MAD_SCALE)


def snr_improvement(clean: SignalLike, noisy: SignalLike, denoised: SignalLike) -> float:
    """10·log10(Σ(v−u)² / Σ(û−u)²) in dB."""
    u, v = _aligned(clean, noisy, "snr_improvement")
    _, est = _aligned(clean, denoised, "snr_improvement")
    numerator = float(np.sum((v - u) ** 2))
    denominator = float(np.sum((est - u) ** 2))
    if denominator == 0.0:
        raise ZeroDenominator("denoised signal equals the clean signal exactly")
    if numerator == 0.0:
        return float("-inf")
    return 10.0 * math.log10(numerator / denominator)


def mse(clean: SignalLike, denoised: SignalLike) -> float:
    """(1/N)·Σ(û−u)²."""
    u, est = _aligned(clean, denoised, "mse")
    return float(np.mean((est - u) ** 2))


def prd(clean: SignalLike, denoised: SignalLike) -> float:
    """Percent root mean square difference, 100·sqrt(MSE / clean power)."""
    u, est = _aligned(clean, denoised, "prd")
    power = float(np.mean(u * u))
    if power == 0.0:
        raise AllZeroSignal("PRD is undefined for an all-zero clean signal")
    return 100.0 * math.sqrt(float(np.mean((est - u) ** 2)) / power)


def score(clean: Signal, noisy: Signal, denoised: Signal, method: str, **provenance) -> DenoiseReport:
    """Compute all three metrics into a DenoiseReport."""
    try:
        snr_imp: Optional[float] = snr_improvement(clean, noisy, denoised)
        perfect = False
    except ZeroDenominator:
        snr_imp, perfect = None, True
    return DenoiseReport(
        method=method,
        snr_imp_db=snr_imp,
        mse=mse(clean, denoised),
        prd_percent=prd(clean, denoised),
        clean_power=signal_power(clean),
        perfect=perfect,
        **provenance,
    )


# Synthetic ECG: one Gaussian bump per wave, positions and widths as fractions
# of the beat period. These numbers are frozen; golden tests depend on them.
SYNTH_BUMPS = (
    # (wave, amplitude, center, width)
    ("P", 0.12, 0.20, 0.025),
    ("Q", -0.10, 0.36, 0.008),
    ("R", 1.00, 0.40, 0.010),
    ("S", -0.20, 0.44, 0.010),
    ("T", 0.30, 0.70, 0.040),
)
SYNTH_JITTER = 0.02


def synth_beat(n_samples: int) -> np.ndarray:
    phase = np.arange(n_samples, dtype=np.float64) / n_samples
    beat = np.zeros(n_samples)
    for _, amplitude, center, width in SYNTH_BUMPS:
        beat += amplitude * np.exp(-((phase - center) ** 2) / (2.0 * width * width))
    return beat


def synth_ecg(
    beats: int,
    sample_rate_hz: float = 360.0,
    heart_rate_bpm: float = 60.0,
    seed: int = 0,
    jitter: float = SYNTH_JITTER,
    label: str = "synth",
) -> Signal:
    """Deterministic quasi-periodic ECG-like waveform normalized to ±1."""
    if beats < 1:
        raise InvalidParameter(f"beats must be >= 1, got {beats}")
    if not (sample_rate_hz > 0 and heart_rate_bpm > 0):
        raise InvalidParameter("sample_rate_hz and heart_rate_bpm must be positive")
    if not 0.0 <= jitter <= SYNTH_JITTER:
        raise InvalidParameter(f"jitter must lie in [0, {SYNTH_JITTER}], got {jitter}")
    if not 0 <= int(seed) <= UINT64_MAX:
        raise InvalidParameter(f"seed must be an unsigned 64-bit integer, got {seed!r}")

    period = sample_rate_hz * 60.0 / heart_rate_bpm
    if period < 8:
        raise InvalidParameter(f"beat period of {period:.2f} samples is too short; raise the sampling rate")

    rng = np.random.Generator(np.random.PCG64(int(seed)))
    offsets = rng.uniform(-1.0, 1.0, size=beats) * jitter
    pieces = [synth_beat(int(round(period * (1.0 + offset)))) for offset in offsets]
    return normalize(Signal(np.concatenate(pieces), sample_rate_hz, label))
