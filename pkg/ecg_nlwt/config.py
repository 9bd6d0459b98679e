"""
Run configuration
Parameter records for both denoisers (short notation L, M, m, tau, k, c in the config file),
sampling-rate presets, and YAML/JSON configuration loading with layering:
defaults < sample-rate preset < config file < command-line flags.
"""

import logging
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import yaml

from .errors import InvalidParameter
from .wavelet import get_filter

logger = logging.getLogger(__name__)

PROJECTORS = ("pca", "dct")
THRESHOLD_POLICIES = ("fixed", "visu")
THRESHOLD_MODES = ("hard", "soft")
AGGREGATIONS = ("weighted", "uniform")

# Config-file / flag names (short notation) -> NlwtParams field names.
NLWT_KEYS = {
    "L": "block_half_width",
    "M": "search_half_width",
    "m": "max_blocks",
    "tau": "match_threshold",
    "k": "shift",
    "c": "shrink_coeff",
    "wavelet": "wavelet",
    "projector": "projector",
    "n_components": "n_components",
    "levels": "levels",
    "refit_every": "refit_every",
    "threshold_policy": "threshold_policy",
    "threshold_mode": "threshold_mode",
    "aggregation": "aggregation",
}
NLM_KEYS = ("patch_half_width", "search_half_width", "mu", "mu_factor", "exclude_center")


def _field_names(cls) -> set:
    return {f.name for f in fields(cls)}


@dataclass(frozen=True)
class NlwtParams:
    """
    Tunables of the NLWT denoiser.

    block_half_width    L    block length is 2L+1 samples
    search_half_width   M    candidates lie within ±M samples of the reference
    max_blocks          m    SDM column cap, default 2(2L+1)
    match_threshold     tau  projected squared distance cut-off
    shift               k    reference stride, default L (50 % overlap)
    shrink_coeff        c    lambda = c·sigma
    """
    block_half_width: int = 10
    search_half_width: int = 1000
    max_blocks: Optional[int] = None
    match_threshold: float = 1.2
    shift: Optional[int] = None
    shrink_coeff: float = 3.8
    wavelet: str = "haar"
    projector: str = "pca"
    n_components: int = 5
    levels: Optional[int] = None
    refit_every: int = 1
    threshold_policy: str = "fixed"
    threshold_mode: str = "hard"
    aggregation: str = "weighted"

    @property
    def L(self) -> int:
        return self.block_half_width

    @property
    def M(self) -> int:
        return self.search_half_width

    @property
    def m(self) -> int:
        return self.max_blocks if self.max_blocks is not None else 2 * self.block_size

    @property
    def k(self) -> int:
        return self.shift if self.shift is not None else self.block_half_width

    @property
    def tau(self) -> float:
        return self.match_threshold

    @property
    def c(self) -> float:
        return self.shrink_coeff

    @property
    def block_size(self) -> int:
        return 2 * self.block_half_width + 1

    def validate(self) -> "NlwtParams":
        """Raise InvalidParameter naming the first tunable out of range."""
        if not isinstance(self.block_half_width, int) or self.block_half_width < 1:
            raise InvalidParameter(
                f"block half-width L must be an integer >= 1, got {self.block_half_width!r} "
                "(usual tuning range: 0.01*fs to 0.1*fs samples)")
        if not isinstance(self.search_half_width, int) or self.search_half_width < 1:
            raise InvalidParameter(
                f"search window half-width M must be an integer >= 1, got {self.search_half_width!r} "
                "(usual tuning range: 3-5 heart beats)")
        if not isinstance(self.m, int) or self.m < 1:
            raise InvalidParameter(f"maximum number of blocks m must be an integer >= 1, got {self.m!r}")
        if not isinstance(self.k, int) or not 0 < self.k < self.block_size:
            raise InvalidParameter(f"shift k must satisfy 0 < k < 2L+1 = {self.block_size}, got {self.k!r}")
        if not (self.match_threshold > 0 and math.isfinite(self.match_threshold)):
            raise InvalidParameter(
                f"matching threshold tau must be > 0, got {self.match_threshold!r} "
                f"(usual tuning range: 1-5 % of 2(2L+1) = {2 * self.block_size})")
        if not (self.shrink_coeff > 0 and math.isfinite(self.shrink_coeff)):
            raise InvalidParameter(
                f"shrinkage coefficient c must be > 0, got {self.shrink_coeff!r} "
                "(usual tuning range: ±25 % of 2*sqrt(log(2L+1)))")
        get_filter(self.wavelet)
        if self.projector not in PROJECTORS:
            raise InvalidParameter(f"projector must be one of {PROJECTORS}, got {self.projector!r}")
        if not isinstance(self.n_components, int) or not 1 <= self.n_components <= self.block_size:
            raise InvalidParameter(
                f"n_components must lie in [1, 2L+1 = {self.block_size}], got {self.n_components!r}")
        if self.levels is not None and (not isinstance(self.levels, int) or self.levels < 1):
            raise InvalidParameter(f"levels must be >= 1 when given, got {self.levels!r}")
        if not isinstance(self.refit_every, int) or self.refit_every < 1:
            raise InvalidParameter(f"refit_every must be an integer >= 1, got {self.refit_every!r}")
        if self.threshold_policy not in THRESHOLD_POLICIES:
            raise InvalidParameter(f"threshold_policy must be one of {THRESHOLD_POLICIES}")
        if self.threshold_mode not in THRESHOLD_MODES:
            raise InvalidParameter(f"threshold_mode must be one of {THRESHOLD_MODES}")
        if self.aggregation not in AGGREGATIONS:
            raise InvalidParameter(f"aggregation must be one of {AGGREGATIONS}")
        return self

    def replace(self, **overrides) -> "NlwtParams":
        return replace(self, **_nlwt_fields(overrides))

    def to_dict(self) -> Dict[str, Any]:
        """Effective values in short notation."""
        return {
            "L": self.L,
            "M": self.M,
            "m": self.m,
            "tau": self.tau,
            "k": self.k,
            "c": self.c,
            "wavelet": self.wavelet,
            "projector": self.projector,
            "n_components": self.n_components,
            "levels": self.levels,
            "refit_every": self.refit_every,
            "threshold_policy": self.threshold_policy,
            "threshold_mode": self.threshold_mode,
            "aggregation": self.aggregation,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base: Optional["NlwtParams"] = None) -> "NlwtParams":
        return (base or cls()).replace(**dict(data))

    @classmethod
    def for_sample_rate(cls, sample_rate_hz: float) -> "NlwtParams":
        """Tuned optimum near 360 Hz, the 1000 Hz optimum near 1 kHz, proportional scaling elsewhere."""
        if not sample_rate_hz > 0:
            raise InvalidParameter(f"sample rate must be positive, got {sample_rate_hz}")
        if abs(sample_rate_hz - 360.0) <= 20.0:
            return cls()
        if abs(sample_rate_hz - 1000.0) <= 50.0:
            return cls(block_half_width=20, search_half_width=4000, match_threshold=1.8)
        low = max(1, math.ceil(0.01 * sample_rate_hz))
        high = max(low, math.floor(0.1 * sample_rate_hz))
        block_half_width = min(high, max(low, round(10 * sample_rate_hz / 360.0)))
        search_half_width = max(1, round(1000 * sample_rate_hz / 360.0))
        tau = 1.2 if sample_rate_hz < 700.0 else 1.8
        logger.debug("scaled preset for %.1f Hz: L=%d M=%d tau=%.1f", sample_rate_hz, block_half_width, search_half_width, tau)
        return cls(block_half_width=block_half_width, search_half_width=search_half_width, match_threshold=tau)


def _nlwt_fields(data: Mapping[str, Any]) -> Dict[str, Any]:
    out = {}
    known = _field_names(NlwtParams)
    for key, value in data.items():
        name = NLWT_KEYS.get(key, key)
        if name not in known:
            raise InvalidParameter(f"unknown NLWT parameter '{key}'")
        out[name] = value
    return out


@dataclass(frozen=True)
class NlmParams:
    """
    Tunables of the NLM baseline. The patch holds L_delta = 2·patch_half_width+1
    samples; the bandwidth mu is absolute when given, else mu_factor·sigma.
    """
    patch_half_width: int = 10
    search_half_width: int = 1000
    mu: Optional[float] = None
    mu_factor: float = 1.5
    exclude_center: bool = False

    @property
    def patch_size(self) -> int:
        return 2 * self.patch_half_width + 1

    def bandwidth(self, sigma: Optional[float] = None) -> float:
        if self.mu is not None:
            return float(self.mu)
        if sigma is None or not sigma > 0:
            raise InvalidParameter("NLM bandwidth needs either mu or a positive sigma")
        return self.mu_factor * float(sigma)

    def validate(self) -> "NlmParams":
        if not isinstance(self.patch_half_width, int) or self.patch_half_width < 1:
            raise InvalidParameter(f"patch_half_width must be an integer >= 1, got {self.patch_half_width!r}")
        if not isinstance(self.search_half_width, int) or self.search_half_width < 1:
            raise InvalidParameter(f"search_half_width must be an integer >= 1, got {self.search_half_width!r}")
        if self.mu is not None and not (self.mu > 0 and math.isfinite(self.mu)):
            raise InvalidParameter(f"bandwidth mu must be > 0, got {self.mu!r}")
        if not (self.mu_factor > 0 and math.isfinite(self.mu_factor)):
            raise InvalidParameter(f"mu_factor must be > 0, got {self.mu_factor!r}")
        return self

    def replace(self, **overrides) -> "NlmParams":
        unknown = set(overrides) - _field_names(NlmParams)
        if unknown:
            raise InvalidParameter(f"unknown NLM parameter(s): {', '.join(sorted(unknown))}")
        return replace(self, **overrides)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base: Optional["NlmParams"] = None) -> "NlmParams":
        return (base or cls()).replace(**dict(data))


CONFIG_SECTIONS = ("nlwt", "nlm", "benchmark", "noise")


def load_config(config_path: Union[str, Path]) -> Dict[str, Any]:
    """Load a YAML (or JSON) configuration file."""
    try:
        with open(config_path, "r") as f:
            data = yaml.safe_load(f) or {}
    except FileNotFoundError as e:
        raise InvalidParameter(f"config file {config_path} not found") from e
    except yaml.YAMLError as e:
        raise InvalidParameter(f"error parsing config file {config_path}: {e}") from e
    if not isinstance(data, dict):
        raise InvalidParameter(f"config file {config_path} must hold a mapping at top level")
    unknown = set(data) - set(CONFIG_SECTIONS)
    if unknown:
        raise InvalidParameter(f"unknown config section(s): {', '.join(sorted(unknown))}")
    for section in CONFIG_SECTIONS:
        if data.get(section) is not None and not isinstance(data[section], dict):
            raise InvalidParameter(f"config section '{section}' must be a mapping")
    return data


def resolve_nlwt(config: Mapping[str, Any], flags: Mapping[str, Any], sample_rate_hz: Optional[float] = None) -> NlwtParams:
    """Layer preset, config-file section and non-None flags; validate the result."""
    params = NlwtParams.for_sample_rate(sample_rate_hz) if sample_rate_hz else NlwtParams()
    params = NlwtParams.from_dict(config.get("nlwt") or {}, base=params)
    params = params.replace(**{k: v for k, v in flags.items() if v is not None})
    return params.validate()


def resolve_nlm(config: Mapping[str, Any], flags: Mapping[str, Any]) -> NlmParams:
    params = NlmParams.from_dict(config.get("nlm") or {})
    params = params.replace(**{k: v for k, v in flags.items() if v is not None})
    return params.validate()
