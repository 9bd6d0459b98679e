"""
ECG denoising by nonlocal wavelet transform shrinkage, with a nonlocal means
baseline and a reproducible benchmark harness.
"""

from .config import NlmParams, NlwtParams, load_config, resolve_nlm, resolve_nlwt
from .errors import EcgDenoiseError
from .io_bench import (
    SCHEMA_VERSION,
    BenchmarkPlan,
    RecordFile,
    derive_seed,
    read_csv,
    read_report,
    run_benchmark,
    summarize,
    write_csv,
    write_report,
)
from .nlm import denoise_nlm, nlm_weight
from .nlwt import aggregate, denoise_nlwt, shrink_sdm, visu_coeff
from .signal_model import (
    DenoiseReport,
    NoiseSpec,
    Signal,
    add_awgn,
    estimate_sigma,
    mse,
    normalize,
    prd,
    score,
    snr_improvement,
    synth_ecg,
)
from .tuning import TuningRow, default_grid, tune

__version__ = "1.0.0"
