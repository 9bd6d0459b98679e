"""Shared fixtures for the ecg_nlwt test suite."""

import os
from pathlib import Path

import numpy as np
import pytest

from ecg_nlwt.config import NlmParams, NlwtParams
from ecg_nlwt.signal_model import NoiseSpec, Signal, add_awgn, synth_ecg


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def synth():
    """Ten beats at 360 Hz."""
    return synth_ecg(10, 360.0, seed=3)


@pytest.fixture
def synth_30():
    return synth_ecg(30, 360.0)


@pytest.fixture
def noisy_synth(synth):
    noisy, sigma = add_awgn(synth, NoiseSpec(10.0, 1234))
    return noisy, sigma


@pytest.fixture
def small_nlwt():
    """Fast NLWT settings for short signals."""
    return NlwtParams(search_half_width=200)


@pytest.fixture
def small_nlm():
    return NlmParams(patch_half_width=5, search_half_width=150)


@pytest.fixture
def make_signal():
    def _make(values, fs=360.0, label="x"):
        return Signal(np.asarray(values, dtype=np.float64), fs, label)
    return _make


@pytest.fixture
def record_csv(tmp_path):
    """Write a small two-lead record file and return its path."""
    def _write(text: str, name: str = "rec.csv") -> Path:
        path = tmp_path / name
        path.write_text(text)
        return path
    return _write


@pytest.fixture
def records_dir():
    root = os.environ.get("ECG_RECORDS_DIR")
    if not root:
        pytest.skip("ECG_RECORDS_DIR is not set")
    return Path(root)
