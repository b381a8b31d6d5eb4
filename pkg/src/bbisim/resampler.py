"""Rational-ratio polyphase resampling with a Kaiser-windowed FIR lowpass.

The anti-aliasing/interpolation filter has ``2 * 10 * max(up, down) + 1``
taps, cutoff at ``min(source, target) / 2`` and a Kaiser window sized for
60 dB stopband attenuation. The filter's group delay is compensated, so
output sample ``j`` corresponds to time ``j / target_fs``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import signal as sps
from scipy import sparse

from .signals import Signal

HALF_LENGTH_FACTOR = 10
STOPBAND_ATTENUATION_DB = 60.0


@dataclass(frozen=True)
class RateSpec:
    fs_high: float = 10000.0
    fs_low: float = 14.0
    fs_est: float = 1000.0

    def __post_init__(self) -> None:
        for name in ("fs_high", "fs_low", "fs_est"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value!r}")


def rational_ratio(source_fs: float, target_fs: float, max_denominator: int = 10**6) -> tuple[int, int]:
    """Reduced ``(up, down)`` with ``up / down == target_fs / source_fs``."""
    if not source_fs > 0 or not target_fs > 0:
        raise ValueError("sampling rates must be positive")
    ratio = (Fraction(target_fs).limit_denominator(max_denominator)
             / Fraction(source_fs).limit_denominator(max_denominator))
    return ratio.numerator, ratio.denominator


@lru_cache(maxsize=128)
def lowpass_filter(up: int, down: int) -> np.ndarray:
    """Polyphase prototype filter for an ``up/down`` conversion (gain ``up``)."""
    max_rate = max(up, down)
    n_taps = 2 * HALF_LENGTH_FACTOR * max_rate + 1
    beta = sps.kaiser_beta(STOPBAND_ATTENUATION_DB)
    h = sps.firwin(n_taps, 1.0 / max_rate, window=("kaiser", beta)) * up
    h.setflags(write=False)
    return h


def _output_length(n_taps: int, n_in: int, up: int, down: int) -> int:
    return ((n_in - 1) * up + n_taps - 1) // down + 1


@lru_cache(maxsize=256)
def _padded_filter(up: int, down: int, n_in: int) -> tuple[np.ndarray, int, int]:
    h = lowpass_filter(up, down)
    half = (h.size - 1) // 2
    n_out = -(-n_in * up // down)
    pre_pad = down - half % down
    pre_remove = (half + pre_pad) // down
    post_pad = 0
    while _output_length(h.size + pre_pad + post_pad, n_in, up, down) < n_out + pre_remove:
        post_pad += 1
    padded = np.concatenate([np.zeros(pre_pad), h, np.zeros(post_pad)])
    padded.setflags(write=False)
    return padded, pre_remove, n_out


def resample_array(x: np.ndarray, up: int, down: int) -> np.ndarray:
    """Resample samples by ``up/down``; output length is ``ceil(len(x) * up / down)``.

    Samples outside ``x`` are treated as zero.
    """
    x = np.asarray(x, dtype=float)
    if up == down:
        return x.copy()
    h, pre_remove, n_out = _padded_filter(up, down, x.size)
    y = sps.upfirdn(h, x, up, down)
    return y[pre_remove:pre_remove + n_out]


def resample(x: Signal, target_fs: float) -> Signal:
    """Convert ``x`` to ``target_fs`` over the same time span."""
    if not target_fs > 0:
        raise ValueError(f"target sampling rate must be positive, got {target_fs!r}")
    if target_fs == x.fs:
        return x
    up, down = rational_ratio(x.fs, target_fs)
    return Signal(resample_array(x.samples, up, down), target_fs)


def filter_taps(source_fs: float, target_fs: float) -> int:
    """Tap count of the filter used for a given conversion (0 for identity)."""
    up, down = rational_ratio(source_fs, target_fs)
    if up == down:
        return 0
    return lowpass_filter(up, down).size


class ShiftedPulseDecimator:
    """Resample a fixed pulse placed at arbitrary sample offsets in a window.

    Resampling is linear and the filter is shift-invariant on the common
    upsampled grid, so the filtered, upsampled pulse can be computed once
    and every placement becomes a gather. ``window(start)`` equals
    ``resample_array(w, up, down)`` where ``w`` is a zero window of length
    ``n_window`` holding the pulse at index ``start``, except for pulse
    samples that would fall past the window end (those are not truncated).
    """

    def __init__(self, pulse: np.ndarray, source_fs: float, target_fs: float, n_window: int):
        self.up, self.down = rational_ratio(source_fs, target_fs)
        pulse = np.asarray(pulse, dtype=float)
        h = lowpass_filter(self.up, self.down)
        stuffed = np.zeros(pulse.size * self.up)
        stuffed[::self.up] = pulse
        self._filtered = sps.fftconvolve(stuffed, h)
        self._half = (h.size - 1) // 2
        self.n_window = n_window
        self.n_out = -(-n_window * self.up // self.down)
        self._grid = np.arange(self.n_out) * self.down + self._half

    def window(self, start: int) -> np.ndarray:
        idx = self._grid - start * self.up
        valid = (idx >= 0) & (idx < self._filtered.size)
        out = np.zeros(self.n_out)
        out[valid] = self._filtered[idx[valid]]
        return out


class ResamplingMatrix:
    """Sparse matrix form of :func:`resample_array` for a fixed input length.

    Each output sample depends on at most ``2 * half / up + 1`` inputs, so
    repeated conversions of short records are much cheaper as a sparse
    product than through the general polyphase routine.
    """

    def __init__(self, n_in: int, up: int, down: int):
        self.n_in, self.up, self.down = n_in, up, down
        self.n_out = -(-n_in * up // down)
        if up == down:
            self._matrix = sparse.identity(n_in, format="csr")
            return
        h = lowpass_filter(up, down)
        half = (h.size - 1) // 2
        j = np.arange(self.n_out)[:, None]
        first = -((half - j * down) // up)  # ceil((j*down - half) / up)
        i = first + np.arange(2 * half // up + 2)[None, :]
        offset = j * down - i * up + half
        keep = (i >= 0) & (i < n_in) & (offset >= 0) & (offset < h.size)
        rows = np.broadcast_to(j, i.shape)[keep]
        self._matrix = sparse.csr_matrix((h[offset[keep]], (rows, i[keep])),
                                         shape=(self.n_out, n_in))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self._matrix @ x
