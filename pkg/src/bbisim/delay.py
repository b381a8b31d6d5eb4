"""Time-delay estimation by bounded-lag cross-correlation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as spfft

from .signals import Signal

#: Largest lag searched, in seconds.
DEFAULT_MAX_LAG_SECONDS = 1.0


@dataclass(frozen=True)
class DelayEstimate:
    """Estimated shift of the second signal relative to the first.

    ``delay`` is positive when the second signal lags the first.
    ``peak_corr`` is the correlation coefficient at the chosen lag; it is
    0 (and ``reliable`` False) when either input has no energy.
    """

    delay: float
    lag: int
    peak_corr: float
    reliable: bool = True


def cross_correlation(x1: np.ndarray, x2: np.ndarray, max_lag: int) -> np.ndarray:
    """``c[L + max_lag] = sum_k x1[k] * x2[k + L]`` for ``L`` in ``[-max_lag, max_lag]``."""
    n = spfft.next_fast_len(max(x1.size, x2.size) + max_lag, real=True)
    circ = spfft.irfft(np.conj(spfft.rfft(x1, n)) * spfft.rfft(x2, n), n)
    return np.concatenate([circ[n - max_lag:], circ[:max_lag + 1]])


def peak_lag(corr: np.ndarray, max_lag: int) -> int:
    """Lag of the maximum of ``corr``; ties go to the smallest ``|lag|``, then the negative lag."""
    idx = np.flatnonzero(corr == corr.max())
    if idx.size == 1:
        return int(idx[0]) - max_lag
    lags = idx - max_lag
    return int(min(lags, key=lambda lag: (abs(lag), lag > 0)))


def estimate_delay(x1: Signal, x2: Signal, max_lag: int | None = None) -> DelayEstimate:
    """Shift maximizing the raw cross-correlation within ``+-max_lag`` samples.

    ``max_lag`` defaults to one second at the inputs' sampling rate.
    """
    if x1.fs != x2.fs:
        raise ValueError(f"sampling rates differ: {x1.fs} Hz vs {x2.fs} Hz")
    if max_lag is None:
        max_lag = int(round(DEFAULT_MAX_LAG_SECONDS * x1.fs))
    if max_lag < 1:
        raise ValueError(f"max_lag must be >= 1, got {max_lag}")
    a, b = x1.samples, x2.samples
    norm = float(np.sqrt(np.dot(a, a) * np.dot(b, b)))
    if norm == 0:
        return DelayEstimate(0.0, 0, 0.0, reliable=False)
    corr = cross_correlation(a, b, max_lag)
    lag = peak_lag(corr, max_lag)
    return DelayEstimate(lag / x1.fs, lag, float(corr[lag + max_lag] / norm))


def clean_reference_delay(x1: Signal, x2: Signal, max_lag: int | None = None) -> DelayEstimate:
    """Delay between the noise-free high-rate signals; same contract as :func:`estimate_delay`."""
    return estimate_delay(x1, x2, max_lag)
