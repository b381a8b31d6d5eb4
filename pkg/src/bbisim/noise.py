"""Pink and white measurement noise scaled to a target SNR."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .signals import Signal


class NoiseKind(str, Enum):
    PINK = "pink"
    WHITE = "white"


@dataclass(frozen=True)
class NoiseSpec:
    kind: NoiseKind = NoiseKind.PINK
    snr_db: float = 30.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if not math.isfinite(self.snr_db):
            raise ValueError(f"snr_db must be finite, got {self.snr_db!r}")

    @property
    def snr_linear(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)


def symbol_energy(x) -> float:
    """Mean power ``sum(x**2) / N`` of a record, zeros included."""
    samples = x.samples if isinstance(x, Signal) else np.asarray(x, dtype=float)
    if samples.size == 0:
        raise ValueError("symbol energy of an empty signal is undefined")
    return float(np.dot(samples, samples) / samples.size)


def pink_noise(n: int, rng: np.random.Generator) -> np.ndarray:
    """Zero-mean, unit-variance noise with a 1/f power spectrum.

    White Gaussian samples are transformed, every positive-frequency bin
    ``k`` is divided by ``sqrt(k)``, the DC bin is zeroed, and the inverse
    transform is normalized to exactly zero mean and unit (population)
    standard deviation.
    """
    if n < 2:
        raise ValueError(f"pink noise needs at least 2 samples, got {n}")
    spectrum = np.fft.rfft(rng.standard_normal(n))
    spectrum[0] = 0.0
    spectrum[1:] /= np.sqrt(np.arange(1, spectrum.size))
    noise = np.fft.irfft(spectrum, n)
    noise -= noise.mean()
    std = noise.std()
    if std == 0:
        # n == 2 with a zero Nyquist draw; measure-zero
        return pink_noise(n, rng)
    return noise / std


def white_noise(n: int, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. standard normal samples."""
    if n < 1:
        raise ValueError(f"white noise needs at least 1 sample, got {n}")
    return rng.standard_normal(n)


_GENERATORS = {NoiseKind.PINK: pink_noise, NoiseKind.WHITE: white_noise}


def unit_noise(kind: NoiseKind, n: int, rng: np.random.Generator) -> np.ndarray:
    return _GENERATORS[NoiseKind(kind)](n, rng)


def noise_scale(energy: float, snr_db: float) -> float:
    """Noise standard deviation giving ``energy / noise_power == 10**(snr_db/10)``."""
    return math.sqrt(energy / 10.0 ** (snr_db / 10.0))


def add_noise(x: Signal, spec: NoiseSpec, rng: np.random.Generator) -> Signal:
    """Return ``x + sqrt(E_S / SNR) * u`` with ``u`` unit-variance noise of ``spec.kind``."""
    scale = noise_scale(symbol_energy(x), spec.snr_db)
    u = unit_noise(spec.kind, len(x), rng)
    return Signal(x.samples + scale * u, x.fs)
