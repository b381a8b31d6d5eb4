"""Pulse prototypes built from one Gamma and one Gaussian kernel.

Each of the four Dawber pulse classes is described by two parameter
triples (amplitude, mode, standard deviation). Kernels are evaluated in
seconds, so a prototype has the same shape at every sampling rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .signals import Signal

#: Kernel support used when synthesizing a single beat, in seconds.
DEFAULT_PULSE_DURATION = 2.0


class KernelKind(str, Enum):
    GAMMA = "gamma"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class KernelParams:
    """Amplitude (a.u.), mode (s) and standard deviation (s) of one kernel."""

    kind: KernelKind
    amplitude: float
    mode: float
    std: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", KernelKind(self.kind))
        for name in ("amplitude", "mode", "std"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{self.kind.value} kernel {name} must be positive, got {value!r}")
        if self.kind is KernelKind.GAMMA and not (math.isfinite(self.rate) and self.rate > 0):
            raise ValueError(f"degenerate gamma kernel parameters: {self}")

    @property
    def rate(self) -> float:
        """Rate of the Gamma distribution with this mode and standard deviation (1/s).

        From mode = (shape - 1) / rate and variance = shape / rate**2.
        """
        m, s = self.mode, self.std
        return (m + math.sqrt(m * m + 4.0 * s * s)) / (2.0 * s * s)


@dataclass(frozen=True)
class PulsePrototype:
    """One beat: a Gamma kernel (systolic wave) plus a Gaussian kernel (diastolic wave)."""

    dawber_class: int
    gamma: KernelParams
    gaussian: KernelParams

    def __post_init__(self) -> None:
        if self.dawber_class not in (1, 2, 3, 4):
            raise ValueError(f"Dawber class must be 1..4, got {self.dawber_class!r}")
        if self.gamma.kind is not KernelKind.GAMMA:
            raise ValueError("first kernel of a prototype must be a gamma kernel")
        if self.gaussian.kind is not KernelKind.GAUSSIAN:
            raise ValueError("second kernel of a prototype must be a gaussian kernel")

    @property
    def kernel_distance(self) -> float:
        """Distance between the two kernel modes (s)."""
        return abs(self.gamma.mode - self.gaussian.mode)

    def evaluate(self, t) -> np.ndarray:
        return eval_gamma_kernel(self.gamma, t) + eval_gaussian_kernel(self.gaussian, t)


# amplitude, mode, std for (gamma, gaussian) per class
_DAWBER_TABLE = {
    1: ((0.9648, 0.1646, 0.0712), (0.5466, 0.4278, 0.0924)),
    2: ((0.9623, 0.1836, 0.0839), (0.4162, 0.4186, 0.0819)),
    3: ((0.9670, 0.2106, 0.1083), (0.2563, 0.4290, 0.0672)),
    4: ((0.5384, 0.2162, 0.0924), (0.5384, 0.3130, 0.1321)),
}

DAWBER_CLASSES = (1, 2, 3, 4)


def dawber_prototype(dawber_class: int) -> PulsePrototype:
    """Default prototype for one Dawber pulse class."""
    try:
        gamma, gaussian = _DAWBER_TABLE[dawber_class]
    except KeyError:
        raise ValueError(f"Dawber class must be 1..4, got {dawber_class!r}") from None
    return PulsePrototype(
        dawber_class,
        KernelParams(KernelKind.GAMMA, *gamma),
        KernelParams(KernelKind.GAUSSIAN, *gaussian),
    )


def eval_gamma_kernel(p: KernelParams, t):
    """Evaluate the Gamma kernel ``a m^(-mB) t^(mB) exp((m - t) B)`` at times ``t >= 0``.

    ``B`` is :attr:`KernelParams.rate`. The kernel peaks at ``t = m`` with
    value ``a`` and is zero at ``t = 0``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("gamma kernel is only defined for t >= 0")
    rate = p.rate
    shape = p.mode * rate
    with np.errstate(divide="ignore"):
        log_value = shape * np.log(t / p.mode) + (p.mode - t) * rate
    out = p.amplitude * np.exp(log_value)
    return out if out.ndim else float(out)


def eval_gaussian_kernel(p: KernelParams, t):
    """Evaluate ``a exp(-(t - m)^2 / (2 sigma^2))``."""
    t = np.asarray(t, dtype=float)
    z = (t - p.mode) / p.std
    out = p.amplitude * np.exp(-0.5 * z * z)
    return out if out.ndim else float(out)


def synthesize_pulse(
    proto: PulsePrototype, fs: float, duration: float = DEFAULT_PULSE_DURATION
) -> Signal:
    """Sample a prototype beat at ``fs`` over ``[0, duration)``."""
    if not fs > 0:
        raise ValueError(f"sampling rate must be positive, got {fs!r}")
    if not duration > 0:
        raise ValueError(f"duration must be positive, got {duration!r}")
    n = int(round(duration * fs))
    if n < 1:
        raise ValueError("duration * fs rounds to zero samples")
    return Signal(proto.evaluate(np.arange(n) / fs), fs)


@dataclass(frozen=True)
class VariationSpec:
    """Relative standard deviation of random beat-to-beat kernel changes.

    ``applies_to`` selects which of amplitude, width (``std``) and
    position (``mode``) are varied.
    """

    relative_std: float = 0.05
    applies_to: frozenset = frozenset({"amplitude", "width", "position"})

    def __post_init__(self) -> None:
        if not (math.isfinite(self.relative_std) and self.relative_std >= 0):
            raise ValueError(f"relative_std must be >= 0, got {self.relative_std!r}")
        applies_to = frozenset(self.applies_to)
        unknown = applies_to - {"amplitude", "width", "position"}
        if unknown:
            raise ValueError(f"unknown variation targets: {sorted(unknown)}")
        object.__setattr__(self, "applies_to", applies_to)


def _positive_factor(rng: np.random.Generator, rel_std: float) -> float:
    while True:
        factor = 1.0 + rel_std * rng.standard_normal()
        if factor > 0:
            return factor


def _perturb_kernel(
    p: KernelParams, spec: VariationSpec, distance: float, rng: np.random.Generator
) -> KernelParams:
    # Draw order is fixed (amplitude, width, position) so streams stay reproducible.
    amplitude, std, mode = p.amplitude, p.std, p.mode
    if "amplitude" in spec.applies_to:
        amplitude *= _positive_factor(rng, spec.relative_std)
    if "width" in spec.applies_to:
        std *= _positive_factor(rng, spec.relative_std)
    if "position" in spec.applies_to:
        while True:
            shifted = p.mode + spec.relative_std * rng.standard_normal() * distance
            if shifted > 0:
                mode = shifted
                break
    return replace(p, amplitude=amplitude, mode=mode, std=std)


def perturb_prototype(
    proto: PulsePrototype, spec: VariationSpec, rng: np.random.Generator
) -> PulsePrototype:
    """Randomly vary the kernel parameters of a prototype.

    Amplitude and width are scaled by ``1 + eps`` with
    ``eps ~ N(0, relative_std)``. Each mode is shifted by ``eps' * d``
    where ``d`` is the distance to the neighbouring kernel's mode, so later
    kernels are not varied more than earlier ones. Non-positive outcomes
    are redrawn.
    """
    if spec.relative_std == 0:
        return proto
    distance = proto.kernel_distance
    return replace(
        proto,
        gamma=_perturb_kernel(proto.gamma, spec, distance, rng),
        gaussian=_perturb_kernel(proto.gaussian, spec, distance, rng),
    )
