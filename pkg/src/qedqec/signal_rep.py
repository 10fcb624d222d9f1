"""Tonal signal embedding of qubit states and additive white Gaussian noise.

A basis state ``|x>`` of ``n`` qubits is carried by the complex tone

    phi_x(t) = exp(i * sum_k (-1)**x_k * omega_k * t),   omega_k = 2**k * omega0,

so a state is the superposition ``sum_x <x|psi> phi_x(t)``.  Tones are
orthonormal under the time average over ``T`` (a whole number of base
periods), which is how a sampled signal is projected back to amplitudes.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import DegenerateError, InvalidArgumentError
from .qubit_core import PureState

DEFAULT_OMEGA0 = 2 * np.pi * 1000.0
DEFAULT_SAMPLE_RATE_FACTOR = 16.0


@dataclass(frozen=True)
class SignalConfig:
    """Timing parameters of the tonal representation.

    ``omega0`` is in rad/s, ``duration_T`` in seconds and ``sample_rate`` in
    samples/s.
    """

    n_qubits: int
    omega0: float = DEFAULT_OMEGA0
    duration_T: float | None = None
    sample_rate: float | None = None

    def __post_init__(self):
        if self.n_qubits < 1:
            raise InvalidArgumentError("n_qubits must be >= 1")
        if not self.omega0 > 0:
            raise InvalidArgumentError("omega0 must be positive")
        if self.duration_T is None:
            object.__setattr__(self, "duration_T", 2 * np.pi / self.omega0)
        if self.sample_rate is None:
            object.__setattr__(
                self, "sample_rate", DEFAULT_SAMPLE_RATE_FACTOR * self.max_tone_hz
            )
        periods = self.duration_T * self.omega0 / (2 * np.pi)
        if periods < 1 - 1e-9 or abs(periods - round(periods)) > 1e-9:
            raise InvalidArgumentError(
                f"duration_T must be a whole number of base periods (got {periods:.12g})"
            )
        if not self.sample_rate > 4 * self.max_tone_hz:
            raise InvalidArgumentError(
                f"sample_rate {self.sample_rate} Hz must exceed 4x the highest tone "
                f"({self.max_tone_hz} Hz)"
            )

    @classmethod
    def default(
        cls,
        n_qubits: int,
        omega0_hz: float = 1000.0,
        duration_periods: int = 1,
        sample_rate_factor: float = DEFAULT_SAMPLE_RATE_FACTOR,
    ) -> "SignalConfig":
        omega0 = 2 * np.pi * omega0_hz
        highest = (2**n_qubits - 1) * omega0_hz
        return cls(
            n_qubits=n_qubits,
            omega0=omega0,
            duration_T=duration_periods / omega0_hz,
            sample_rate=sample_rate_factor * highest,
        )

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def max_tone_hz(self) -> float:
        return (2**self.n_qubits - 1) * self.omega0 / (2 * np.pi)

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_T * self.sample_rate))

    @cached_property
    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.sample_rate

    @cached_property
    def tone_frequencies(self) -> np.ndarray:
        """Angular frequency of ``phi_x`` for every basis index ``x``."""
        x = np.arange(self.dim)
        signs = 1 - 2 * ((x[:, None] >> np.arange(self.n_qubits)) & 1)
        return signs @ (self.omega0 * 2.0 ** np.arange(self.n_qubits))

    @cached_property
    def tones(self) -> np.ndarray:
        """``(dim, n_samples)`` matrix whose row ``x`` samples ``phi_x``."""
        tones = np.exp(1j * np.outer(self.tone_frequencies, self.times))
        tones.flags.writeable = False
        return tones


@dataclass(frozen=True)
class Signal:
    samples: np.ndarray
    config: SignalConfig

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex).reshape(-1)
        if samples.size != self.config.n_samples:
            raise InvalidArgumentError(
                f"expected {self.config.n_samples} samples, got {samples.size}"
            )
        object.__setattr__(self, "samples", samples)

    def mean_power(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))


@dataclass(frozen=True)
class AwgnParams:
    sigma2: float
    injection_points: int = 1

    def __post_init__(self):
        if self.sigma2 < 0:
            raise InvalidArgumentError("sigma2 must be non-negative")
        if self.injection_points < 0:
            raise InvalidArgumentError("injection_points must be non-negative")


def basis_tone(x: int, config: SignalConfig) -> Signal:
    if not 0 <= x < config.dim:
        raise InvalidArgumentError(f"basis index {x} out of range for {config.n_qubits} qubits")
    return Signal(config.tones[x].copy(), config)


def synthesize_amplitudes(amplitudes: np.ndarray, config: SignalConfig) -> np.ndarray:
    """Samples of ``sum_x a_x phi_x(t)`` for a raw (possibly unnormalized) vector."""
    amplitudes = np.asarray(amplitudes, dtype=complex)
    if amplitudes.shape[-1] != config.dim:
        raise InvalidArgumentError(
            f"{amplitudes.shape[-1]} amplitudes do not match {config.n_qubits} qubits"
        )
    return amplitudes @ config.tones


def synthesize(state: PureState, config: SignalConfig) -> Signal:
    if state.n_qubits != config.n_qubits:
        raise InvalidArgumentError(
            f"state has {state.n_qubits} qubits, config has {config.n_qubits}"
        )
    return Signal(synthesize_amplitudes(state.amplitudes, config), config)


def project_samples(samples: np.ndarray, config: SignalConfig) -> np.ndarray:
    """Rectangle-rule time average of ``conj(phi_x) * s`` for every ``x``."""
    return np.asarray(samples) @ config.tones.conj().T / config.n_samples


def project(signal: Signal, config: SignalConfig | None = None):
    """Return ``(amplitudes, residual_power)`` of a signal.

    ``residual_power`` is the mean power left outside the tonal subspace,
    i.e. what a narrowband filter would reject.
    """
    config = signal.config if config is None else config
    if config != signal.config:
        raise InvalidArgumentError("signal was sampled with a different config")
    amps = project_samples(signal.samples, config)
    residual = signal.mean_power() - float(np.sum(np.abs(amps) ** 2))
    return amps, max(residual, 0.0)


def awgn_samples(shape, sigma2: float, sample_rate: float, rng: np.random.Generator) -> np.ndarray:
    """Complex white noise with spectral density ``sigma2`` on a sample grid.

    Each sample has variance ``sigma2 * sample_rate`` split evenly between
    the real and imaginary parts.
    """
    if sigma2 < 0:
        raise InvalidArgumentError("sigma2 must be non-negative")
    scale = np.sqrt(sigma2 * sample_rate / 2)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def add_awgn(signal: Signal, sigma2: float, rng: np.random.Generator) -> Signal:
    if sigma2 < 0:
        raise InvalidArgumentError("sigma2 must be non-negative")
    if sigma2 == 0:
        return signal
    noise = awgn_samples(signal.samples.shape, sigma2, signal.config.sample_rate, rng)
    return Signal(signal.samples + noise, signal.config)


def state_from_noisy_signal(signal: Signal, config: SignalConfig | None = None):
    """Project onto the tonal subspace and normalize.

    Returns ``(state, leakage)`` where ``leakage`` is the fraction of signal
    power outside the tonal subspace.
    """
    amps, residual = project(signal, config)
    in_band = float(np.sum(np.abs(amps) ** 2))
    if np.sqrt(in_band) < 1e-12:
        raise DegenerateError("signal has no power in the tonal subspace")
    return PureState(amps / np.sqrt(in_band)), residual / (residual + in_band)


def write_signal_csv(signal: Signal, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_seconds", "re", "im"])
        for t, s in zip(signal.config.times, signal.samples):
            writer.writerow([repr(float(t)), repr(float(s.real)), repr(float(s.imag))])
