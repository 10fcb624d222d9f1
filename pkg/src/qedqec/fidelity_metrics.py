"""Fidelity, log-fidelity and the median/bootstrap summaries built on them."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidArgumentError
from .qubit_core import PureState

F_CAP = 15.0
_CAP_EPS = 1e-15


def state_fidelity(ideal: PureState, actual: PureState) -> float:
    """``|<ideal|actual>|``, insensitive to global phase."""
    a, b = ideal.amplitudes, actual.amplitudes
    if a.shape != b.shape:
        raise InvalidArgumentError(f"dimension mismatch: {a.size} vs {b.size}")
    return float(min(1.0, abs(np.vdot(a, b))))


def channel_gate_fidelity(
    ideal_gate: np.ndarray,
    rho: np.ndarray,
    channel_output: np.ndarray,
    psi: PureState,
) -> float:
    """``sqrt(<psi| U^dagger E(|psi><psi|) U |psi>)`` for a channel output."""
    u = np.asarray(ideal_gate, dtype=complex)
    out = np.asarray(channel_output, dtype=complex)
    v = psi.amplitudes
    if u.shape != (v.size, v.size) or out.shape != u.shape or np.shape(rho) != u.shape:
        raise InvalidArgumentError("ideal gate, rho, output and psi dimensions disagree")
    if np.max(np.abs(np.asarray(rho) - np.outer(v, v.conj()))) > 1e-9:
        raise InvalidArgumentError("rho is not |psi><psi|")
    target = u @ v
    value = np.vdot(target, out @ target).real
    if value < -1e-12 or value > 1 + 1e-12:
        raise InvalidArgumentError(f"fidelity^2 {value} outside [0, 1]")
    return float(np.sqrt(np.clip(value, 0.0, 1.0)))


def is_capped(F: float) -> bool:
    return F >= 1.0 - _CAP_EPS


def log_fidelity(F: float) -> float:
    """``-log10(1 - F)``, capped at ``F_CAP`` once ``1 - F`` drops below 1e-15."""
    if not 0.0 <= F <= 1.0:
        raise InvalidArgumentError(f"fidelity must lie in [0, 1], got {F!r}")
    if is_capped(F):
        return F_CAP
    return float(min(F_CAP, -np.log10(1.0 - F)))


def log_fidelities(F: np.ndarray) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    if np.any((F < 0) | (F > 1)):
        raise InvalidArgumentError("fidelities must lie in [0, 1]")
    with np.errstate(divide="ignore"):
        f = -np.log10(1.0 - F)
    return np.where(F >= 1.0 - _CAP_EPS, F_CAP, np.minimum(f, F_CAP))


def median(samples: Sequence[float]) -> float:
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise InvalidArgumentError("median of an empty sample")
    return float(np.median(arr))


def _bootstrap_stats(samples, statistic, n_boot, rng, chunk=1000):
    n = samples.shape[0]
    out = []
    for start in range(0, n_boot, chunk):
        idx = rng.integers(0, n, size=(min(chunk, n_boot - start), n))
        out.append(statistic(samples[idx], axis=1))
    return np.concatenate(out, axis=0)


def bootstrap_ci(
    samples: Sequence[float],
    statistic: Callable = np.median,
    n_boot: int = 10_000,
    level: float = 0.95,
    rng: np.random.Generator | int | None = 0,
) -> tuple[float, float]:
    """Percentile bootstrap interval for ``statistic``.

    ``statistic`` must accept an ``axis`` keyword (numpy reductions do).
    """
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise InvalidArgumentError("bootstrap of an empty sample")
    if not 0 < level < 1:
        raise InvalidArgumentError(f"level must be in (0, 1), got {level}")
    if n_boot < 100:
        raise InvalidArgumentError("n_boot must be >= 100")
    rng = np.random.default_rng(rng)
    stats = _bootstrap_stats(arr, statistic, n_boot, rng)
    lo, hi = np.quantile(stats, [(1 - level) / 2, (1 + level) / 2])
    return float(lo), float(hi)


@dataclass(frozen=True)
class EmpiricalDistribution:
    cdf_x: np.ndarray
    cdf_y: np.ndarray
    bin_edges: np.ndarray
    density: np.ndarray


def empirical_distribution(samples: Sequence[float], n_bins: int = 50) -> EmpiricalDistribution:
    arr = np.sort(np.asarray(samples, dtype=float))
    if arr.size == 0:
        raise InvalidArgumentError("empty sample")
    if n_bins < 1:
        raise InvalidArgumentError("n_bins must be >= 1")
    cdf_y = np.arange(1, arr.size + 1) / arr.size
    lo, hi = arr[0], arr[-1]
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    density, edges = np.histogram(arr, bins=n_bins, range=(lo, hi), density=True)
    return EmpiricalDistribution(arr, cdf_y, edges, density)


@dataclass(frozen=True)
class SummaryStats:
    median_F: float
    ci_F: tuple[float, float]
    median_f: float
    ci_f: tuple[float, float]
    n_samples: int
    n_boot: int
    level: float

    def as_dict(self) -> dict:
        return asdict(self)


def summarize(
    F_samples: Sequence[float],
    n_boot: int = 10_000,
    level: float = 0.95,
    rng: np.random.Generator | int | None = 0,
) -> SummaryStats:
    """Median and percentile-bootstrap interval on both the F and f scales.

    Both scales are resampled with the same indices.
    """
    F = np.asarray(F_samples, dtype=float)
    if F.size == 0:
        raise InvalidArgumentError("no samples to summarize")
    if not 0 < level < 1 or n_boot < 100:
        raise InvalidArgumentError("need 0 < level < 1 and n_boot >= 100")
    f = log_fidelities(F)
    rng = np.random.default_rng(rng)
    both = np.column_stack([F, f])
    stats = _bootstrap_stats(both, np.median, n_boot, rng)
    q = [(1 - level) / 2, (1 + level) / 2]
    ci_F = tuple(float(v) for v in np.quantile(stats[:, 0], q))
    ci_f = tuple(float(v) for v in np.quantile(stats[:, 1], q))
    return SummaryStats(
        median_F=median(F),
        ci_F=ci_F,
        median_f=median(f),
        ci_f=ci_f,
        n_samples=int(F.size),
        n_boot=n_boot,
        level=level,
    )
