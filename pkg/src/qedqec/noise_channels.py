"""Operator-sum channels, the depolarizing channel and its AWGN equivalent."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import InvalidArgumentError
from .qubit_core import (
    PAULI_LETTERS,
    PauliString,
    PureState,
    num_qubits_for_dim,
    pauli_string_to_operator,
)

TP_TOL = 1e-9


@dataclass(frozen=True)
class KrausChannel:
    """Trace-preserving channel ``rho -> sum_k E_k rho E_k^dagger``."""

    kraus_ops: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(np.asarray(e, dtype=complex) for e in self.kraus_ops)
        if not ops:
            raise InvalidArgumentError("a channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        num_qubits_for_dim(dim)
        if any(e.shape != (dim, dim) for e in ops):
            raise InvalidArgumentError("Kraus operators have inconsistent shapes")
        completeness = sum(e.conj().T @ e for e in ops)
        if np.max(np.abs(completeness - np.eye(dim))) > TP_TOL:
            raise InvalidArgumentError("Kraus operators are not trace preserving")
        object.__setattr__(self, "kraus_ops", ops)

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]


@dataclass(frozen=True)
class PauliChannelSpec:
    """Probabilistic mixture of Pauli words, ``rho -> sum_P w_P P rho P``."""

    n_qubits: int
    probabilities: Mapping[PauliString, float]

    def __post_init__(self):
        weights = np.array(list(self.probabilities.values()), dtype=float)
        if np.any(weights < 0) or abs(weights.sum() - 1) > 1e-9:
            raise InvalidArgumentError("Pauli channel weights must be non-negative and sum to 1")
        if any(p.n_qubits != self.n_qubits or p.phase != 1 for p in self.probabilities):
            raise InvalidArgumentError("Pauli channel keys must be phase-free words on n_qubits")

    def to_kraus(self) -> KrausChannel:
        return KrausChannel(
            tuple(np.sqrt(w) * pauli_string_to_operator(p) for p, w in self.probabilities.items() if w > 0)
        )


def all_pauli_words(n_qubits: int):
    """Every phase-free Pauli word on ``n_qubits``, identity first."""
    for letters in itertools.product(PAULI_LETTERS, repeat=n_qubits):
        yield PauliString(tuple(reversed(letters)))


def apply_channel(ch: KrausChannel, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (ch.dim, ch.dim):
        raise InvalidArgumentError(f"rho shape {rho.shape} does not match channel dim {ch.dim}")
    return sum(e @ rho @ e.conj().T for e in ch.kraus_ops)


def depolarizing_pauli_spec(n_qubits: int, p: float) -> PauliChannelSpec:
    if not 0 <= p <= 1:
        raise InvalidArgumentError(f"depolarizing probability must be in [0, 1], got {p}")
    n_words = 4**n_qubits
    probs = {w: p / n_words for w in all_pauli_words(n_qubits)}
    probs[PauliString.identity(n_qubits)] += 1 - p
    return PauliChannelSpec(n_qubits, probs)


def depolarizing_channel(n_qubits: int, p: float) -> KrausChannel:
    """``(1 - p) rho + p I / N`` written over all ``4**n`` Pauli words.

    The identity word carries weight ``1 - p + p / 4**n``; every other word
    carries ``p / 4**n``.
    """
    return depolarizing_pauli_spec(n_qubits, p).to_kraus()


def pauli_decompose(op: np.ndarray) -> dict[PauliString, complex]:
    """Coefficients ``c_P = Tr(P^dagger op) / 2**n`` with ``op = sum_P c_P P``."""
    op = np.asarray(op, dtype=complex)
    n = num_qubits_for_dim(op.shape[0])
    return {
        w: complex(np.trace(pauli_string_to_operator(w).conj().T @ op) / 2**n)
        for w in all_pauli_words(n)
    }


def pauli_recompose(coeffs: Mapping[PauliString, complex]) -> np.ndarray:
    return sum(c * pauli_string_to_operator(w) for w, c in coeffs.items())


def awgn_equivalent_p(sigma2: float, T: float, n_qubits: int) -> float:
    """Depolarizing probability induced by projected white noise.

    With ``r = sigma2 / T`` and ``N = 2**n`` the projected channel is
    ``(rho + r I) / (1 + N r)``, i.e. ``p = N r / (1 + N r)``.
    """
    if sigma2 < 0 or not T > 0:
        raise InvalidArgumentError("need sigma2 >= 0 and T > 0")
    nr = 2**n_qubits * sigma2 / T
    return nr / (1 + nr)


def sigma2_for_p(p: float, T: float, n_qubits: int) -> float:
    """Inverse of :func:`awgn_equivalent_p`."""
    if not 0 <= p < 1:
        raise InvalidArgumentError("p must be in [0, 1)")
    return p / (1 - p) * T / 2**n_qubits


def awgn_equivalent_channel(sigma2: float, T: float, n_qubits: int):
    p = awgn_equivalent_p(sigma2, T, n_qubits)
    return depolarizing_channel(n_qubits, p), p


def awgn_channel_output(rho: np.ndarray, sigma2: float, T: float) -> np.ndarray:
    """Closed-form projected-noise channel ``(rho + r I) / (1 + N r)``."""
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    r = sigma2 / T
    return (rho + r * np.eye(dim)) / (1 + dim * r)


def estimate_channel_mc(
    trajectory_source: Callable[[np.random.Generator], np.ndarray | PureState],
    runs: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Estimate ``E(rho)`` from noisy projected vectors.

    Unnormalized outer products are averaged and the mean is then divided by
    its trace, which matches the expectation ``|psi><psi| + r I`` exactly
    before normalization.
    """
    if runs < 1:
        raise InvalidArgumentError("runs must be >= 1")
    acc = None
    for _ in range(runs):
        v = trajectory_source(rng)
        v = v.amplitudes if isinstance(v, PureState) else np.asarray(v, dtype=complex)
        outer = np.outer(v, v.conj())
        acc = outer if acc is None else acc + outer
    return acc / np.trace(acc).real


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(np.asarray(a) - np.asarray(b)))))


def fit_depolarizing_p(rho_out: np.ndarray, rho_in: np.ndarray) -> float:
    """Least-squares ``p`` for ``rho_out - I/N = (1 - p)(rho_in - I/N)``."""
    dim = rho_in.shape[0]
    a = np.asarray(rho_out) - np.eye(dim) / dim
    b = np.asarray(rho_in) - np.eye(dim) / dim
    denom = np.vdot(b, b).real
    if denom < 1e-15:
        raise InvalidArgumentError("input state is maximally mixed; p is not identifiable")
    return 1.0 - np.vdot(b, a).real / denom
