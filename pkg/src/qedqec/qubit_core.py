"""Dense multi-qubit linear algebra.

Conventions used everywhere in the package:

* qubit ``k`` is bit ``k`` of a computational basis index (little endian),
  so ``|00001>`` has qubit 0 set;
* operators are plain ``numpy`` complex arrays of shape ``(2**n, 2**n)``;
* randomness always comes from an injected ``numpy.random.Generator``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateError, InvalidArgumentError

NORM_TOL = 1e-9
UNITARY_TOL = 1e-10

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_PAULIS = (_I, _X, _Y, _Z)
PAULI_LETTERS = "IXYZ"

# sigma_a sigma_b = phase * sigma_c, keyed by (a, b)
_PAULI_PRODUCT: dict[tuple[str, str], tuple[complex, str]] = {
    **{("I", c): (1, c) for c in PAULI_LETTERS},
    **{(c, "I"): (1, c) for c in PAULI_LETTERS},
    **{(c, c): (1, "I") for c in PAULI_LETTERS},
    ("X", "Y"): (1j, "Z"), ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"), ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"), ("X", "Z"): (-1j, "Y"),
}


def pauli_matrix(index: int) -> np.ndarray:
    """Return sigma_index for index in 0..3 (I, X, Y, Z)."""
    if index not in (0, 1, 2, 3):
        raise InvalidArgumentError(f"Pauli index must be 0..3, got {index!r}")
    return _PAULIS[index].copy()


def is_unitary(op: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    op = np.asarray(op)
    return bool(np.max(np.abs(op.conj().T @ op - np.eye(op.shape[0]))) <= tol)


def num_qubits_for_dim(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise InvalidArgumentError(f"dimension {dim} is not a power of 2")
    return n


@dataclass(frozen=True)
class PureState:
    """Amplitude vector over ``2**n`` basis states.

    Construction checks the norm unless ``check=False``; the unchecked form
    is used for unnormalized intermediates such as ``|psi> + |nu>``.
    """

    amplitudes: np.ndarray
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        num_qubits_for_dim(amps.size)
        if self.check and abs(np.vdot(amps, amps).real - 1.0) > NORM_TOL:
            raise InvalidArgumentError(
                f"state is not normalized (norm^2 = {np.vdot(amps, amps).real:.12g})"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self) -> int:
        return num_qubits_for_dim(self.amplitudes.size)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "PureState":
        nrm = self.norm()
        if nrm < 1e-12:
            raise DegenerateError("cannot normalize a zero vector")
        return PureState(self.amplitudes / nrm)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "PureState":
        if not 0 <= index < 2**n_qubits:
            raise InvalidArgumentError(f"basis index {index} out of range for {n_qubits} qubits")
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    @classmethod
    def from_vector(cls, vec: Iterable[complex], normalize: bool = True) -> "PureState":
        amps = np.asarray(list(vec) if not isinstance(vec, np.ndarray) else vec, dtype=complex)
        if normalize:
            nrm = np.linalg.norm(amps)
            if nrm < 1e-12:
                raise DegenerateError("cannot normalize a zero vector")
            amps = amps / nrm
        return cls(amps)

    def __len__(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli word with a phase in {+1, -1, +i, -i}.

    ``letters[k]`` acts on qubit ``k``.  Text labels are written in tensor
    order, most significant qubit first, so ``from_label("XI")`` puts X on
    qubit 1.
    """

    letters: tuple[str, ...]
    phase: complex = 1

    def __post_init__(self):
        letters = tuple(self.letters)
        if any(c not in PAULI_LETTERS for c in letters):
            raise InvalidArgumentError(f"invalid Pauli letters {letters!r}")
        phase = complex(self.phase)
        if phase not in (1, -1, 1j, -1j):
            raise InvalidArgumentError(f"invalid Pauli phase {phase!r}")
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "phase", phase)

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(("I",) * n_qubits)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse ``"-iXIZ"``-style labels (tensor order, qubit 0 rightmost)."""
        label = label.strip()
        phase: complex = 1
        for prefix, ph in (("-i", -1j), ("+i", 1j), ("i", 1j), ("-", -1), ("+", 1)):
            if label.startswith(prefix):
                phase, label = ph, label[len(prefix):]
                break
        return cls(tuple(reversed(label)), phase)

    @classmethod
    def from_terms(cls, n_qubits: int, terms: str | dict[int, str]) -> "PauliString":
        """Build from sparse terms, e.g. ``from_terms(5, "Z1 X2 X3 Z4")``."""
        if isinstance(terms, str):
            terms = {int(t[1:]): t[0] for t in terms.split()}
        letters = ["I"] * n_qubits
        for q, c in terms.items():
            if not 0 <= q < n_qubits:
                raise InvalidArgumentError(f"qubit {q} out of range")
            letters[q] = c
        return cls(tuple(letters))

    @property
    def label(self) -> str:
        prefix = {1: "", -1: "-", 1j: "i", -1j: "-i"}[self.phase]
        return prefix + "".join(reversed(self.letters))

    def sparse_label(self) -> str:
        """Qubit-indexed form such as ``"Y1"``; ``"I"`` for the identity word."""
        body = " ".join(f"{c}{q}" for q, c in enumerate(self.letters) if c != "I")
        return body or "I"

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.letters)

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n_qubits != other.n_qubits:
            raise InvalidArgumentError("Pauli strings act on different qubit counts")
        phase = self.phase * other.phase
        letters = []
        for a, b in zip(self.letters, other.letters):
            ph, c = _PAULI_PRODUCT[(a, b)]
            phase *= ph
            letters.append(c)
        return PauliString(tuple(letters), phase)

    def commutes_with(self, other: "PauliString") -> bool:
        anti = sum(
            a != "I" and b != "I" and a != b for a, b in zip(self.letters, other.letters)
        )
        return anti % 2 == 0

    def __str__(self) -> str:
        return self.label


def pauli_string_to_operator(p: PauliString) -> np.ndarray:
    mats = [_PAULIS[PAULI_LETTERS.index(c)] for c in reversed(p.letters)]
    return p.phase * reduce(np.kron, mats, np.ones((1, 1), dtype=complex))


def _as_vector(state) -> np.ndarray:
    return state.amplitudes if isinstance(state, PureState) else np.asarray(state, dtype=complex)


def apply_matrix(op: np.ndarray, vec: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """Apply ``op`` to the ``targets`` factors of an amplitude vector.

    ``targets[0]`` is the least significant bit of ``op``'s own index.
    Works on raw arrays; see :func:`apply_to_qubits` for the checked form.
    """
    vec = np.asarray(vec, dtype=complex)
    n = num_qubits_for_dim(vec.size)
    m = len(targets)
    if op.shape != (2**m, 2**m):
        raise InvalidArgumentError(
            f"operator of shape {op.shape} does not match {m} target qubit(s)"
        )
    if len(set(targets)) != m:
        raise InvalidArgumentError(f"duplicate targets in {list(targets)}")
    if any(not 0 <= t < n for t in targets):
        raise InvalidArgumentError(f"targets {list(targets)} out of range for {n} qubits")
    psi = vec.reshape((2,) * n)
    # tensor axis j holds qubit n-1-j; op axes run from targets[m-1] down to targets[0]
    axes = [n - 1 - t for t in reversed(targets)]
    out = np.tensordot(op.reshape((2,) * (2 * m)), psi, axes=(list(range(m, 2 * m)), axes))
    out = np.moveaxis(out, list(range(m)), axes)
    return out.reshape(-1)


def apply_to_qubits(op: np.ndarray, state: PureState, targets: Sequence[int]) -> PureState:
    """Apply ``op`` to ``targets`` of ``state``; no renormalization."""
    return PureState(apply_matrix(np.asarray(op, dtype=complex), state.amplitudes, targets), check=False)


def inner_product(a: PureState, b: PureState) -> complex:
    va, vb = _as_vector(a), _as_vector(b)
    if va.shape != vb.shape:
        raise InvalidArgumentError(f"dimension mismatch: {va.size} vs {vb.size}")
    return complex(np.vdot(va, vb))


def haar_random_state(n_qubits: int, rng: np.random.Generator) -> PureState:
    """Haar-uniform pure state via a normalized complex Gaussian vector."""
    if n_qubits < 1:
        raise InvalidArgumentError("n_qubits must be >= 1")
    dim = 2**n_qubits
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(z / np.linalg.norm(z))


def haar_random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary from the QR decomposition of a Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _realize(vec: np.ndarray, projected: np.ndarray, p1: float, rng: np.random.Generator):
    outcome = int(rng.random() < p1)
    branch = projected if outcome else vec - projected
    prob = p1 if outcome else 1.0 - p1
    if prob < 1e-12:
        raise DegenerateError(f"realized measurement branch has probability {prob:.3g}")
    return outcome, branch / np.sqrt(prob), prob


def measure_projector(state: PureState, P: np.ndarray, rng: np.random.Generator, *, validate: bool = True):
    """Born-rule measurement of the two-outcome POVM {P, I - P}.

    Returns ``(outcome, post_state, probability)`` where outcome 1 means the
    ``P`` branch and ``probability`` is that of the realized outcome.  The
    probability is computed relative to the input norm, so a slightly
    unnormalized input behaves like its normalized version.  ``validate``
    may be switched off for projectors already known to be valid.
    """
    P = np.asarray(P, dtype=complex)
    vec = _as_vector(state)
    if P.shape != (vec.size, vec.size):
        raise InvalidArgumentError(f"projector shape {P.shape} does not match state dim {vec.size}")
    if validate and (np.max(np.abs(P @ P - P)) > 1e-10 or np.max(np.abs(P - P.conj().T)) > 1e-10):
        raise InvalidArgumentError("operator is not an orthogonal projector")
    nrm2 = np.vdot(vec, vec).real
    if nrm2 < 1e-24:
        raise DegenerateError("cannot measure a zero vector")
    vec = vec / np.sqrt(nrm2)
    projected = P @ vec
    p1 = float(np.clip(np.vdot(projected, projected).real, 0.0, 1.0))
    outcome, post, prob = _realize(vec, projected, p1, rng)
    return outcome, PureState(post / np.linalg.norm(post)), prob


def measure_qubit(state: PureState, qubit: int, rng: np.random.Generator):
    """Computational-basis measurement of one qubit.

    Equivalent to :func:`measure_projector` with ``P = |1><1|`` on ``qubit``
    but without forming the dense projector.
    """
    vec = _as_vector(state)
    n = num_qubits_for_dim(vec.size)
    if not 0 <= qubit < n:
        raise InvalidArgumentError(f"qubit {qubit} out of range")
    vec = vec / np.linalg.norm(vec)
    mask = ((np.arange(vec.size) >> qubit) & 1).astype(bool)
    projected = np.where(mask, vec, 0)
    p1 = float(np.clip(np.vdot(projected, projected).real, 0.0, 1.0))
    outcome, post, prob = _realize(vec, projected, p1, rng)
    return outcome, PureState(post / np.linalg.norm(post)), prob


def density_matrix(state: PureState) -> np.ndarray:
    v = _as_vector(state)
    return np.outer(v, v.conj())


def check_density_operator(rho: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; return ``rho``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidArgumentError(f"density operator must be square, got {rho.shape}")
    num_qubits_for_dim(rho.shape[0])
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
        raise InvalidArgumentError("density operator is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise InvalidArgumentError(f"density operator trace is {np.trace(rho).real:.12g}")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise InvalidArgumentError("density operator has a negative eigenvalue")
    return rho


def random_density_operator(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
