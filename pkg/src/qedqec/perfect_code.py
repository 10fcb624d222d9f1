"""The 5-qubit perfect code.

Generators (qubit indices little endian)::

    M0 = Z1 X2 X3 Z4
    M1 = Z0 Z2 X3 X4
    M2 = X0 Z1 Z3 X4
    M3 = X0 X1 Z2 Z4

Codewords are ``(1/4) prod_i (I + M_i) |00000>`` and the same applied to
``|11111>``.  A syndrome bit is 1 when the -1 eigenvalue of ``M_i`` is
observed; syndromes are written ``m0 m1 m2 m3`` left to right.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import numpy as np

from .errors import DegenerateError, InvalidArgumentError
from .qubit_core import (
    PauliString,
    PureState,
    apply_matrix,
    measure_projector,
    measure_qubit,
    pauli_string_to_operator,
)

N_DATA = 5
N_ANCILLA = 4
DIM = 2**N_DATA

GENERATORS: tuple[PauliString, ...] = (
    PauliString.from_terms(N_DATA, "Z1 X2 X3 Z4"),
    PauliString.from_terms(N_DATA, "Z0 Z2 X3 X4"),
    PauliString.from_terms(N_DATA, "X0 Z1 Z3 X4"),
    PauliString.from_terms(N_DATA, "X0 X1 Z2 Z4"),
)

# syndrome m0m1m2m3 -> error
_TABLE_TERMS = {
    "0000": "", "0001": "Z1", "0010": "X3", "0011": "Z0",
    "0100": "X0", "0101": "X2", "0110": "Z4", "0111": "Y0",
    "1000": "Z2", "1001": "X4", "1010": "X1", "1011": "Y1",
    "1100": "Z3", "1101": "Y2", "1110": "Y3", "1111": "Y4",
}


@dataclass(frozen=True)
class Syndrome:
    """Outcome bits ``(m0, m1, m2, m3)``; 1 means eigenvalue -1."""

    bits: tuple[int, int, int, int]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if len(bits) != N_ANCILLA or any(b not in (0, 1) for b in bits):
            raise InvalidArgumentError(f"invalid syndrome bits {self.bits!r}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_string(cls, text: str) -> "Syndrome":
        return cls(tuple(int(c) for c in text.strip()))

    @classmethod
    def of_error(cls, error: PauliString) -> "Syndrome":
        """Syndrome predicted by the anticommutation pattern of ``error``."""
        return cls(tuple(int(not error.commutes_with(m)) for m in GENERATORS))

    @property
    def is_trivial(self) -> bool:
        return not any(self.bits)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


SYNDROME_TABLE: dict[Syndrome, PauliString] = {
    Syndrome.from_string(s): PauliString.from_terms(N_DATA, t) for s, t in _TABLE_TERMS.items()
}


@lru_cache(maxsize=None)
def generator_matrices() -> tuple[np.ndarray, ...]:
    return tuple(pauli_string_to_operator(m) for m in GENERATORS)


@lru_cache(maxsize=None)
def _syndrome_projectors() -> tuple[np.ndarray, ...]:
    # projector onto the -1 eigenspace of each generator
    return tuple((np.eye(DIM) - m) / 2 for m in generator_matrices())


@dataclass(frozen=True)
class EncodingIsometry:
    """Columns ``|0L>`` and ``|1L>`` as a ``(32, 2)`` matrix."""

    matrix: np.ndarray

    @property
    def zero(self) -> np.ndarray:
        return self.matrix[:, 0]

    @property
    def one(self) -> np.ndarray:
        return self.matrix[:, 1]

    @property
    def codespace_projector(self) -> np.ndarray:
        return self.matrix @ self.matrix.conj().T


def _stabilizer_sum(vec: np.ndarray) -> np.ndarray:
    out = vec
    for m in generator_matrices():
        out = out + m @ out
    return out / 4


@lru_cache(maxsize=None)
def build_codewords() -> EncodingIsometry:
    zero = np.zeros(DIM, dtype=complex)
    zero[0] = 1
    one = np.zeros(DIM, dtype=complex)
    one[DIM - 1] = 1
    # (I+M3) acts first; the generators commute so the order is immaterial
    v = np.column_stack([_stabilizer_sum(zero), _stabilizer_sum(one)])
    v.flags.writeable = False
    return EncodingIsometry(v)


def encode(logical: PureState) -> PureState:
    if logical.n_qubits != 1:
        raise InvalidArgumentError("encode expects a one-qubit state")
    return PureState(build_codewords().matrix @ logical.amplitudes)


def measure_syndrome(state: PureState, rng: np.random.Generator):
    """Sequential projective measurement of ``M0..M3``.

    Returns ``(syndrome, post_state)``.
    """
    if state.n_qubits != N_DATA:
        raise InvalidArgumentError("syndrome measurement expects a 5-qubit state")
    bits = []
    for proj in _syndrome_projectors():
        outcome, state, _ = measure_projector(state, proj, rng, validate=False)
        bits.append(outcome)
    return Syndrome(tuple(bits)), state


@lru_cache(maxsize=None)
def _controlled_generators() -> tuple[np.ndarray, ...]:
    # 64x64 operator on (data 0..4, ancilla): ancilla is the most significant target
    out = []
    for m in generator_matrices():
        c = np.zeros((2 * DIM, 2 * DIM), dtype=complex)
        c[:DIM, :DIM] = np.eye(DIM)
        c[DIM:, DIM:] = m
        out.append(c)
    return tuple(out)


_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def measure_syndrome_circuit(state: PureState, rng: np.random.Generator):
    """Indirect syndrome measurement with four ancillas.

    Ancilla ``i`` (qubit ``5 + i``) starts in ``|0>``, gets H, controls
    ``M_i`` on the data block, gets H again and is read out; outcome 1
    flags the -1 eigenvalue.
    """
    if state.n_qubits != N_DATA:
        raise InvalidArgumentError("syndrome measurement expects a 5-qubit state")
    vec = np.zeros(DIM * 2**N_ANCILLA, dtype=complex)
    vec[:DIM] = state.amplitudes / np.linalg.norm(state.amplitudes)
    data = list(range(N_DATA))
    for i, cm in enumerate(_controlled_generators()):
        anc = N_DATA + i
        vec = apply_matrix(_H, vec, [anc])
        vec = apply_matrix(cm, vec, data + [anc])
        vec = apply_matrix(_H, vec, [anc])
    bits = []
    full = PureState(vec)
    for i in range(N_ANCILLA):
        outcome, full, _ = measure_qubit(full, N_DATA + i, rng)
        bits.append(outcome)
    anc_index = sum(b << i for i, b in enumerate(bits))
    post = full.amplitudes.reshape(2**N_ANCILLA, DIM)[anc_index]
    return Syndrome(tuple(bits)), PureState(post / np.linalg.norm(post))


def lookup_correction(s: Syndrome, table: Mapping[Syndrome, PauliString] | None = None) -> PauliString:
    return (SYNDROME_TABLE if table is None else table)[s]


def correct(state: PureState, s: Syndrome, table: Mapping[Syndrome, PauliString] | None = None) -> PureState:
    fix = lookup_correction(s, table)
    if fix.weight == 0:
        return state
    vec = state.amplitudes
    for q, c in enumerate(fix.letters):
        if c != "I":
            vec = apply_matrix(pauli_string_to_operator(PauliString((c,))), vec, [q])
    return PureState(fix.phase * vec, check=state.check)


def decode(state: PureState):
    """Logical amplitudes of a 5-qubit state.

    Returns ``(logical_state, leakage)`` where ``leakage`` is the squared
    weight outside the codespace (relative to the input norm).
    """
    if state.n_qubits != N_DATA:
        raise InvalidArgumentError("decode expects a 5-qubit state")
    vec = state.amplitudes
    logical = build_codewords().matrix.conj().T @ vec
    total = np.vdot(vec, vec).real
    kept = np.vdot(logical, logical).real
    if kept < 1e-24 or kept / total < 1e-12:
        raise DegenerateError("state has no weight in the codespace")
    return PureState(logical / np.sqrt(kept)), max(0.0, 1.0 - kept / total)


def syndrome_table_mismatches(table: Mapping[Syndrome, PauliString] | None = None) -> list[str]:
    """Rows of ``table`` that disagree with the anticommutation law."""
    table = SYNDROME_TABLE if table is None else table
    problems = []
    if len(table) != 2**N_ANCILLA:
        problems.append(f"table has {len(table)} rows, expected {2**N_ANCILLA}")
    for s, err in sorted(table.items(), key=lambda kv: str(kv[0])):
        predicted = Syndrome.of_error(err)
        if predicted != s:
            problems.append(f"{s}: {err.sparse_label()} has syndrome {predicted}")
        if err.weight > 1:
            problems.append(f"{s}: {err.sparse_label()} is not a single-qubit error")
    return problems
