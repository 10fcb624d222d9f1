"""Transversal logical gates and the analog gate-coefficient noise model."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import reduce
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateError, InvalidArgumentError
from .perfect_code import N_DATA, EncodingIsometry, build_codewords
from .qubit_core import PureState, apply_matrix, is_unitary, pauli_matrix

_X, _Y, _Z = pauli_matrix(1), pauli_matrix(2), pauli_matrix(3)
_S = np.diag([1, 1j])
_H = (_X + _Z) / np.sqrt(2)


@dataclass(frozen=True)
class OneQubitGate:
    matrix: np.ndarray
    label: str = "custom"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise InvalidArgumentError(f"one-qubit gate must be 2x2, got {m.shape}")
        if not is_unitary(m):
            raise InvalidArgumentError(f"gate {self.label!r} is not unitary")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)


def k_gate(s_x: int, s_y: int, s_z: int) -> OneQubitGate:
    """``exp(i pi/(3 sqrt 3) (s_x X + s_y Y + s_z Z))``.

    The exponent is a rotation by pi/3 about the unit axis
    ``(s_x, s_y, s_z)/sqrt(3)``, hence the closed form below.
    """
    signs = (s_x, s_y, s_z)
    if any(s not in (-1, 1) for s in signs):
        raise InvalidArgumentError(f"K-gate signs must be +-1, got {signs}")
    axis = (s_x * _X + s_y * _Y + s_z * _Z) / np.sqrt(3)
    m = np.cos(np.pi / 3) * np.eye(2) + 1j * np.sin(np.pi / 3) * axis
    label = "K" + "".join("+" if s > 0 else "-" for s in signs)
    return OneQubitGate(m, label)


def sh_gate() -> OneQubitGate:
    return OneQubitGate(_S @ _H, "SH")


_FIXED = {
    "I": np.eye(2),
    "X": _X,
    "Y": _Y,
    "Z": _Z,
}


def gate_from_label(label: str) -> OneQubitGate:
    """Gate by name: ``I``, ``X``, ``Y``, ``Z``, ``SH`` or ``K+-+``-style."""
    label = label.strip()
    if label in _FIXED:
        return OneQubitGate(_FIXED[label], label)
    if label == "SH":
        return sh_gate()
    match = re.fullmatch(r"K([+-])([+-])([+-])", label)
    if match:
        return k_gate(*(1 if c == "+" else -1 for c in match.groups()))
    raise InvalidArgumentError(f"unknown gate label {label!r}")


K_LABELS = tuple(f"K{a}{b}{c}" for a in "+-" for b in "+-" for c in "+-")


def transversal_operator(g: OneQubitGate, n_qubits: int = N_DATA) -> np.ndarray:
    return reduce(np.kron, [g.matrix] * n_qubits)


def logical_action(phys: np.ndarray, V: EncodingIsometry | None = None):
    """Logical block ``V^dagger phys V`` and the norm of what leaves the codespace."""
    V = build_codewords() if V is None else V
    v = V.matrix
    image = np.asarray(phys) @ v
    L = v.conj().T @ image
    leak = float(np.linalg.norm(image - v @ L, 2))
    return L, leak


@dataclass(frozen=True)
class NoisyGateModel:
    """Additive Gaussian error on each real component of a gate matrix.

    ``gate_noise_multipliers`` scales ``coeff_sigma`` per gate label.
    """

    coeff_sigma: float = 0.0
    per_qubit_independent: bool = True
    gate_noise_multipliers: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.coeff_sigma < 0:
            raise InvalidArgumentError("coeff_sigma must be non-negative")
        if any(v < 0 for v in self.gate_noise_multipliers.values()):
            raise InvalidArgumentError("gate noise multipliers must be non-negative")

    def sigma_for(self, label: str) -> float:
        return self.coeff_sigma * self.gate_noise_multipliers.get(label, 1.0)

    @property
    def equivalent_p(self) -> float:
        # mean one-qubit infidelity is 2 sigma^2, a depolarizing channel gives p/2
        return 4 * self.coeff_sigma**2


def perturbed_matrix(g: OneQubitGate, sigma: float, rng: np.random.Generator) -> np.ndarray:
    if sigma == 0:
        return g.matrix
    delta = rng.normal(0.0, sigma, (2, 2)) + 1j * rng.normal(0.0, sigma, (2, 2))
    return g.matrix + delta


def apply_noisy_gate_vector(
    vec: np.ndarray,
    g: OneQubitGate,
    model: NoisyGateModel,
    targets: Sequence[int],
    rng: np.random.Generator,
) -> np.ndarray:
    if len(set(targets)) != len(targets):
        raise InvalidArgumentError(f"duplicate targets in {list(targets)}")
    sigma = model.sigma_for(g.label)
    for t in targets:
        vec = apply_matrix(perturbed_matrix(g, sigma, rng), vec, [t])
    nrm = np.linalg.norm(vec)
    if nrm < 1e-12:
        raise DegenerateError("noisy gate annihilated the state")
    return vec / nrm


def apply_noisy_gate(
    state: PureState,
    g: OneQubitGate,
    model: NoisyGateModel,
    targets: Sequence[int],
    rng: np.random.Generator,
) -> PureState:
    """Apply an independently perturbed copy of ``g`` to every target.

    Perturbed matrices are not re-unitarized; the result is renormalized once.
    """
    return PureState(apply_noisy_gate_vector(state.amplitudes, g, model, targets, rng))
