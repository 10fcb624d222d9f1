"""Self-check suite run by ``qedqec validate``."""
from __future__ import annotations

import itertools
from typing import Callable, Mapping

import numpy as np

from .errors import DegenerateError
from .noise_channels import (
    awgn_channel_output,
    estimate_channel_mc,
    fit_depolarizing_p,
    awgn_equivalent_p,
    trace_distance,
)
from .perfect_code import (
    GENERATORS,
    N_DATA,
    SYNDROME_TABLE,
    PauliString,
    Syndrome,
    build_codewords,
    correct,
    decode,
    encode,
    generator_matrices,
    measure_syndrome,
    syndrome_table_mismatches,
)
from .qubit_core import haar_random_state, pauli_string_to_operator, PureState
from .signal_rep import SignalConfig, awgn_samples, project_samples, synthesize_amplitudes
from .transversal_gates import K_LABELS, gate_from_label, k_gate, logical_action, transversal_operator

SINGLE_QUBIT_ERRORS = tuple(
    PauliString.from_terms(N_DATA, {q: c}) for q in range(N_DATA) for c in "XYZ"
)


def _check(passed: bool, **detail) -> dict:
    return {"passed": bool(passed), **detail}


def check_syndrome_table(table: Mapping[Syndrome, PauliString] | None = None) -> dict:
    problems = syndrome_table_mismatches(table)
    table = SYNDROME_TABLE if table is None else table
    distinct = {Syndrome.of_error(e) for e in SINGLE_QUBIT_ERRORS}
    if len(distinct) != 15 or Syndrome((0, 0, 0, 0)) in distinct:
        problems.append("single-qubit errors do not map to 15 distinct nonzero syndromes")
    return _check(not problems, problems=problems,
                  rows={str(s): e.sparse_label() for s, e in sorted(table.items(), key=lambda kv: str(kv[0]))})


def check_generators() -> dict:
    mats = generator_matrices()
    commute = max(np.max(np.abs(a @ b - b @ a)) for a, b in itertools.combinations(mats, 2))
    square = max(np.max(np.abs(m @ m - np.eye(32))) for m in mats)
    independent = True
    for r in range(1, 4):
        for subset in itertools.combinations(GENERATORS, r):
            prod = subset[0]
            for g in subset[1:]:
                prod = prod * g
            if prod.weight == 0:
                independent = False
    return _check(commute <= 1e-12 and square <= 1e-12 and independent,
                  max_commutator=float(commute), max_square_dev=float(square), independent=independent)


def check_codewords() -> dict:
    V = build_codewords().matrix
    gram = float(np.max(np.abs(V.conj().T @ V - np.eye(2))))
    stab = max(float(np.max(np.abs(m @ V - V))) for m in generator_matrices())
    zbar = np.diag(
        pauli_string_to_operator(PauliString(("Z",) * N_DATA))
    )[:, None] * V
    logical_z = float(np.max(np.abs(zbar - V * np.array([1, -1]))))
    amp = float(abs(V[0, 0] - 0.25))
    return _check(gram <= 1e-10 and stab <= 1e-10 and logical_z <= 1e-10 and amp <= 1e-12,
                  gram_dev=gram, stabilizer_dev=stab, logical_z_dev=logical_z, amp_00000_dev=amp)


def check_single_error_correction(n_states: int = 20, seed: int = 7,
                                  table: Mapping[Syndrome, PauliString] | None = None) -> dict:
    rng = np.random.default_rng(seed)
    worst, mismatched = 1.0, []
    for _ in range(n_states):
        psi = haar_random_state(1, rng)
        enc = encode(psi)
        for err in SINGLE_QUBIT_ERRORS:
            bad = PureState(pauli_string_to_operator(err) @ enc.amplitudes)
            s, post = measure_syndrome(bad, rng)
            expected = [k for k, v in SYNDROME_TABLE.items() if v == err][0]
            if s != expected:
                mismatched.append(err.sparse_label())
            try:
                logical, _ = decode(correct(post, s, table))
            except DegenerateError:
                worst = 0.0
                continue
            worst = min(worst, abs(np.vdot(psi.amplitudes, logical.amplitudes)))
    return _check(worst >= 1 - 1e-9 and not mismatched, worst_fidelity=float(worst),
                  syndrome_mismatches=sorted(set(mismatched)))


def check_transversality(n_states: int = 50, seed: int = 11) -> dict:
    rng = np.random.default_rng(seed)
    psis = [haar_random_state(1, rng) for _ in range(n_states)]
    gates, ok = {}, True
    for label in ("X", "Z", "SH") + K_LABELS:
        g = gate_from_label(label)
        phys = transversal_operator(g)
        L, leak = logical_action(phys)
        worst = 1.0
        for psi in psis:
            lhs = encode(PureState(L @ psi.amplitudes)).amplitudes
            rhs = phys @ encode(psi).amplitudes
            worst = min(worst, abs(np.vdot(lhs, rhs)))
        matches_g = abs(np.trace(L.conj().T @ g.matrix)) / 2
        passed = bool(leak <= 1e-10 and worst >= 1 - 1e-9)
        ok &= passed
        gates[label] = {
            "passed": passed,
            "codespace_leak": leak,
            "worst_fidelity": float(worst),
            "overlap_with_g": float(matches_g),
            "logical_action": [[[float(z.real), float(z.imag)] for z in row] for row in L],
        }
    closure = max(
        float(np.max(np.abs(np.linalg.matrix_power(k_gate(*s).matrix, 3) + np.eye(2))))
        for s in itertools.product((-1, 1), repeat=3)
    )
    return _check(ok and closure <= 1e-10, gates=gates, k_cubed_dev=closure)


def check_awgn_channel(runs: int = 20_000, r: float = 0.05, seed: int = 3) -> dict:
    sc = SignalConfig.default(1)
    T = sc.duration_T
    sigma2 = r * T
    rng = np.random.default_rng(seed)
    psi = haar_random_state(1, rng)
    clean = synthesize_amplitudes(psi.amplitudes, sc)

    def source(g):
        return project_samples(clean + awgn_samples(clean.shape, sigma2, sc.sample_rate, g), sc)

    est = estimate_channel_mc(source, runs, rng)
    rho = np.outer(psi.amplitudes, psi.amplitudes.conj())
    td = trace_distance(est, awgn_channel_output(rho, sigma2, T))
    p_fit = fit_depolarizing_p(est, rho)
    p_pred = awgn_equivalent_p(sigma2, T, 1)
    return _check(td <= 0.02 and abs(p_fit - p_pred) <= 0.01,
                  trace_distance=td, p_fit=p_fit, p_predicted=p_pred, runs=runs)


def check_noise_projection(draws: int = 20_000, seed: int = 5) -> dict:
    sc = SignalConfig.default(2)
    sigma2 = 1e-3 * sc.duration_T
    rng = np.random.default_rng(seed)
    noise = awgn_samples((draws, sc.n_samples), sigma2, sc.sample_rate, rng)
    amps = project_samples(noise, sc)
    var = np.mean(np.abs(amps) ** 2, axis=0) / (sigma2 / sc.duration_T)
    return _check(bool(np.all(np.abs(var - 1) <= 0.05)), relative_variance=var.tolist())


def check_tone_orthonormality() -> dict:
    sc = SignalConfig.default(N_DATA)
    gram = sc.tones @ sc.tones.conj().T / sc.n_samples
    dev = float(np.max(np.abs(gram - np.eye(sc.dim))))
    return _check(dev <= 1e-6, max_deviation=dev)


CHECKS: dict[str, Callable[[], dict]] = {
    "syndrome_table": check_syndrome_table,
    "stabilizer_generators": check_generators,
    "codewords": check_codewords,
    "single_error_correction": check_single_error_correction,
    "transversality": check_transversality,
    "awgn_channel_match": check_awgn_channel,
    "noise_projection_variance": check_noise_projection,
    "tone_orthonormality": check_tone_orthonormality,
}


def validate(table: Mapping[Syndrome, PauliString] | None = None) -> dict:
    """Run every check; ``table`` swaps in an alternative syndrome table."""
    results = {}
    for name, fn in CHECKS.items():
        if name == "syndrome_table":
            results[name] = fn(table)
        else:
            results[name] = fn()
    return {"passed": all(r["passed"] for r in results.values()), "checks": results}
