"""End-to-end gate-fidelity experiments on the emulated analog device.

Encoded trajectory::

    encode -> synthesize (32 tones) -> AWGN -> project -> noisy transversal gate
           -> synthesize -> AWGN -> project/normalize -> syndrome -> correct
           -> decode -> fidelity against the ideal logical output

Control trajectory: the same without the code, on a two-tone signal.

Every trajectory owns an RNG stream derived from
``(seed, mode, state_index, rep_index)`` so results do not depend on how
trajectories are scheduled across workers.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DegenerateError, InvalidArgumentError
from .fidelity_metrics import (
    empirical_distribution,
    log_fidelities,
    log_fidelity,
    summarize,
)
from .noise_channels import awgn_equivalent_p
from .perfect_code import (
    N_DATA,
    SYNDROME_TABLE,
    PauliString,
    correct,
    decode,
    encode,
    measure_syndrome,
    measure_syndrome_circuit,
)
from .qubit_core import PureState, apply_matrix, haar_random_state, pauli_string_to_operator
from .signal_rep import (
    SignalConfig,
    awgn_samples,
    project_samples,
    state_from_noisy_signal,
    Signal,
    synthesize_amplitudes,
)
from .transversal_gates import (
    NoisyGateModel,
    apply_noisy_gate_vector,
    gate_from_label,
    logical_action,
    transversal_operator,
)

log = logging.getLogger(__name__)

MODES = ("encoded", "control")
_MODE_KEY = {"encoded": 0, "control": 1}
_STATES_KEY = 2
_BOOT_KEY = 3
TAIL_THRESHOLD_F = 1.0
RECORD_HEADER = ("mode", "gate", "state_index", "rep_index", "syndrome", "leakage", "F", "f", "seed_stream")


@dataclass(frozen=True)
class ExperimentConfig:
    gate_label: str = "Z"
    mode: str = "both"
    num_states: int = 100
    reps_per_state: int = 10
    sigma2: float = 0.0
    coeff_sigma: float = 0.0
    gate_noise_multipliers: Mapping[str, float] = field(default_factory=dict)
    noise_injection: Mapping[str, int] = field(
        default_factory=lambda: {"pre_gate": 1, "post_gate": 1}
    )
    syndrome_method: str = "projective"
    omega0_hz: float = 1000.0
    duration_periods: int = 1
    sample_rate_factor: float = 16.0
    n_boot: int = 10_000
    ci_level: float = 0.95
    seed: int = 0
    out_dir: str = "out"

    def __post_init__(self):
        gate_from_label(self.gate_label)
        if self.mode not in ("encoded", "control", "both"):
            raise ConfigError(f"mode must be encoded, control or both; got {self.mode!r}")
        if self.num_states < 1 or self.reps_per_state < 1:
            raise ConfigError("num_states and reps_per_state must be >= 1")
        if self.sigma2 < 0 or self.coeff_sigma < 0:
            raise ConfigError("sigma2 and coeff_sigma must be non-negative")
        if self.syndrome_method not in ("projective", "circuit"):
            raise ConfigError(f"syndrome_method must be projective or circuit; got {self.syndrome_method!r}")
        inj = dict(self.noise_injection)
        if set(inj) != {"pre_gate", "post_gate"} or any(int(v) < 0 for v in inj.values()):
            raise ConfigError("noise_injection needs non-negative pre_gate and post_gate counts")
        object.__setattr__(self, "noise_injection", {k: int(v) for k, v in inj.items()})
        object.__setattr__(self, "gate_noise_multipliers", dict(self.gate_noise_multipliers))
        if not 0 < self.ci_level < 1 or self.n_boot < 100:
            raise ConfigError("need 0 < ci_level < 1 and n_boot >= 100")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.omega0_hz <= 0 or self.duration_periods < 1 or self.sample_rate_factor <= 4:
            raise ConfigError("invalid signal timing parameters")

    @property
    def modes(self) -> tuple[str, ...]:
        return MODES if self.mode == "both" else (self.mode,)

    @property
    def total_runs(self) -> int:
        return self.num_states * self.reps_per_state

    @property
    def duration_T(self) -> float:
        return self.duration_periods / self.omega0_hz

    def gate_model(self) -> NoisyGateModel:
        return NoisyGateModel(self.coeff_sigma, gate_noise_multipliers=self.gate_noise_multipliers)

    def signal_config(self, n_qubits: int) -> SignalConfig:
        return _signal_config(n_qubits, self.omega0_hz, self.duration_periods, self.sample_rate_factor)

    def echo(self) -> dict:
        return asdict(self)

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "ExperimentConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = set(values) - set(known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        kwargs = {}
        for key, raw in values.items():
            try:
                kwargs[key] = _coerce(key, raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from exc
        try:
            return cls(**kwargs)
        except InvalidArgumentError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        values = {}
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            if key in values:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            values[key] = value
        return cls.from_mapping(values)


_INT_KEYS = {"num_states", "reps_per_state", "duration_periods", "n_boot", "seed"}
_FLOAT_KEYS = {"sigma2", "coeff_sigma", "omega0_hz", "sample_rate_factor", "ci_level"}


def _parse_map(text: str, cast) -> dict:
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        k, v = item.split(":")
        out[k.strip()] = cast(v.strip())
    return out


def _coerce(key: str, raw):
    if not isinstance(raw, str):
        return raw
    if key in _INT_KEYS:
        return int(raw, 0)
    if key in _FLOAT_KEYS:
        return float(raw)
    if key == "gate_noise_multipliers":
        return _parse_map(raw, float)
    if key == "noise_injection":
        return _parse_map(raw, int)
    return raw


@lru_cache(maxsize=None)
def _signal_config(n_qubits, omega0_hz, duration_periods, sample_rate_factor) -> SignalConfig:
    return SignalConfig.default(n_qubits, omega0_hz, duration_periods, sample_rate_factor)


@lru_cache(maxsize=None)
def ideal_logical_gate(label: str) -> np.ndarray:
    """Logical action of the noiseless transversal gate, extracted from the code."""
    L, leak = logical_action(transversal_operator(gate_from_label(label)))
    if leak > 1e-10:
        raise InvalidArgumentError(f"gate {label} is not transversal for this code (leak {leak:.3g})")
    return L


@dataclass(frozen=True)
class RunRecord:
    mode: str
    gate_label: str
    state_index: int
    rep_index: int
    syndrome: str
    leakage: float
    F: float
    f: float
    seed_stream: int
    # fidelity of the corrected physical state with the ideal encoded output;
    # diagnostic only, not written to records.csv
    corrected_fidelity: float = field(default=float("nan"), compare=False)

    def csv_row(self) -> list[str]:
        return [
            self.mode,
            self.gate_label,
            str(self.state_index),
            str(self.rep_index),
            self.syndrome,
            repr(float(self.leakage)),
            repr(float(self.F)),
            repr(float(self.f)),
            str(self.seed_stream),
        ]


def trajectory_seed(seed: int, mode: str, state_index: int, rep_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(_MODE_KEY[mode], state_index, rep_index))


def input_states(config: ExperimentConfig) -> list[PureState]:
    return [
        haar_random_state(1, np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(_STATES_KEY, i))))
        for i in range(config.num_states)
    ]


def _noise_pass(vec, sc: SignalConfig, sigma2: float, count: int, rng) -> np.ndarray:
    """Synthesize, add ``count`` independent AWGN injections, project back."""
    samples = synthesize_amplitudes(vec, sc)
    if sigma2 > 0:
        for _ in range(count):
            samples = samples + awgn_samples(samples.shape, sigma2, sc.sample_rate, rng)
    return project_samples(samples, sc)


def _physical_gate(vec, config: ExperimentConfig, targets, rng) -> np.ndarray:
    return apply_noisy_gate_vector(vec, gate_from_label(config.gate_label), config.gate_model(), targets, rng)


def _apply_pauli(vec: np.ndarray, p: PauliString) -> np.ndarray:
    for q, c in enumerate(p.letters):
        if c != "I":
            vec = apply_matrix(pauli_string_to_operator(PauliString((c,))), vec, [q])
    return p.phase * vec


def run_encoded_trajectory(
    psi: PureState,
    config: ExperimentConfig,
    rng: np.random.Generator,
    *,
    fault: PauliString | None = None,
    state_index: int = 0,
    rep_index: int = 0,
    seed_stream: int = 0,
) -> RunRecord:
    """One encoded run.  ``fault`` is a test hook applied right after the gate."""
    sc = config.signal_config(N_DATA)
    inj = config.noise_injection
    vec = encode(psi).amplitudes
    vec = _noise_pass(vec, sc, config.sigma2, inj["pre_gate"], rng)
    vec = _physical_gate(vec, config, range(N_DATA), rng)
    if fault is not None:
        vec = _apply_pauli(vec, fault)
    samples = synthesize_amplitudes(vec, sc)
    if config.sigma2 > 0:
        for _ in range(inj["post_gate"]):
            samples = samples + awgn_samples(samples.shape, config.sigma2, sc.sample_rate, rng)
    state, _ = state_from_noisy_signal(Signal(samples, sc))
    measure = measure_syndrome_circuit if config.syndrome_method == "circuit" else measure_syndrome
    syndrome, post = measure(state, rng)
    fixed = correct(post, syndrome)
    logical, leakage = decode(fixed)
    L = ideal_logical_gate(config.gate_label)
    ideal = L @ psi.amplitudes
    F = float(min(1.0, abs(np.vdot(ideal, logical.amplitudes))))
    ideal_phys = encode(PureState(ideal / np.linalg.norm(ideal))).amplitudes
    corrected_F = float(min(1.0, abs(np.vdot(ideal_phys, fixed.amplitudes)) / np.linalg.norm(fixed.amplitudes)))
    return RunRecord(
        "encoded", config.gate_label, state_index, rep_index, str(syndrome),
        leakage, F, log_fidelity(F), seed_stream, corrected_F,
    )


def run_control_trajectory(
    psi: PureState,
    config: ExperimentConfig,
    rng: np.random.Generator,
    *,
    state_index: int = 0,
    rep_index: int = 0,
    seed_stream: int = 0,
) -> RunRecord:
    """One unencoded run on the two-tone, one-qubit signal."""
    if psi.n_qubits != 1:
        raise InvalidArgumentError("control runs take one-qubit states")
    sc = config.signal_config(1)
    inj = config.noise_injection
    vec = _noise_pass(psi.amplitudes, sc, config.sigma2, inj["pre_gate"], rng)
    vec = _physical_gate(vec, config, [0], rng)
    samples = synthesize_amplitudes(vec, sc)
    if config.sigma2 > 0:
        for _ in range(inj["post_gate"]):
            samples = samples + awgn_samples(samples.shape, config.sigma2, sc.sample_rate, rng)
    state, _ = state_from_noisy_signal(Signal(samples, sc))
    ideal = gate_from_label(config.gate_label).matrix @ psi.amplitudes
    F = float(min(1.0, abs(np.vdot(ideal, state.amplitudes))))
    return RunRecord(
        "control", config.gate_label, state_index, rep_index, "-",
        0.0, F, log_fidelity(F), seed_stream, F,
    )


_RUNNERS = {"encoded": run_encoded_trajectory, "control": run_control_trajectory}


def run_trajectory(config: ExperimentConfig, mode: str, psi: PureState, state_index: int, rep_index: int):
    """Seeded trajectory; returns ``None`` when it fails numerically."""
    ss = trajectory_seed(config.seed, mode, state_index, rep_index)
    stream = int(ss.generate_state(1, np.uint32)[0])
    rng = np.random.default_rng(ss)
    try:
        return _RUNNERS[mode](
            psi, config, rng, state_index=state_index, rep_index=rep_index, seed_stream=stream
        )
    except DegenerateError as exc:
        log.warning("trajectory %s/%d/%d failed: %s", mode, state_index, rep_index, exc)
        return None


def _run_block(args):
    config, mode, psi_amps, state_index = args
    psi = PureState(psi_amps)
    return [
        (mode, state_index, rep, run_trajectory(config, mode, psi, state_index, rep))
        for rep in range(config.reps_per_state)
    ]


@dataclass
class ExperimentReport:
    config: dict
    summaries: dict
    syndrome_frequencies: dict
    tail_fraction: dict
    cap_count: dict
    failed: dict
    equivalent_p: dict
    wall_time_s: float

    def summary_json(self) -> dict:
        per_mode = {}
        for mode, s in self.summaries.items():
            per_mode[mode] = {
                "median_F": s.median_F,
                "ci_F_lo": s.ci_F[0],
                "ci_F_hi": s.ci_F[1],
                "median_f": s.median_f,
                "ci_f_lo": s.ci_f[0],
                "ci_f_hi": s.ci_f[1],
                "n": s.n_samples,
                "tail_fraction_f_lt_1": self.tail_fraction[mode],
                "cap_count": self.cap_count[mode],
                "failed": self.failed[mode],
                "equivalent_p_awgn": self.equivalent_p[mode]["awgn"],
                "equivalent_p_coeff": self.equivalent_p[mode]["coeff"],
            }
        return {
            "config": self.config,
            "modes": per_mode,
            "syndrome_frequencies": self.syndrome_frequencies,
            "wall_time_s": self.wall_time_s,
        }


def _check_out_dir(out_dir: str | Path) -> Path:
    path = Path(out_dir)
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory {path} is not writable: {exc}") from exc
    return path


def equivalent_p(config: ExperimentConfig, mode: str) -> dict:
    n = N_DATA if mode == "encoded" else 1
    return {
        "awgn": awgn_equivalent_p(config.sigma2, config.duration_T, n),
        "coeff": config.gate_model().equivalent_p,
    }


def run_experiment(
    config: ExperimentConfig,
    *,
    workers: int = 1,
    write_outputs: bool = True,
) -> tuple[list[RunRecord], ExperimentReport]:
    out = _check_out_dir(config.out_dir) if write_outputs else None
    started = time.perf_counter()
    states = input_states(config)
    tasks = [(config, mode, states[i].amplitudes, i) for mode in config.modes for i in range(config.num_states)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_run_block, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        blocks = [_run_block(t) for t in tasks]
    results = sorted(
        (item for block in blocks for item in block),
        key=lambda r: (_MODE_KEY[r[0]], r[1], r[2]),
    )
    records = [r for *_, r in results if r is not None]
    failed = {m: sum(1 for mode, *_, r in results if mode == m and r is None) for m in config.modes}
    report = build_report(config, records, failed, time.perf_counter() - started)
    if out is not None:
        write_outputs_to(out, records, report)
    return records, report


def build_report(config: ExperimentConfig, records: Sequence[RunRecord], failed: dict, wall_time: float) -> ExperimentReport:
    summaries, tails, caps = {}, {}, {}
    for mode in config.modes:
        F = np.array([r.F for r in records if r.mode == mode])
        if F.size == 0:
            raise DegenerateError(f"every {mode} trajectory failed")
        boot_rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(_BOOT_KEY, _MODE_KEY[mode])))
        summaries[mode] = summarize(F, config.n_boot, config.ci_level, boot_rng)
        f = log_fidelities(F)
        tails[mode] = float(np.mean(f < TAIL_THRESHOLD_F))
        caps[mode] = int(np.sum(F >= 1.0 - 1e-15))
    freqs = {}
    if "encoded" in config.modes:
        freqs = {str(s): 0 for s in sorted(SYNDROME_TABLE, key=str)}
        for r in records:
            if r.mode == "encoded":
                freqs[r.syndrome] += 1
    return ExperimentReport(
        config=config.echo(),
        summaries=summaries,
        syndrome_frequencies=freqs,
        tail_fraction=tails,
        cap_count=caps,
        failed=failed,
        equivalent_p={m: equivalent_p(config, m) for m in config.modes},
        wall_time_s=wall_time,
    )


def records_csv(records: Iterable[RunRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RECORD_HEADER)
    for r in records:
        writer.writerow(r.csv_row())
    return buf.getvalue()


def distribution_csv(f_values: Sequence[float], n_bins: int = 50) -> str:
    dist = empirical_distribution(f_values, n_bins)
    lines = ["# section: cdf", "# f_value,cdf"]
    lines += [f"{x!r},{y!r}" for x, y in zip(dist.cdf_x.tolist(), dist.cdf_y.tolist())]
    lines += ["", "", "# section: pdf", "# bin_left,bin_right,pdf_density"]
    edges = dist.bin_edges.tolist()
    lines += [f"{a!r},{b!r},{d!r}" for a, b, d in zip(edges[:-1], edges[1:], dist.density.tolist())]
    return "\n".join(lines) + "\n"


def write_outputs_to(out: Path, records: Sequence[RunRecord], report: ExperimentReport) -> None:
    (out / "records.csv").write_text(records_csv(records), encoding="utf-8")
    (out / "summary.json").write_text(json.dumps(report.summary_json(), indent=2) + "\n", encoding="utf-8")
    for mode in report.summaries:
        f = [r.f for r in records if r.mode == mode]
        (out / f"dist_{mode}.csv").write_text(distribution_csv(f), encoding="utf-8")


def _loglog_slope(p: Sequence[float], y: Sequence[float]):
    pts = [(a, b) for a, b in zip(p, y) if a > 0 and b > 0]
    if len(pts) < 2 or len({a for a, _ in pts}) < 2:
        return None
    x, v = np.log([a for a, _ in pts]), np.log([b for _, b in pts])
    return float(np.polyfit(x, v, 1)[0])


def run_sweep(
    config: ExperimentConfig,
    param_name: str,
    values: Sequence[float],
    *,
    workers: int = 1,
) -> dict:
    """Repeat :func:`run_experiment` over values of ``sigma2`` or ``coeff_sigma``.

    Reports per-point medians and mean infidelity ``1 - F`` per mode, and the
    log-log slope of mean infidelity against the equivalent depolarizing
    probability (``None`` when fewer than two usable points exist).
    """
    if param_name not in ("sigma2", "coeff_sigma"):
        raise ConfigError(f"cannot sweep {param_name!r}; use sigma2 or coeff_sigma")
    if not values:
        raise ConfigError("sweep needs at least one value")
    if any(v < 0 for v in values):
        raise ConfigError("sweep values must be non-negative")
    points = []
    for value in values:
        cfg = replace(config, **{param_name: float(value)})
        records, report = run_experiment(cfg, workers=workers, write_outputs=False)
        point = {"value": float(value)}
        for mode in cfg.modes:
            F = np.array([r.F for r in records if r.mode == mode])
            s = report.summaries[mode]
            p = report.equivalent_p[mode]["awgn" if param_name == "sigma2" else "coeff"]
            point[mode] = {
                "median_F": s.median_F,
                "median_f": s.median_f,
                "ci_f": list(s.ci_f),
                "mean_infidelity": float(np.mean(1.0 - F)),
                "equivalent_p": p,
                "n": int(F.size),
            }
        points.append(point)
    slopes = {
        mode: _loglog_slope(
            [pt[mode]["equivalent_p"] for pt in points],
            [pt[mode]["mean_infidelity"] for pt in points],
        )
        for mode in config.modes
    }
    return {"param": param_name, "config": config.echo(), "points": points, "slopes": slopes}


def calibrate_sigma2(
    config: ExperimentConfig,
    target_median_f: float,
    *,
    tol: float = 0.01,
    max_iter: int = 60,
) -> float:
    """Find ``sigma2`` giving a control-mode median log-fidelity of ``target_median_f``.

    Bisection in ``log(sigma2)`` with common random numbers (the seed stays
    fixed), so the median is monotone in ``sigma2`` and the search is
    deterministic.  ``coeff_sigma`` is taken from ``config``.
    """
    base = replace(config, mode="control")
    T = config.duration_T

    def med_f(sigma2):
        recs, _ = run_experiment(replace(base, sigma2=sigma2, n_boot=100), write_outputs=False)
        return float(np.median([r.f for r in recs]))

    lo, hi = 1e-8 * T, 1.0 * T
    if not med_f(hi) < target_median_f < med_f(lo):
        raise InvalidArgumentError(f"target median f {target_median_f} not bracketed")
    for _ in range(max_iter):
        mid = math.sqrt(lo * hi)
        m = med_f(mid)
        if abs(m - target_median_f) <= tol:
            return mid
        if m > target_median_f:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)
