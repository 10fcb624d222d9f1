import csv
import io
import json
import os
import stat

import numpy as np
import pytest

from qedqec.errors import ConfigError
from qedqec.harness import (
    RECORD_HEADER,
    ExperimentConfig,
    _loglog_slope,
    distribution_csv,
    ideal_logical_gate,
    input_states,
    records_csv,
    run_control_trajectory,
    run_encoded_trajectory,
    run_experiment,
    run_sweep,
)
from qedqec.noise_channels import sigma2_for_p
from qedqec.qubit_core import PauliString, PureState, haar_random_state
from qedqec.transversal_gates import K_LABELS, gate_from_label

T = 1e-3


def cfg(**kw):
    base = dict(num_states=5, reps_per_state=2, n_boot=200, seed=1)
    base.update(kw)
    return ExperimentConfig(**base)


class TestConfig:
    def test_defaults(self):
        c = ExperimentConfig()
        assert c.modes == ("encoded", "control")
        assert c.total_runs == 1000
        assert c.duration_T == pytest.approx(T)
        assert c.noise_injection == {"pre_gate": 1, "post_gate": 1}

    def test_from_file(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(
            "# sample\n"
            "gate_label = K+-+\n"
            "mode = encoded   # trailing comment\n"
            "num_states = 3\n"
            "sigma2 = 1e-6\n"
            "gate_noise_multipliers = K+-+:0.5, Z:2\n"
            "noise_injection = pre_gate:0,post_gate:2\n"
        )
        c = ExperimentConfig.from_file(path)
        assert c.gate_label == "K+-+" and c.modes == ("encoded",)
        assert c.num_states == 3 and c.sigma2 == 1e-6
        assert c.gate_noise_multipliers == {"K+-+": 0.5, "Z": 2.0}
        assert c.noise_injection == {"pre_gate": 0, "post_gate": 2}
        assert c.gate_model().sigma_for("Z") == 0.0

    @pytest.mark.parametrize("text", [
        "bogus = 1\n",
        "num_states = many\n",
        "num_states = 0\n",
        "mode = sideways\n",
        "gate_label = H\n",
        "sigma2 = -1\n",
        "syndrome_method = guess\n",
        "noise_injection = pre_gate:1\n",
        "seed = 1\nseed = 2\n",
        "just words\n",
    ])
    def test_bad_config(self, tmp_path, text):
        path = tmp_path / "bad.cfg"
        path.write_text(text)
        with pytest.raises(ConfigError):
            ExperimentConfig.from_file(path)

    def test_input_states_deterministic(self):
        a = input_states(cfg())
        b = input_states(cfg())
        assert all(np.array_equal(x.amplitudes, y.amplitudes) for x, y in zip(a, b))
        assert not np.allclose(a[0].amplitudes, input_states(cfg(seed=2))[0].amplitudes)


class TestIdealGates:
    @pytest.mark.parametrize("label", ("X", "Z") + K_LABELS)
    def test_logical_gate_is_g(self, label):
        np.testing.assert_allclose(ideal_logical_gate(label), gate_from_label(label).matrix, atol=1e-10)


class TestTrajectories:
    def test_noiseless_encoded_is_perfect(self, rng):
        c = cfg(gate_label="K+++")
        for _ in range(5):
            r = run_encoded_trajectory(haar_random_state(1, rng), c, rng)
            assert r.F >= 1 - 1e-12 and r.syndrome == "0000" and r.leakage <= 1e-12

    def test_noiseless_control_is_perfect(self, rng):
        r = run_control_trajectory(haar_random_state(1, rng), cfg(gate_label="SH"), rng)
        assert r.F >= 1 - 1e-12 and r.syndrome == "-"

    @pytest.mark.parametrize("fault,syndrome", [("X3", "0010"), ("Y4", "1111"), ("Z2", "1000")])
    def test_single_fault_corrected(self, fault, syndrome, rng):
        c = cfg(gate_label="Z")
        for _ in range(3):
            r = run_encoded_trajectory(haar_random_state(1, rng), c, rng,
                                       fault=PauliString.from_terms(5, fault))
            assert r.syndrome == syndrome and r.F >= 1 - 1e-9

    def test_two_qubit_fault_miscorrected(self):
        c = cfg(gate_label="Z")
        r = run_encoded_trajectory(PureState.basis(1, 0), c, np.random.default_rng(0),
                                   fault=PauliString.from_terms(5, "X0 X1"))
        assert r.syndrome != "0000"
        assert r.F <= 0.5
        assert r.corrected_fidelity < 0.9

    def test_control_near_calibrated_point(self):
        # two-tone control signal: n = 1 qubit, N = 2 tones
        c = cfg(mode="control", num_states=100, reps_per_state=5, sigma2=sigma2_for_p(0.005, T, 1))
        _, report = run_experiment(c, write_outputs=False)
        median_f = report.summaries["control"].median_f
        # same order as the unencoded 2.270 reference; two injections of r = p/(2(1-p))
        # put the Gaussian-oracle median at -log10(r ln 2) = 2.76
        assert 1.5 <= median_f <= 3.5
        r = 0.005 / (2 * 0.995)
        assert median_f == pytest.approx(-np.log10(r * np.log(2)), abs=0.15)

    def test_control_matches_gaussian_oracle(self):
        """Small-noise oracle: each injection adds an orthogonal complex Gaussian of
        variance r = sigma2/T, and 1 - F ~ |w_perp|^2 / 2.  Two injections give
        |w_perp|^2 ~ Exp(mean 2r): mean 1 - F = r, median 1 - F = r ln 2."""
        sigma2 = 2e-4 * T
        r = sigma2 / T
        c = cfg(mode="control", num_states=200, reps_per_state=10, sigma2=sigma2)
        records, _ = run_experiment(c, write_outputs=False)
        infid = 1 - np.array([x.F for x in records])
        assert np.mean(infid) == pytest.approx(r, rel=0.08)
        assert np.median(infid) == pytest.approx(r * np.log(2), rel=0.1)

    def test_circuit_syndrome_method(self):
        c = cfg(mode="encoded", syndrome_method="circuit", num_states=3, reps_per_state=1)
        records, _ = run_experiment(c, write_outputs=False)
        assert all(r.F >= 1 - 1e-12 for r in records)


class TestExperiment:
    def test_outputs(self, tmp_path):
        c = cfg(out_dir=str(tmp_path / "out"), sigma2=1e-6)
        records, report = run_experiment(c)
        assert len(records) == 2 * c.total_runs
        rows = list(csv.reader(io.StringIO((tmp_path / "out" / "records.csv").read_text())))
        assert tuple(rows[0]) == RECORD_HEADER and len(rows) == 1 + len(records)
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert set(summary["modes"]) == {"encoded", "control"}
        assert summary["config"]["sigma2"] == 1e-6
        assert sum(summary["syndrome_frequencies"].values()) == c.total_runs
        m = summary["modes"]["control"]
        assert m["ci_f_lo"] <= m["median_f"] <= m["ci_f_hi"]
        assert m["equivalent_p_awgn"] == pytest.approx(2e-3 / (1 + 2e-3))
        for mode in ("encoded", "control"):
            text = (tmp_path / "out" / f"dist_{mode}.csv").read_text()
            assert "# section: cdf" in text and "# section: pdf" in text

    def test_deterministic(self):
        c = cfg(sigma2=1e-5, coeff_sigma=0.01)
        a, _ = run_experiment(c, write_outputs=False)
        b, _ = run_experiment(c, write_outputs=False)
        assert records_csv(a) == records_csv(b)
        d, _ = run_experiment(cfg(sigma2=1e-5, coeff_sigma=0.01, seed=2), write_outputs=False)
        assert records_csv(a) != records_csv(d)

    def test_subset_is_prefix_stable(self):
        # each trajectory owns its stream, so adding states does not disturb earlier ones
        small, _ = run_experiment(cfg(sigma2=1e-5, num_states=2), write_outputs=False)
        big, _ = run_experiment(cfg(sigma2=1e-5, num_states=4), write_outputs=False)
        keyed = {(r.mode, r.state_index, r.rep_index): r for r in big}
        for r in small:
            assert keyed[(r.mode, r.state_index, r.rep_index)] == r

    @pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
    def test_unwritable_out_dir(self, tmp_path):
        locked = tmp_path / "locked"
        locked.mkdir()
        locked.chmod(stat.S_IRUSR | stat.S_IXUSR)
        with pytest.raises(OSError):
            run_experiment(cfg(out_dir=str(locked / "sub")))

    def test_out_dir_under_proc(self):
        with pytest.raises(OSError):
            run_experiment(cfg(out_dir="/proc/qedqec-out"))

    def test_out_dir_is_a_file(self, tmp_path):
        f = tmp_path / "file"
        f.write_text("")
        with pytest.raises(OSError):
            run_experiment(cfg(out_dir=str(f)))

    def test_distribution_csv(self):
        lines = distribution_csv([1.0, 2.0, 3.0], n_bins=2).splitlines()
        assert lines[0] == "# section: cdf"
        assert lines[2:5] == ["1.0,0.3333333333333333", "2.0,0.6666666666666666", "3.0,1.0"]


class TestSweep:
    def test_loglog_slope(self):
        p = [1e-3, 1e-2, 1e-1]
        assert _loglog_slope(p, [2 * x**2 for x in p]) == pytest.approx(2.0)
        assert _loglog_slope([1e-3], [1e-3]) is None
        assert _loglog_slope([0, 1e-3], [0, 1e-3]) is None

    def test_bad_param(self):
        with pytest.raises(ConfigError):
            run_sweep(cfg(), "num_states", [1])
        with pytest.raises(ConfigError):
            run_sweep(cfg(), "sigma2", [])

    def test_zero_noise_point(self):
        result = run_sweep(cfg(num_states=2, reps_per_state=1), "coeff_sigma", [0.0])
        pt = result["points"][0]
        assert pt["encoded"]["mean_infidelity"] <= 1e-12
        assert result["slopes"] == {"encoded": None, "control": None}

    def test_two_points(self):
        result = run_sweep(cfg(mode="control", num_states=50, reps_per_state=4), "coeff_sigma", [0.01, 0.05])
        assert [pt["control"]["equivalent_p"] for pt in result["points"]] == pytest.approx([4e-4, 1e-2])
        assert 0.7 <= result["slopes"]["control"] <= 1.3


@pytest.mark.slow
def test_code_helps_against_gate_coefficient_noise():
    """With independent per-qubit gate noise the encoded median f clearly beats control."""
    p = 3e-2
    c = ExperimentConfig(num_states=40, reps_per_state=5, coeff_sigma=np.sqrt(p / 4), n_boot=500, seed=3)
    _, report = run_experiment(c, write_outputs=False)
    enc, ctl = report.summaries["encoded"], report.summaries["control"]
    assert enc.median_f > ctl.median_f + 1.0
    assert enc.ci_f[0] > ctl.ci_f[1]
