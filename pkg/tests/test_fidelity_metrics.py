import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qedqec.errors import InvalidArgumentError
from qedqec.fidelity_metrics import (
    F_CAP,
    bootstrap_ci,
    channel_gate_fidelity,
    empirical_distribution,
    is_capped,
    log_fidelities,
    log_fidelity,
    median,
    state_fidelity,
    summarize,
)
from qedqec.noise_channels import depolarizing_channel, apply_channel
from qedqec.qubit_core import PureState, haar_random_state


class TestLogFidelity:
    def test_spot_values(self):
        assert log_fidelity(0.99463) == pytest.approx(2.270, abs=1e-3)
        assert log_fidelity(0.9999764) == pytest.approx(4.627, abs=2e-3)

    def test_trivial_values(self):
        assert log_fidelity(0.0) == 0.0
        assert log_fidelity(0.9) == pytest.approx(1.0)
        assert log_fidelity(0.999) == pytest.approx(3.0)

    def test_cap(self):
        assert log_fidelity(1.0) == F_CAP
        assert is_capped(1.0) and not is_capped(0.999)
        assert log_fidelity(1 - 1e-16) == F_CAP

    @pytest.mark.parametrize("bad", [-0.1, 1.1, float("nan")])
    def test_out_of_range(self, bad):
        with pytest.raises(InvalidArgumentError):
            log_fidelity(bad)

    @given(st.floats(0.0, 1.0))
    def test_vectorized_agrees(self, F):
        assert log_fidelities(np.array([F]))[0] == pytest.approx(log_fidelity(F))

    @given(st.floats(0.0, 0.999999), st.floats(0.0, 0.999999))
    def test_monotone(self, a, b):
        if a < b:
            assert log_fidelity(a) <= log_fidelity(b)

    def test_vector_range_check(self):
        with pytest.raises(InvalidArgumentError):
            log_fidelities([0.5, 1.5])


class TestStateFidelity:
    def test_phase_invariant(self, rng):
        psi = haar_random_state(1, rng)
        assert state_fidelity(psi, PureState(np.exp(0.7j) * psi.amplitudes)) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert state_fidelity(PureState.basis(1, 0), PureState.basis(1, 1)) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            state_fidelity(PureState.basis(1, 0), PureState.basis(2, 0))


class TestChannelFidelity:
    def test_identity_channel(self, rng):
        psi = haar_random_state(1, rng)
        rho = np.outer(psi.amplitudes, psi.amplitudes.conj())
        assert channel_gate_fidelity(np.eye(2), rho, rho, psi) == pytest.approx(1.0)

    def test_depolarizing_closed_form(self, rng):
        # fidelity^2 of a depolarized pure qubit is 1 - p/2
        psi = haar_random_state(1, rng)
        rho = np.outer(psi.amplitudes, psi.amplitudes.conj())
        for p in (0.01, 0.2, 0.9):
            out = apply_channel(depolarizing_channel(1, p), rho)
            assert channel_gate_fidelity(np.eye(2), rho, out, psi) == pytest.approx(math.sqrt(1 - p / 2))

    def test_rho_mismatch(self):
        psi = PureState.basis(1, 0)
        with pytest.raises(InvalidArgumentError):
            channel_gate_fidelity(np.eye(2), np.eye(2) / 2, np.eye(2) / 2, psi)


class TestMedianBootstrap:
    def test_median(self):
        assert median([3, 1, 2]) == 2
        assert median([1, 2, 3, 4]) == 2.5
        with pytest.raises(InvalidArgumentError):
            median([])

    def test_constant_sample(self):
        assert bootstrap_ci([2.0] * 50, n_boot=200) == (2.0, 2.0)

    def test_deterministic(self):
        x = np.random.default_rng(0).normal(size=100)
        assert bootstrap_ci(x, rng=5) == bootstrap_ci(x, rng=5)

    def test_arguments(self):
        with pytest.raises(InvalidArgumentError):
            bootstrap_ci([], n_boot=200)
        with pytest.raises(InvalidArgumentError):
            bootstrap_ci([1.0], level=1.0)
        with pytest.raises(InvalidArgumentError):
            bootstrap_ci([1.0], n_boot=10)

    def test_coverage(self):
        """95% percentile interval for a normal median covers the truth >= 92% of the time."""
        rng = np.random.default_rng(11)
        trials, hits = 300, 0
        for _ in range(trials):
            x = rng.normal(1.0, 2.0, size=200)
            lo, hi = bootstrap_ci(x, n_boot=1000, rng=rng)
            hits += lo <= 1.0 <= hi
        assert hits / trials >= 0.92

    def test_width_shrinks(self):
        rng = np.random.default_rng(3)
        small = bootstrap_ci(rng.normal(size=100), n_boot=2000, rng=1)
        large = bootstrap_ci(rng.normal(size=10_000), n_boot=2000, rng=1)
        assert (large[1] - large[0]) < (small[1] - small[0]) / 5


class TestSummaries:
    def test_summarize(self):
        F = np.array([0.9, 0.99, 0.999, 1.0, 0.99])
        s = summarize(F, n_boot=500)
        assert s.median_F == 0.99
        assert s.median_f == pytest.approx(2.0)
        assert s.ci_F[0] <= s.median_F <= s.ci_F[1]
        assert s.ci_f[0] <= s.median_f <= s.ci_f[1]
        assert s.n_samples == 5 and s.as_dict()["n_boot"] == 500

    def test_ci_scales_agree(self):
        # log_fidelity is monotone, so the f interval is the image of the F interval
        F = 1 - 10 ** -np.random.default_rng(0).uniform(1, 4, size=301)
        s = summarize(F, n_boot=1000)
        assert s.ci_f[0] == pytest.approx(log_fidelity(s.ci_F[0]))
        assert s.ci_f[1] == pytest.approx(log_fidelity(s.ci_F[1]))

    def test_empirical_distribution(self):
        d = empirical_distribution([3.0, 1.0, 2.0, 2.0], n_bins=4)
        np.testing.assert_array_equal(d.cdf_x, [1, 2, 2, 3])
        np.testing.assert_allclose(d.cdf_y, [0.25, 0.5, 0.75, 1.0])
        assert np.sum(d.density * np.diff(d.bin_edges)) == pytest.approx(1.0)

    def test_empirical_degenerate(self):
        d = empirical_distribution([5.0, 5.0], n_bins=3)
        assert d.bin_edges[0] < 5 < d.bin_edges[-1]
        with pytest.raises(InvalidArgumentError):
            empirical_distribution([])
