"""Truncated number-basis backend against brute-force operator oracles."""

import math

import numpy as np
import pytest

from cavitydyn.core import ModelVariant, SystemParams
from cavitydyn.errors import (
    NumericError,
    ParameterError,
    TruncationTooSmall,
    WindowTooShort,
)
from cavitydyn.fock import (
    FockState,
    Truncation,
    build_hamiltonian,
    evolve_state,
    measure,
    prepare_scheme1,
    prepare_scheme2,
    time_average,
)

from helpers import (
    displaced_squeezed_reference,
    expectation,
    hamiltonian_reference,
    initial_matter_mandel_q_reference,
    schroedinger_reference,
    single_mode_ops,
)

SMALL = Truncation(n_matter_max=12, n_photon_max=10)


class TestTruncation:
    def test_dimensions(self):
        assert SMALL.dim_matter == 13
        assert SMALL.dim_photon == 11
        assert SMALL.dim_total == 143

    def test_minimum_cutoff_enforced(self):
        with pytest.raises(ParameterError):
            Truncation(n_matter_max=3, n_photon_max=10)

    def test_auto_sizing_grows_with_amplitude(self):
        small = Truncation.for_scheme1(1.0, 1.0)
        large = Truncation.for_scheme1(4.0, 0.5)
        assert large.n_matter_max > small.n_matter_max

    def test_doubled(self):
        doubled = SMALL.doubled()
        assert doubled.n_matter_max == 24
        assert doubled.n_photon_max == 20


class TestHamiltonian:
    @pytest.mark.parametrize("variant", ["full", "no_diamagnetic", "rwa"])
    def test_matches_reference_construction(self, variant):
        params = SystemParams(gamma=1.1, lam=0.4, variant=ModelVariant.parse(variant))
        h = build_hamiltonian(params, SMALL)
        ref = hamiltonian_reference(1.1, 0.4, SMALL.n_matter_max, SMALL.n_photon_max, variant)
        assert np.max(np.abs(h - ref)) < 1e-12

    def test_hermitian(self):
        h = build_hamiltonian(SystemParams(gamma=0.8, lam=0.6), SMALL)
        assert np.max(np.abs(h - h.conj().T)) == 0.0

    def test_variants_differ_by_self_interaction_term(self):
        lam = 0.5
        full = build_hamiltonian(SystemParams(gamma=1.0, lam=lam), SMALL)
        bare = build_hamiltonian(
            SystemParams(gamma=1.0, lam=lam, variant=ModelVariant.NO_DIAMAGNETIC), SMALL
        )
        _, qa, _, _ = single_mode_ops(SMALL.dim_photon)
        term = 0.5 * lam**2 * np.kron(np.eye(SMALL.dim_matter), qa @ qa)
        assert np.max(np.abs((full - bare) - term)) < 1e-12


class TestPreparation:
    def test_scheme1_against_operator_exponential(self):
        trunc = Truncation(n_matter_max=30, n_photon_max=4)
        state = prepare_scheme1(2.0, 0.6, trunc)
        ref_matter = displaced_squeezed_reference(2.0, 0.6, 31)
        grid = state.as_grid()
        assert np.max(np.abs(grid[:, 1:])) < 1e-12  # photon vacuum
        overlap = abs(np.vdot(ref_matter, grid[:, 0]))
        assert 1.0 - overlap < 1e-8

    def test_scheme1_methods_agree(self):
        trunc = Truncation(n_matter_max=25, n_photon_max=4)
        a = prepare_scheme1(1.5, 0.7, trunc, method="recurrence")
        b = prepare_scheme1(1.5, 0.7, trunc, method="operator")
        assert 1.0 - abs(a.overlap(b)) < 1e-9

    def test_scheme1_moments(self):
        state = prepare_scheme1(3.0, 0.5, Truncation(n_matter_max=36, n_photon_max=4))
        obs = measure(state)
        assert obs.mean_X == pytest.approx(3.0, abs=1e-6)
        assert obs.X2 - obs.mean_X**2 == pytest.approx(0.125, abs=1e-5)
        assert obs.mean_n_photon == pytest.approx(0.0, abs=1e-12)

    def test_scheme1_truncation_guard(self):
        with pytest.raises(TruncationTooSmall):
            prepare_scheme1(3.0, 0.5, Truncation(n_matter_max=8, n_photon_max=4))

    def test_scheme2_poisson_populations(self):
        alpha = 1.2 - 0.7j
        state = prepare_scheme2(alpha, Truncation(n_matter_max=4, n_photon_max=22))
        pops = state.photon_populations()
        mu = abs(alpha) ** 2
        for n in range(8):
            expected = math.exp(-mu) * mu**n / math.factorial(n)
            assert pops[n] == pytest.approx(expected, abs=1e-10)
        obs = measure(state)
        assert obs.mean_q == pytest.approx(math.sqrt(2.0) * alpha.real, abs=1e-9)
        assert obs.mean_p == pytest.approx(math.sqrt(2.0) * alpha.imag, abs=1e-9)
        assert obs.Q_photon == pytest.approx(0.0, abs=1e-9)


class TestEvolution:
    def test_against_direct_exponential(self):
        trunc = Truncation(n_matter_max=6, n_photon_max=12)
        params = SystemParams(gamma=0.9, lam=0.5)
        h = build_hamiltonian(params, trunc)
        psi0 = prepare_scheme2(0.8, trunc)
        times = np.array([0.0, 0.4, 1.1, 2.7])
        states = evolve_state(h, psi0, times)
        refs = schroedinger_reference(h, psi0.amplitudes, times)
        for state, ref in zip(states, refs):
            assert np.max(np.abs(state.amplitudes - ref)) < 1e-10

    def test_methods_agree(self):
        trunc = Truncation(n_matter_max=8, n_photon_max=13)
        params = SystemParams(gamma=1.0, lam=0.3)
        h = build_hamiltonian(params, trunc)
        psi0 = prepare_scheme2(1.0, trunc)
        times = np.linspace(0.0, 5.0, 11)
        dense = evolve_state(h, psi0, times, method="eigh")
        krylov = evolve_state(h, psi0, times, method="krylov")
        for a, b in zip(dense, krylov):
            assert np.max(np.abs(a.amplitudes - b.amplitudes)) < 1e-8

    def test_norm_and_energy_conserved(self):
        trunc = Truncation(n_matter_max=16, n_photon_max=14)
        params = SystemParams(gamma=1.0, lam=0.2)
        h = build_hamiltonian(params, trunc)
        psi0 = prepare_scheme1(1.5, 0.8, trunc)
        times = np.linspace(0.0, 60.0, 121)
        states = evolve_state(h, psi0, times)
        e0 = expectation(psi0.amplitudes, h).real
        for state in states:
            assert abs(np.linalg.norm(state.amplitudes) - 1.0) < 1e-10
            assert abs(expectation(state.amplitudes, h).real - e0) < 1e-9


class TestMeasurement:
    def test_against_brute_force_operators(self):
        # The oracle operators act on a basis two levels larger than the
        # state's support, so products like x @ x keep every intermediate
        # path and match the untruncated operator on the populated levels.
        trunc = Truncation(n_matter_max=9, n_photon_max=7)
        db, da = trunc.dim_matter, trunc.dim_photon
        rng = np.random.default_rng(7)
        psi = rng.normal(size=trunc.dim_total) + 1j * rng.normal(size=trunc.dim_total)
        psi /= np.linalg.norm(psi)
        state = FockState(amplitudes=psi, trunc=trunc)
        obs = measure(state)

        padded = np.zeros((db + 2, da + 2), dtype=complex)
        padded[:db, :da] = psi.reshape(db, da)
        psi_big = padded.reshape(-1)
        _, xb, pb, nb = single_mode_ops(db + 2)
        _, qa, pa, na = single_mode_ops(da + 2)
        ib, ia = np.eye(db + 2), np.eye(da + 2)
        def two_mode(op_b, op_a):
            return expectation(psi_big, np.kron(op_b, op_a)).real

        assert obs.mean_X == pytest.approx(two_mode(xb, ia), abs=1e-12)
        assert obs.mean_P == pytest.approx(two_mode(pb, ia), abs=1e-12)
        assert obs.mean_q == pytest.approx(two_mode(ib, qa), abs=1e-12)
        assert obs.mean_p == pytest.approx(two_mode(ib, pa), abs=1e-12)
        assert obs.mean_n_photon == pytest.approx(two_mode(ib, na), abs=1e-12)
        assert obs.mean_n_matter == pytest.approx(two_mode(nb, ia), abs=1e-12)
        assert obs.X2 == pytest.approx(two_mode(xb @ xb, ia), abs=1e-12)
        assert obs.q2 == pytest.approx(two_mode(ib, qa @ qa), abs=1e-12)
        assert obs.P2 == pytest.approx(two_mode(pb @ pb, ia), abs=1e-12)
        assert obs.p2 == pytest.approx(two_mode(ib, pa @ pa), abs=1e-12)
        assert obs.XP_sym == pytest.approx(
            two_mode((xb @ pb + pb @ xb) / 2.0, ia), abs=1e-12
        )
        assert obs.qp_sym == pytest.approx(
            two_mode(ib, (qa @ pa + pa @ qa) / 2.0), abs=1e-12
        )
        var_expected = two_mode(ib, na @ na) - two_mode(ib, na) ** 2
        assert obs.var_n_photon == pytest.approx(var_expected, abs=1e-10)

    def test_initial_matter_mandel_q_closed_form(self):
        # Var n converges more slowly with the cutoff than the position
        # moments, so the auto-sized basis is doubled here.
        for x0, w in ((3.0, 0.5), (2.0, 0.8), (1.5, 1.3)):
            trunc = Truncation.for_scheme1(x0, w).doubled()
            obs = measure(prepare_scheme1(x0, w, trunc))
            expected = initial_matter_mandel_q_reference(x0, w)
            assert obs.Q_matter == pytest.approx(expected, abs=1e-8)

    def test_mandel_q_undefined_for_empty_mode(self):
        trunc = Truncation(n_matter_max=12, n_photon_max=4)
        state = prepare_scheme1(1.0, 1.0, trunc)
        assert measure(state).Q_photon is None


class TestTimeAverage:
    def test_periodic_signal_exact(self):
        times = np.linspace(0.0, 8.25 * 2 * math.pi, 30_001)
        result = time_average(times, np.cos(times) ** 2, 2 * math.pi)
        assert result.value == pytest.approx(0.5, abs=1e-9)
        assert result.periods_used == 8

    def test_uses_whole_periods_only(self):
        period = 2 * math.pi
        times = np.linspace(0.0, 3.6 * period, 20_001)
        values = 1.0 + np.sin(times)
        result = time_average(times, values, period)
        assert result.value == pytest.approx(1.0, abs=1e-9)
        assert result.periods_used == 3

    def test_short_window_rejected(self):
        times = np.linspace(0.0, 4.0, 101)
        with pytest.raises(WindowTooShort):
            time_average(times, np.cos(times), 2 * math.pi)

    def test_nonuniform_grid_rejected(self):
        times = np.array([0.0, 1.0, 2.0, 3.5, 4.0, 5.0, 6.0, 7.0, 8.0])
        with pytest.raises(ParameterError):
            time_average(times, np.ones_like(times), 2.0)

    def test_leading_undefined_samples_trimmed(self):
        period = 2 * math.pi
        times = np.linspace(0.0, 5.2 * period, 15_001)
        values = 2.0 + np.cos(times)
        values[0] = math.nan
        result = time_average(times, values, period)
        assert result.value == pytest.approx(2.0, abs=1e-6)

    def test_interior_undefined_samples_rejected(self):
        period = 2 * math.pi
        times = np.linspace(0.0, 5.2 * period, 15_001)
        values = 2.0 + np.cos(times)
        values[7_000] = math.nan
        with pytest.raises(NumericError):
            time_average(times, values, period)
