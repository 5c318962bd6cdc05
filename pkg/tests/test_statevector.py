import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vqakit import statevector as sv

from oracles import dense_expectation, random_state

RNG = np.random.default_rng(1234)


def random_unitary(rng, dim):
    mat = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(mat)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


class TestApplyGate:
    def test_hadamard_on_zero(self):
        state = sv.apply_gate(sv.zero_state(1), sv.hadamard_gate(0))
        assert np.allclose(state.amplitudes, [1 / math.sqrt(2)] * 2)

    def test_x_flips(self):
        state = sv.apply_gate(sv.zero_state(1), sv.x_gate(0))
        assert np.allclose(state.amplitudes, [0, 1])

    def test_cnot_builds_bell(self):
        plus = sv.apply_gate(sv.zero_state(2), sv.hadamard_gate(0))
        bell = sv.apply_gate(plus, sv.cnot_gate(0, 1))
        expected = np.zeros(4)
        expected[[0, 3]] = 1 / math.sqrt(2)
        assert np.allclose(bell.amplitudes, expected)

    def test_target_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            sv.apply_gate(sv.zero_state(1), sv.x_gate(3))

    def test_non_unitary_rejected_at_construction(self):
        with pytest.raises(ValueError, match="unitary"):
            sv.GateOp("bad", np.array([[1, 0], [0, 2]]), (0,))

    def test_norm_preserved_along_random_circuit(self):
        rng = np.random.default_rng(7)
        n = 8
        state = sv.zero_state(n)
        for _ in range(100):
            if rng.random() < 0.5:
                gate = sv.GateOp("u1", random_unitary(rng, 2), (rng.integers(n),))
            else:
                a, b = rng.choice(n, size=2, replace=False)
                gate = sv.GateOp("u2", random_unitary(rng, 4), (int(a), int(b)))
            state = sv.apply_gate(state, gate)
        assert abs(np.sum(np.abs(state.amplitudes) ** 2) - 1.0) < 1e-9

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_gate_then_dagger_recovers_input(self, seed):
        rng = np.random.default_rng(seed)
        n = 3
        state = sv.state_from_amplitudes(random_state(rng, n))
        a, b = rng.choice(n, size=2, replace=False)
        gate = sv.GateOp("u2", random_unitary(rng, 4), (int(a), int(b)))
        back = sv.apply_gate(sv.apply_gate(state, gate), gate.dagger())
        assert np.max(np.abs(back.amplitudes - state.amplitudes)) < 1e-10


class TestExpectationPauli:
    def test_z_eigenstate(self):
        assert sv.expectation_pauli(sv.zero_state(1), "Z") == pytest.approx(1.0)

    def test_x_eigenstate(self):
        plus = sv.apply_gate(sv.zero_state(1), sv.hadamard_gate(0))
        assert sv.expectation_pauli(plus, "X") == pytest.approx(1.0)

    def test_ghz3_xxx(self):
        amps = np.zeros(8, dtype=complex)
        amps[[0, 7]] = 1 / math.sqrt(2)
        ghz = sv.state_from_amplitudes(amps)
        # dense 8x8 matrix-vector oracle
        assert dense_expectation(ghz.amplitudes, "XXX") == pytest.approx(1.0)
        assert sv.expectation_pauli(ghz, "XXX") == pytest.approx(1.0, abs=1e-12)

    def test_invalid_label(self):
        with pytest.raises(ValueError, match="invalid Pauli"):
            sv.expectation_pauli(sv.zero_state(1), "Q")

    def test_agrees_with_dense_oracle_all_strings(self):
        rng = np.random.default_rng(3)
        for n in (1, 2, 3):
            state = sv.state_from_amplitudes(random_state(rng, n))
            import itertools

            for labels in itertools.product("IXYZ", repeat=n):
                labels = "".join(labels)
                assert sv.expectation_pauli(state, labels) == pytest.approx(
                    dense_expectation(state.amplitudes, labels), abs=1e-10
                )

    def test_agrees_with_dense_oracle_random_4q(self):
        rng = np.random.default_rng(4)
        state = sv.state_from_amplitudes(random_state(rng, 4))
        for _ in range(60):
            labels = "".join(rng.choice(list("IXYZ"), size=4))
            assert sv.expectation_pauli(state, labels) == pytest.approx(
                dense_expectation(state.amplitudes, labels), abs=1e-10
            )


class TestSampling:
    def test_deterministic_outcome(self):
        counts = sv.sample_counts(sv.zero_state(1), 100, seed=0)
        assert counts.counts == {"0": 100}

    def test_bell_frequency_band(self):
        bell = sv.run_circuit([sv.hadamard_gate(0), sv.cnot_gate(0, 1)], 2)
        shots = 100_000
        counts = sv.sample_counts(bell, shots, seed=5)
        sigma = 0.5 / math.sqrt(shots)
        assert abs(counts.counts["00"] / shots - 0.5) < 3 * sigma

    def test_seed_reproducibility(self):
        bell = sv.run_circuit([sv.hadamard_gate(0), sv.cnot_gate(0, 1)], 2)
        assert sv.sample_counts(bell, 1000, 9).counts == sv.sample_counts(bell, 1000, 9).counts

    def test_zero_shots_rejected(self):
        with pytest.raises(ValueError, match="shots"):
            sv.sample_counts(sv.zero_state(1), 0, 1)

    def test_frequencies_within_five_sigma(self):
        rng = np.random.default_rng(11)
        for n in (2, 4):
            state = sv.state_from_amplitudes(random_state(rng, n))
            shots = 1_000_000
            counts = sv.sample_counts(state, shots, seed=int(rng.integers(2**31)))
            freqs = counts.frequencies()
            probs = state.probabilities()
            sigma = np.sqrt(np.clip(probs * (1 - probs), 1e-12, None) / shots)
            assert np.all(np.abs(freqs - probs) <= 5 * sigma + 1e-9)


class TestReducedDensity:
    def test_bell_marginal_maximally_mixed(self):
        bell = sv.run_circuit([sv.hadamard_gate(0), sv.cnot_gate(0, 1)], 2)
        rho = sv.reduced_density_matrix(bell, [0])
        assert np.allclose(rho.entries, np.eye(2) / 2)

    def test_product_state_factorizes(self):
        state = sv.product_state([(1, 0), (1 / math.sqrt(2), 1 / math.sqrt(2))])
        rho = sv.reduced_density_matrix(state, [0])
        assert np.allclose(rho.entries, np.full((2, 2), 0.5))

    def test_ghz4_middle_trace(self):
        amps = np.zeros(16, dtype=complex)
        amps[[0, 15]] = 1 / math.sqrt(2)
        ghz = sv.state_from_amplitudes(amps)
        rho = sv.reduced_density_matrix(ghz, [2, 3])
        # dense outer-product oracle
        dense = np.outer(amps, amps.conj())
        expected = dense.reshape(4, 4, 4, 4).trace(axis1=1, axis2=3)
        assert np.allclose(rho.entries, expected)
        assert np.allclose(rho.entries, np.diag([0.5, 0, 0, 0.5]))

    def test_cannot_trace_everything(self):
        with pytest.raises(ValueError, match="every qubit"):
            sv.reduced_density_matrix(sv.zero_state(2), [0, 1])

    def test_density_matrix_qubit_guard(self):
        with pytest.raises(ValueError, match="limited"):
            sv.DensityMatrix(9, np.eye(512) / 512)


class TestFidelity:
    def test_identity_case(self):
        rng = np.random.default_rng(0)
        state = sv.state_from_amplitudes(random_state(rng, 2))
        rho = sv.density_from_state(state)
        assert sv.uhlmann_fidelity(rho, rho) == pytest.approx(1.0, abs=1e-10)

    def test_orthogonal_pure_states(self):
        zero = sv.density_from_state(sv.zero_state(1))
        one = sv.density_from_state(sv.basis_state(1, 1))
        assert sv.uhlmann_fidelity(zero, one) == pytest.approx(0.0, abs=1e-12)

    def test_mixed_vs_pure(self):
        mixed = sv.maximally_mixed(1)
        pure = sv.density_from_state(sv.zero_state(1))
        assert sv.uhlmann_fidelity(mixed, pure) == pytest.approx(0.5, abs=1e-10)

    def test_symmetry(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            a = random_state(rng, 2)
            b = random_state(rng, 2)
            mix = 0.3 * np.outer(a, a.conj()) + 0.7 * np.outer(b, b.conj())
            rho = sv.DensityMatrix(2, mix)
            sigma = sv.maximally_mixed(2)
            assert sv.uhlmann_fidelity(rho, sigma) == pytest.approx(
                sv.uhlmann_fidelity(sigma, rho), abs=1e-9
            )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            sv.uhlmann_fidelity(sv.maximally_mixed(1), sv.maximally_mixed(2))


class TestBipartiteEntropy:
    def test_product_state_zero(self):
        state = sv.product_state([(1, 0)] * 3)
        for cut in (1, 2):
            assert sv.bipartite_entropy(state, cut) == pytest.approx(0.0, abs=1e-12)

    def test_bell_ln2(self):
        bell = sv.run_circuit([sv.hadamard_gate(0), sv.cnot_gate(0, 1)], 2)
        assert sv.bipartite_entropy(bell, 1) == pytest.approx(math.log(2), abs=1e-12)

    def test_ghz4_half_cut(self):
        amps = np.zeros(16, dtype=complex)
        amps[[0, 15]] = 1 / math.sqrt(2)
        ghz = sv.state_from_amplitudes(amps)
        # partial-trace oracle: reduced spectrum {1/2, 1/2}
        rho = sv.reduced_density_matrix(ghz, [2, 3])
        eigs = np.sort(np.linalg.eigvalsh(rho.entries))[::-1]
        assert np.allclose(eigs[:2], [0.5, 0.5], atol=1e-12)
        assert sv.bipartite_entropy(ghz, 2) == pytest.approx(math.log(2), abs=1e-12)

    def test_trivial_cut_rejected(self):
        with pytest.raises(ValueError, match="cut"):
            sv.bipartite_entropy(sv.zero_state(2), 0)

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_entropy_equal_on_both_sides(self, seed):
        rng = np.random.default_rng(seed)
        state = sv.state_from_amplitudes(random_state(rng, 4))
        cut = int(rng.integers(1, 4))
        left = sv.reduced_density_matrix(state, range(cut, 4))
        right = sv.reduced_density_matrix(state, range(cut))
        assert sv.von_neumann_entropy(left) == pytest.approx(
            sv.von_neumann_entropy(right), abs=1e-9
        )


class TestStateValidation:
    def test_norm_enforced(self):
        with pytest.raises(ValueError, match="normalized"):
            sv.QubitState(1, np.array([1.0, 1.0]))

    def test_length_enforced(self):
        with pytest.raises(ValueError, match="amplitudes"):
            sv.QubitState(2, np.array([1.0, 0.0]))
