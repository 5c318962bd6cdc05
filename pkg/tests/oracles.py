"""Independent reference implementations used as test oracles.

Everything in here deliberately avoids the toolkit's own code paths:
dense matrix algebra for expectations, a fermionic occupation-basis
Hubbard builder for sector spectra, and a direct multi-controlled gate
constructor for the distribution loaders.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(labels: str) -> np.ndarray:
    mat = np.array([[1.0 + 0j]])
    for lab in labels:
        mat = np.kron(mat, PAULI[lab])
    return mat


def dense_expectation(amplitudes: np.ndarray, labels: str) -> float:
    mat = pauli_matrix(labels)
    return float(np.real(np.vdot(amplitudes, mat @ amplitudes)))


def embed_unitary(matrix: np.ndarray, qubits, num_qubits: int) -> np.ndarray:
    """Full 2**n x 2**n unitary of a small gate, by explicit basis action."""
    dim = 2**num_qubits
    k = len(qubits)
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> (num_qubits - 1 - q)) & 1 for q in range(num_qubits)]
        sub_in = 0
        for pos, q in enumerate(qubits):
            sub_in = (sub_in << 1) | bits[q]
        for sub_out in range(2**k):
            amp = matrix[sub_out, sub_in]
            if amp == 0:
                continue
            new_bits = list(bits)
            for pos, q in enumerate(qubits):
                new_bits[q] = (sub_out >> (k - 1 - pos)) & 1
            row = 0
            for b in new_bits:
                row = (row << 1) | b
            out[row, col] += amp
    return out


def fermionic_sector_matrix(spec) -> np.ndarray:
    """Extended SU(N) Hubbard Hamiltonian in the occupation-number basis.

    Built straight from anticommuting mode algebra (colour-major canonical
    ordering); no qubits involved, so it is an independent check of the
    qubit mapping including boundary parities and flux phases.
    """
    L, N = spec.sites, spec.colours
    alpha = 2 * math.pi * spec.flux / L
    rail_states = []
    for s in range(N):
        rail_states.append(
            [
                sum(1 << site for site in occ)
                for occ in itertools.combinations(range(L), spec.particles[s])
            ]
        )
    basis = list(itertools.product(*rail_states))
    index = {b: k for k, b in enumerate(basis)}
    matrix = np.zeros((len(basis), len(basis)), dtype=complex)

    def count_below(mask: int, site: int) -> int:
        return bin(mask & ((1 << site) - 1)).count("1")

    def add_hop(state, s, src, dst, coeff):
        mask = state[s]
        if not (mask >> src) & 1 or (mask >> dst) & 1:
            return
        sign = (-1) ** count_below(mask, src)
        mask2 = mask & ~(1 << src)
        sign *= (-1) ** count_below(mask2, dst)
        new_state = list(state)
        new_state[s] = mask2 | (1 << dst)
        matrix[index[tuple(new_state)], index[state]] += coeff * sign

    for state in basis:
        diag = 0.0
        for i in range(L):
            occupations = [(state[s] >> i) & 1 for s in range(N)]
            for s1 in range(N):
                for s2 in range(s1 + 1, N):
                    diag += spec.onsite * occupations[s1] * occupations[s2]
            total_i = sum(occupations)
            for r, v_r in enumerate(spec.neighbour, start=1):
                j = (i + r) % L
                total_j = sum((state[s] >> j) & 1 for s in range(N))
                diag += v_r * total_i * total_j
        matrix[index[state], index[state]] += diag
        for s in range(N):
            for r, t_r in enumerate(spec.hopping, start=1):
                for i in range(L):
                    j = (i + r) % L
                    # -t_r e^{i alpha} c^dag_i c_{i+r}: moves j -> i
                    add_hop(state, s, j, i, -t_r * np.exp(1j * alpha))
                    # hermitian conjugate: moves i -> j
                    add_hop(state, s, i, j, -t_r * np.exp(-1j * alpha))
    return matrix


def multi_controlled_ry(
    num_qubits: int, controls, pattern: int, target: int, angle: float
) -> np.ndarray:
    """Ry(angle) on ``target`` when the control qubits read ``pattern``."""
    dim = 2**num_qubits
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    out = np.zeros((dim, dim), dtype=complex)
    k = len(controls)
    for col in range(dim):
        bits = [(col >> (num_qubits - 1 - q)) & 1 for q in range(num_qubits)]
        match = all(
            bits[q] == ((pattern >> (k - 1 - pos)) & 1)
            for pos, q in enumerate(controls)
        )
        if not match:
            out[col, col] = 1.0
            continue
        flipped = col ^ (1 << (num_qubits - 1 - target))
        if bits[target] == 0:
            out[col, col] = c
            out[flipped, col] = s
        else:
            out[col, col] = c
            out[flipped, col] = -s
    return out


def random_state(rng: np.random.Generator, num_qubits: int) -> np.ndarray:
    amps = rng.normal(size=2**num_qubits) + 1j * rng.normal(size=2**num_qubits)
    return amps / np.linalg.norm(amps)
