"""Dense statevector simulation for small qubit registers.

Conventions used throughout the package:

* Qubit 0 is the most significant bit of a basis index: the basis state
  |q0 q1 ... q_{n-1}> has index sum_k q_k * 2^(n-1-k), and bitstrings are
  written with qubit 0 first.
* States are immutable values; every operation takes a state in and
  returns a new value, so states can be shared freely between threads.
* All randomness flows through explicitly seeded numpy generators.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import cos, sin, sqrt

import numpy as np

ATOL_NORM = 1e-10
ATOL_UNITARY = 1e-10
MAX_DENSITY_QUBITS = 8

SQRT2_INV = 1.0 / sqrt(2.0)

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * SQRT2_INV
S_MATRIX = np.array([[1, 0], [0, 1j]], dtype=complex)
SDG_MATRIX = S_MATRIX.conj().T
CNOT_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def rng_from_seed(seed: int | np.random.SeedSequence) -> np.random.Generator:
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class ShotsMode:
    """Finite-measurement mode marker: every consumer draws from ``seed``."""

    shots: int
    seed: int

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")


def child_seed(seed: int, *indices: int) -> np.random.SeedSequence:
    """Deterministic derived stream for (seed, index, ...) tuples."""
    return np.random.SeedSequence(entropy=seed, spawn_key=tuple(indices))


@dataclass(frozen=True)
class QubitState:
    """Pure state of ``num_qubits`` qubits as a dense amplitude vector."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.num_qubits,):
            raise ValueError(
                f"expected {2**self.num_qubits} amplitudes, got {amps.shape}"
            )
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > ATOL_NORM:
            raise ValueError(f"state is not normalized: |psi|^2 = {norm}")
        object.__setattr__(self, "amplitudes", amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def zero_state(num_qubits: int) -> QubitState:
    amps = np.zeros(2**num_qubits, dtype=complex)
    amps[0] = 1.0
    return QubitState(num_qubits, amps)


def basis_state(num_qubits: int, index: int) -> QubitState:
    amps = np.zeros(2**num_qubits, dtype=complex)
    amps[index] = 1.0
    return QubitState(num_qubits, amps)


def state_from_amplitudes(amplitudes) -> QubitState:
    amps = np.asarray(amplitudes, dtype=complex)
    n = int(round(np.log2(amps.size)))
    if 2**n != amps.size:
        raise ValueError("amplitude count must be a power of two")
    return QubitState(n, amps)


def product_state(single_qubit_amplitudes) -> QubitState:
    """Tensor product of per-qubit (a|0> + b|1>) amplitude pairs."""
    amps = np.array([1.0 + 0j])
    for pair in single_qubit_amplitudes:
        amps = np.kron(amps, np.asarray(pair, dtype=complex))
    return state_from_amplitudes(amps)


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed state on up to ``MAX_DENSITY_QUBITS`` qubits (diagnostic use)."""

    num_qubits: int
    entries: np.ndarray

    def __post_init__(self):
        if self.num_qubits > MAX_DENSITY_QUBITS:
            raise ValueError(
                f"density matrices limited to {MAX_DENSITY_QUBITS} qubits"
            )
        entries = np.asarray(self.entries, dtype=complex)
        dim = 2**self.num_qubits
        if entries.shape != (dim, dim):
            raise ValueError(f"expected {dim}x{dim} matrix, got {entries.shape}")
        object.__setattr__(self, "entries", entries)

    def validate(self, atol: float = 1e-8) -> None:
        ent = self.entries
        if not np.allclose(ent, ent.conj().T, atol=atol):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(ent).real - 1.0) > atol:
            raise ValueError(f"trace is {np.trace(ent).real}, expected 1")
        eigs = np.linalg.eigvalsh(ent)
        if eigs.min() < -max(atol, 1e-10):
            raise ValueError(f"negative eigenvalue {eigs.min()}")


def density_from_state(state: QubitState) -> DensityMatrix:
    amps = state.amplitudes
    return DensityMatrix(state.num_qubits, np.outer(amps, amps.conj()))


def maximally_mixed(num_qubits: int) -> DensityMatrix:
    dim = 2**num_qubits
    return DensityMatrix(num_qubits, np.eye(dim, dtype=complex) / dim)


@dataclass(frozen=True)
class GateOp:
    """Concrete 1- or 2-qubit unitary acting on specific qubits.

    ``generator`` holds G with U = exp(-i * angle * G) for parametrised
    gates (used for analytic differentiation); ``shift_radius`` is the
    eigenvalue radius r when G has exactly two eigenvalues +-r.
    """

    name: str
    matrix: np.ndarray
    qubits: tuple[int, ...]
    generator: np.ndarray | None = None
    shift_radius: float | None = None

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        k = len(self.qubits)
        if k not in (1, 2) or mat.shape != (2**k, 2**k):
            raise ValueError(f"gate {self.name}: bad shape {mat.shape} for {k} qubits")
        if len(set(self.qubits)) != k:
            raise ValueError(f"gate {self.name}: duplicate target qubits")
        if not np.allclose(mat.conj().T @ mat, np.eye(2**k), atol=ATOL_UNITARY):
            raise ValueError(f"gate {self.name}: matrix is not unitary")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "qubits", tuple(self.qubits))

    def dagger(self) -> "GateOp":
        return GateOp(self.name + "_dg", self.matrix.conj().T, self.qubits)


# Fixed gates.


def x_gate(q: int) -> GateOp:
    return GateOp("x", PAULI_MATRICES["X"], (q,))


def y_gate(q: int) -> GateOp:
    return GateOp("y", PAULI_MATRICES["Y"], (q,))


def z_gate(q: int) -> GateOp:
    return GateOp("z", PAULI_MATRICES["Z"], (q,))


def hadamard_gate(q: int) -> GateOp:
    return GateOp("h", HADAMARD, (q,))


def s_gate(q: int) -> GateOp:
    return GateOp("s", S_MATRIX, (q,))


def sdg_gate(q: int) -> GateOp:
    return GateOp("sdg", SDG_MATRIX, (q,))


def cnot_gate(control: int, target: int) -> GateOp:
    return GateOp("cnot", CNOT_MATRIX, (control, target))


# Parametrised gates; U = exp(-i * theta * G).


def ry_matrix(theta: float) -> np.ndarray:
    c, s = cos(theta / 2), sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def rx_matrix(theta: float) -> np.ndarray:
    c, s = cos(theta / 2), sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def phase_matrix(phi: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * phi)]).astype(complex)


def crz_matrix(theta: float) -> np.ndarray:
    return np.diag(
        [1.0, 1.0, np.exp(-0.5j * theta), np.exp(0.5j * theta)]
    ).astype(complex)


def hopping_matrix(theta: float) -> np.ndarray:
    """exp(-i theta (XX + YY)/2): the parametrised-iSWAP hopping block."""
    c, s = cos(theta), sin(theta)
    return np.array(
        [
            [1, 0, 0, 0],
            [0, c, -1j * s, 0],
            [0, -1j * s, c, 0],
            [0, 0, 0, 1],
        ],
        dtype=complex,
    )


def rxy_matrix(theta: float) -> np.ndarray:
    g = np.kron(PAULI_MATRICES["X"], PAULI_MATRICES["Y"]) / 2.0
    return _expm_two_level(g, theta)


def ryx_matrix(theta: float) -> np.ndarray:
    g = np.kron(PAULI_MATRICES["Y"], PAULI_MATRICES["X"]) / 2.0
    return _expm_two_level(g, theta)


def _expm_two_level(generator: np.ndarray, theta: float) -> np.ndarray:
    # generator with g^2 = (r^2) I on each invariant block: use eigh.
    vals, vecs = np.linalg.eigh(generator)
    return (vecs * np.exp(-1j * theta * vals)) @ vecs.conj().T


def apply_unitary_to_array(
    arr: np.ndarray, matrix: np.ndarray, qubits: tuple[int, ...], num_qubits: int
) -> np.ndarray:
    """Apply a k-qubit unitary to an array shaped (2**n,) or (2**n, batch)."""
    k = len(qubits)
    tail = arr.shape[1:]
    tensor = arr.reshape((2,) * num_qubits + tail)
    tensor = np.moveaxis(tensor, qubits, range(k))
    moved_shape = tensor.shape
    out = matrix @ tensor.reshape(2**k, -1)
    out = out.reshape(moved_shape)
    out = np.moveaxis(out, range(k), qubits)
    return out.reshape((2**num_qubits,) + tail)


def apply_gate(state: QubitState, gate: GateOp) -> QubitState:
    """Apply ``gate`` to ``state``; pure, norm-preserving."""
    for q in gate.qubits:
        if not 0 <= q < state.num_qubits:
            raise ValueError(f"gate {gate.name}: qubit {q} out of range")
    amps = apply_unitary_to_array(
        state.amplitudes, gate.matrix, gate.qubits, state.num_qubits
    )
    return QubitState(state.num_qubits, amps)


def run_circuit(
    gates, num_qubits: int, initial: QubitState | None = None
) -> QubitState:
    state = initial if initial is not None else zero_state(num_qubits)
    amps = state.amplitudes
    for gate in gates:
        for q in gate.qubits:
            if not 0 <= q < num_qubits:
                raise ValueError(f"gate {gate.name}: qubit {q} out of range")
        amps = apply_unitary_to_array(amps, gate.matrix, gate.qubits, num_qubits)
    return QubitState(num_qubits, amps)


def _support_parities(num_qubits: int, support: list[int]) -> np.ndarray:
    """(-1)**(number of 1-bits on ``support``) for every basis index."""
    idx = np.arange(2**num_qubits)
    bits = np.zeros(2**num_qubits, dtype=np.int64)
    for q in support:
        bits += (idx >> (num_qubits - 1 - q)) & 1
    return 1.0 - 2.0 * (bits % 2)


def expectation_pauli(state: QubitState, labels: str) -> float:
    """<psi| P |psi> for the Pauli string ``labels`` (one of IXYZ per qubit).

    X and Y factors are handled by rotating a scratch copy into the Z basis
    (H, and H S-dagger respectively), after which the expectation is a
    parity-weighted sum of probabilities.
    """
    if len(labels) != state.num_qubits:
        raise ValueError(
            f"label length {len(labels)} != register size {state.num_qubits}"
        )
    amps = state.amplitudes
    support = []
    for q, lab in enumerate(labels):
        if lab == "I":
            continue
        if lab == "X":
            amps = apply_unitary_to_array(amps, HADAMARD, (q,), state.num_qubits)
        elif lab == "Y":
            amps = apply_unitary_to_array(
                amps, HADAMARD @ SDG_MATRIX, (q,), state.num_qubits
            )
        elif lab != "Z":
            raise ValueError(f"invalid Pauli label {lab!r}")
        support.append(q)
    if not support:
        return 1.0
    probs = np.abs(amps) ** 2
    return float(np.dot(_support_parities(state.num_qubits, support), probs))


@dataclass(frozen=True)
class ShotCounts:
    """Computational-basis measurement record (bitstrings qubit-0 first)."""

    num_qubits: int
    counts: dict[str, int]
    total_shots: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.total_shots:
            raise ValueError("counts do not sum to total_shots")

    def frequencies(self) -> np.ndarray:
        freqs = np.zeros(2**self.num_qubits)
        for bits, c in self.counts.items():
            freqs[int(bits, 2)] = c / self.total_shots
        return freqs

    def count_vector(self) -> np.ndarray:
        vec = np.zeros(2**self.num_qubits, dtype=np.int64)
        for bits, c in self.counts.items():
            vec[int(bits, 2)] = c
        return vec


def sample_counts(state: QubitState, shots: int, seed: int) -> ShotCounts:
    """Multinomial sample from |amplitudes|^2; deterministic for fixed seed."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = rng_from_seed(seed)
    probs = state.probabilities()
    probs = probs / probs.sum()
    draws = rng.multinomial(shots, probs)
    n = state.num_qubits
    counts = {
        format(i, f"0{n}b"): int(c) for i, c in enumerate(draws) if c > 0
    }
    return ShotCounts(n, counts, shots)


def reduced_density_matrix(state: QubitState, traced_qubits) -> DensityMatrix:
    """Partial trace over ``traced_qubits``; kept qubits stay in ascending order."""
    traced = sorted(set(traced_qubits))
    n = state.num_qubits
    for q in traced:
        if not 0 <= q < n:
            raise ValueError(f"traced qubit {q} out of range")
    keep = [q for q in range(n) if q not in traced]
    if not keep:
        raise ValueError("cannot trace out every qubit")
    tensor = state.amplitudes.reshape((2,) * n)
    tensor = np.transpose(tensor, keep + traced)
    mat = tensor.reshape(2 ** len(keep), 2 ** len(traced))
    return DensityMatrix(len(keep), mat @ mat.conj().T)


def purity(rho: DensityMatrix) -> float:
    return float(np.trace(rho.entries @ rho.entries).real)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """Entropy (natural log) from the eigenvalues of ``rho``."""
    eigs = np.linalg.eigvalsh(rho.entries)
    eigs = eigs[eigs > 1e-15]
    return float(-np.sum(eigs * np.log(eigs)))


def entropy_from_probabilities(probs: np.ndarray) -> float:
    p = np.asarray(probs, dtype=float)
    p = p[p > 1e-300]
    return float(-np.sum(p * np.log(p)))


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(matrix)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def uhlmann_fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """F(rho, sigma) = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 in [0, 1]."""
    if rho.num_qubits != sigma.num_qubits:
        raise ValueError("dimension mismatch")
    for dm in (rho, sigma):
        eigs = np.linalg.eigvalsh(dm.entries)
        if eigs.min() < -1e-8:
            raise ValueError(f"input not positive semidefinite: {eigs.min()}")
    root = _psd_sqrt(rho.entries)
    inner = root @ sigma.entries @ root
    vals = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    fid = float(np.sum(np.sqrt(vals)) ** 2)
    return min(max(fid, 0.0), 1.0)


def bipartite_entropy(state: QubitState, cut: int) -> float:
    """Entanglement entropy (natural log) across qubits [0, cut) vs [cut, n)."""
    if not 0 < cut < state.num_qubits:
        raise ValueError(f"cut {cut} must split the register")
    mat = state.amplitudes.reshape(2**cut, -1)
    svals = np.linalg.svd(mat, compute_uv=False)
    probs = svals**2
    probs = probs[probs > 1e-15]
    return float(-np.sum(probs * np.log(probs)))


def state_fidelity(a: QubitState, b: QubitState) -> float:
    return float(np.abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
