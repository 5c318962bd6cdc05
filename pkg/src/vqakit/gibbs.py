"""Variational Gibbs-state preparation on a doubled register.

An ancilla unitary shapes the occupation distribution, transversal CNOTs
copy it onto the system register as a classical mixture, and a system
unitary rotates computational states into the eigenbasis.  The free
energy <H> - S/beta is exact in statevector mode; shot mode estimates the
energy from grouped measurements and the entropy from ancilla counts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import hamiltonian as ham
from .ansatz import (
    ParametrizedCircuit,
    bind_parameters,
    build_hw_efficient_ry,
    build_parity_brickwall,
    expectation_with_gradient,
)
from .hamiltonian import PauliHamiltonian
from .optimize import Objective, OptimizationResult, OptimizerConfig, multi_start
from .statevector import (
    DensityMatrix,
    QubitState,
    ShotCounts,
    ShotsMode,
    apply_unitary_to_array,
    child_seed,
    cnot_gate,
    entropy_from_probabilities,
    run_circuit,
    sample_counts,
    state_from_amplitudes,
    uhlmann_fidelity,
)

ENTROPY_CLAMP = 1e-30


@dataclass(frozen=True)
class GibbsProblem:
    hamiltonian: PauliHamiltonian
    beta: float
    ancilla_ansatz: ParametrizedCircuit
    system_ansatz: ParametrizedCircuit
    mode: str | ShotsMode = "statevector"
    optimizer: OptimizerConfig = field(
        default_factory=lambda: OptimizerConfig("quasi_newton", max_evaluations=20_000)
    )
    runs: int = 1
    seed: int = 0

    def __post_init__(self):
        n = self.hamiltonian.num_qubits
        if self.ancilla_ansatz.num_qubits != n or self.system_ansatz.num_qubits != n:
            raise ValueError("both ansatz registers must match the Hamiltonian size")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")

    @property
    def num_qubits(self) -> int:
        return self.hamiltonian.num_qubits

    @property
    def num_params(self) -> int:
        return self.ancilla_ansatz.num_params + self.system_ansatz.num_params

    def split_params(self, params) -> tuple[np.ndarray, np.ndarray]:
        params = np.asarray(params, dtype=float)
        if params.shape != (self.num_params,):
            raise ValueError(
                f"expected {self.num_params} parameters, got {params.shape}"
            )
        k = self.ancilla_ansatz.num_params
        return params[:k], params[k:]


def gibbs_circuit(problem: GibbsProblem, params) -> QubitState:
    """Literal 2n-qubit preparation: U_A on A, CNOT_{A_i S_i}, U_S on S.

    Qubits 0..n-1 form the ancilla register A, qubits n..2n-1 the system
    register S.
    """
    theta, phi = problem.split_params(params)
    n = problem.num_qubits
    gates = []
    for gate in bind_parameters(problem.ancilla_ansatz, theta):
        gates.append(_shift_gate(gate, 0))
    for i in range(n):
        gates.append(cnot_gate(i, n + i))
    for gate in bind_parameters(problem.system_ansatz, phi):
        gates.append(_shift_gate(gate, n))
    return run_circuit(gates, 2 * n)


def _shift_gate(gate, offset: int):
    from .statevector import GateOp

    if offset == 0:
        return gate
    return GateOp(
        gate.name,
        gate.matrix,
        tuple(q + offset for q in gate.qubits),
        gate.generator,
        gate.shift_radius,
    )


# --- factored statevector evaluation -----------------------------------------


def _ancilla_amplitudes(problem: GibbsProblem, theta: np.ndarray) -> np.ndarray:
    n = problem.num_qubits
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = 1.0
    for gate in bind_parameters(problem.ancilla_ansatz, theta):
        amps = apply_unitary_to_array(amps, gate.matrix, gate.qubits, n)
    return amps


def _system_unitary(problem: GibbsProblem, phi: np.ndarray) -> np.ndarray:
    n = problem.num_qubits
    unitary = np.eye(2**n, dtype=complex)
    for gate in bind_parameters(problem.system_ansatz, phi):
        unitary = apply_unitary_to_array(unitary, gate.matrix, gate.qubits, n)
    return unitary


def occupation_probabilities(problem: GibbsProblem, params) -> np.ndarray:
    """Spectrum of the prepared system state (independent of the system
    unitary): squared first-column amplitudes of the ancilla unitary."""
    theta, _ = problem.split_params(params)
    return np.abs(_ancilla_amplitudes(problem, theta)) ** 2


def prepared_density(problem: GibbsProblem, params) -> DensityMatrix:
    theta, phi = problem.split_params(params)
    probs = np.abs(_ancilla_amplitudes(problem, theta)) ** 2
    unitary = _system_unitary(problem, phi)
    rho = (unitary * probs) @ unitary.conj().T
    return DensityMatrix(problem.num_qubits, rho)


def free_energy(problem: GibbsProblem, params) -> float:
    """Objective <H>_S - S(A)/beta (beta = 0 reduces to -S)."""
    if problem.mode == "statevector":
        theta, phi = problem.split_params(params)
        probs = np.abs(_ancilla_amplitudes(problem, theta)) ** 2
        entropy = entropy_from_probabilities(probs)
        if problem.beta == 0.0:
            return -entropy
        unitary = _system_unitary(problem, phi)
        h_matrix = ham.to_matrix(problem.hamiltonian)
        energies = np.real(np.sum(unitary.conj() * (h_matrix @ unitary), axis=0))
        return float(probs @ energies - entropy / problem.beta)
    return _free_energy_sampled(problem, params, evaluation_index=0)


def _free_energy_sampled(
    problem: GibbsProblem, params, evaluation_index: int
) -> float:
    mode = problem.mode
    n = problem.num_qubits
    state = gibbs_circuit(problem, params)
    # Entropy: ancilla counts in the computational basis.
    counts = sample_counts(
        state, mode.shots, child_seed(mode.seed, evaluation_index, 0)
    )
    ancilla_counts = marginal_counts(counts, range(n))
    entropy, _ = entropy_ml(ancilla_counts)
    if problem.beta == 0.0:
        return -entropy
    # Energy: grouped measurements on the system register.
    h_embedded = _embed_on_system(problem.hamiltonian, n)
    groups = ham.group_commuting(h_embedded, "qubit_wise")
    energy = problem.hamiltonian.identity_offset
    for k, group in enumerate(groups):
        energy += ham.group_expectation_sampled(
            group, state, mode.shots, child_seed(mode.seed, evaluation_index, k + 1)
        )
    return float(energy - entropy / problem.beta)


def _embed_on_system(h: PauliHamiltonian, n: int) -> PauliHamiltonian:
    raw = [(t.coefficient, "I" * n + t.labels) for t in h.terms]
    return ham.hamiltonian_from_terms(2 * n, raw, 0.0)


def marginal_counts(counts: ShotCounts, kept_qubits) -> ShotCounts:
    kept = list(kept_qubits)
    merged: dict[str, int] = {}
    for bits, c in counts.counts.items():
        key = "".join(bits[q] for q in kept)
        merged[key] = merged.get(key, 0) + c
    return ShotCounts(len(kept), merged, counts.total_shots)


def free_energy_objective(problem: GibbsProblem) -> Objective:
    """Objective over the joint (ancilla, system) parameter vector.

    Statevector mode carries an exact reverse-mode gradient when both
    ansatz circuits support it.
    """
    if problem.mode != "statevector":
        counter = {"evaluation": 0}

        def evaluate_sampled(params: np.ndarray) -> float:
            counter["evaluation"] += 1
            return _free_energy_sampled(problem, params, counter["evaluation"])

        return Objective(problem.num_params, evaluate_sampled)

    h_matrix = ham.to_matrix(problem.hamiltonian)
    k_a = problem.ancilla_ansatz.num_params
    beta = problem.beta

    def evaluate(params: np.ndarray) -> float:
        return free_energy(problem, params)

    if not (
        problem.ancilla_ansatz.supports_adjoint
        and problem.system_ansatz.supports_adjoint
    ):
        return Objective(problem.num_params, evaluate)

    def gradient(params: np.ndarray) -> np.ndarray:
        theta, phi = problem.split_params(params)
        amps = _ancilla_amplitudes(problem, theta)
        probs = np.abs(amps) ** 2
        unitary = _system_unitary(problem, phi)
        energies = np.real(np.sum(unitary.conj() * (h_matrix @ unitary), axis=0))
        log_terms = np.log(np.clip(probs, ENTROPY_CLAMP, None)) + 1.0
        if beta == 0.0:
            effective = log_terms
        else:
            effective = energies + log_terms / beta
        _, grad_theta = expectation_with_gradient(
            problem.ancilla_ansatz, theta, lambda v: effective * v
        )
        if beta == 0.0:
            grad_phi = np.zeros(problem.system_ansatz.num_params)
        else:
            sqrt_p = np.diag(np.sqrt(probs)).astype(complex)
            _, grad_phi = expectation_with_gradient(
                problem.system_ansatz,
                phi,
                lambda m: h_matrix @ m,
                initial=sqrt_p,
            )
        return np.concatenate([grad_theta, grad_phi])

    return Objective(problem.num_params, evaluate, exact_gradient=gradient)


@dataclass
class ThermalResult:
    """Outcome of a Gibbs preparation run (best run by free energy).

    ``best_fidelity`` is the maximum fidelity over all restarts, the
    figure the benchmark plots track; statevector diagnostics are always
    rebuilt from the optimal parameters, shot mode included.
    """

    probabilities: np.ndarray
    entropy: float
    energy: float
    free_energy: float
    prepared_state: DensityMatrix
    fidelity_vs_exact: float
    parameters: np.ndarray
    best_fidelity: float
    run_fidelities: np.ndarray
    run_free_energies: np.ndarray
    evaluations_used: int


def run_gibbs(problem: GibbsProblem) -> ThermalResult:
    """Multi-start minimization of the free energy with oracle benchmarking."""
    objective = free_energy_objective(problem)
    best, runs = multi_start(
        objective, problem.optimizer, problem.runs, problem.seed
    )
    exact_rho, _ = ham.exact_gibbs(problem.hamiltonian, problem.beta)
    fidelities = np.zeros(len(runs))
    for k, result in enumerate(runs):
        rho_k = prepared_density(problem, result.best_params)
        fidelities[k] = uhlmann_fidelity(rho_k, exact_rho)
    params = best.best_params
    probs = occupation_probabilities(problem, params)
    entropy = entropy_from_probabilities(probs)
    rho = prepared_density(problem, params)
    h_matrix = ham.to_matrix(problem.hamiltonian)
    energy = float(np.trace(h_matrix @ rho.entries).real)
    value = -entropy if problem.beta == 0 else energy - entropy / problem.beta
    return ThermalResult(
        probabilities=np.sort(probs)[::-1],
        entropy=entropy,
        energy=energy,
        free_energy=float(value),
        prepared_state=rho,
        fidelity_vs_exact=uhlmann_fidelity(rho, exact_rho),
        parameters=params,
        best_fidelity=float(fidelities.max()),
        run_fidelities=fidelities,
        run_free_energies=np.array([r.best_value for r in runs]),
        evaluations_used=int(sum(r.evaluations_used for r in runs)),
    )


def build_tfd(problem: GibbsProblem, optimal_params) -> QubitState:
    """Thermofield-double circuit: optimized system unitary on both registers."""
    theta, phi = problem.split_params(optimal_params)
    n = problem.num_qubits
    gates = []
    for gate in bind_parameters(problem.ancilla_ansatz, theta):
        gates.append(_shift_gate(gate, 0))
    for i in range(n):
        gates.append(cnot_gate(i, n + i))
    for gate in bind_parameters(problem.system_ansatz, phi):
        gates.append(_shift_gate(gate, 0))
    for gate in bind_parameters(problem.system_ansatz, phi):
        gates.append(_shift_gate(gate, n))
    return run_circuit(gates, 2 * n)


# --- entropy estimation -------------------------------------------------------


def entropy_ml(counts: ShotCounts) -> tuple[float, float]:
    """Plug-in entropy of empirical frequencies with its variance estimate.

    Variance: sum (1 + ln q)^2 q (1 - q) / M over occupied bins, which
    stays below the distribution-free bound (ln M)^2 / M.
    """
    total = counts.total_shots
    if total < 1 or not counts.counts:
        raise ValueError("empty counts")
    freqs = np.array([c / total for c in counts.counts.values() if c > 0])
    entropy = float(-np.sum(freqs * np.log(freqs)))
    variance = float(
        np.sum((1.0 + np.log(freqs)) ** 2 * freqs * (1.0 - freqs)) / total
    )
    bound = math.log(total) ** 2 / total if total > 1 else 1.0
    if variance > bound + 1e-12:
        raise AssertionError(
            f"variance estimate {variance} exceeds the (ln M)^2/M bound {bound}"
        )
    return entropy, variance


def miller_madow(entropy_ml_value: float, occupied_bins: int, shots: int) -> float:
    """First-order bias correction S_ML + (B - 1)/(2M)."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    return entropy_ml_value + (occupied_bins - 1) / (2.0 * shots)


# --- exact XY solution --------------------------------------------------------


@dataclass(frozen=True)
class XySpectrum:
    """Free-fermion solution of the periodic XY chain.

    ``canonical_energies`` lists each parity sector's levels in the
    fixed-subset enumeration order (even/odd mode subsets by cardinality
    then lexicographic position), positive sector first: the order the
    distribution-loading circuits map onto computational leaves.
    """

    num_qubits: int
    gamma: float
    h: float
    momenta_positive: tuple[float, ...]
    momenta_negative: tuple[float, ...]
    mode_energies_positive: np.ndarray
    mode_energies_negative: np.ndarray  # signed: boundary modes carry h -+ 1
    ground_positive: float
    ground_negative: float
    canonical_energies: np.ndarray
    energies: np.ndarray  # full sorted list
    parities: tuple[int, ...]  # aligned with `energies`


def _single_particle_energy(k: float, gamma: float, h: float) -> float:
    return math.sqrt((h - math.cos(k)) ** 2 + (gamma * math.sin(k)) ** 2)


def _sector_levels(mode_energies: np.ndarray, parity_odd: bool) -> np.ndarray:
    """E = sum_j w_j (2 m_j - 1) over occupation subsets of fixed parity,
    enumerated by (cardinality, lexicographic position)."""
    n_modes = mode_energies.size
    base = -float(mode_energies.sum())
    levels = []
    start = 1 if parity_odd else 0
    for r in range(start, n_modes + 1, 2):
        for subset in combinations(range(n_modes), r):
            levels.append(base + 2.0 * float(mode_energies[list(subset)].sum()))
    return np.array(levels)


def xy_spectrum_exact(n: int, gamma: float, h: float) -> XySpectrum:
    """Every eigenvalue of the periodic XY chain from its free-fermion form.

    Even ``n`` only: the negative-parity sector needs both unpaired 0 and
    pi momenta.  Positive-sector momenta are odd multiples of pi/n (paired
    as (k, -k), |k| ascending); the negative sector lists the 0 and pi
    modes first with signed energies h - 1 and h + 1.
    """
    if n % 2 != 0:
        raise ValueError("odd chain lengths are not supported")
    if n < 2:
        raise ValueError("need at least 2 qubits")
    ks_positive: list[float] = []
    for j in range(1, n, 2):  # odd multiples of pi/n
        k = j * math.pi / n
        if k < math.pi:
            ks_positive.extend([k, -k])
    momenta_positive = tuple(ks_positive)
    eps_positive = np.array(
        [_single_particle_energy(k, gamma, h) for k in momenta_positive]
    )

    ks_negative: list[float] = [0.0, math.pi]
    for j in range(2, n, 2):  # even multiples of pi/n, excluding 0 and pi
        k = j * math.pi / n
        if k < math.pi:
            ks_negative.extend([k, -k])
    momenta_negative = tuple(ks_negative)
    w_negative = [h - 1.0, h + 1.0]
    w_negative += [
        _single_particle_energy(k, gamma, h) for k in momenta_negative[2:]
    ]
    mode_energies_negative = np.array(w_negative)

    levels_positive = _sector_levels(eps_positive, parity_odd=False)
    levels_negative = _sector_levels(mode_energies_negative, parity_odd=True)
    canonical = np.concatenate([levels_positive, levels_negative])
    tagged = sorted(
        [(e, +1) for e in levels_positive] + [(e, -1) for e in levels_negative]
    )
    energies = np.array([e for e, _ in tagged])
    parities = tuple(p for _, p in tagged)
    return XySpectrum(
        num_qubits=n,
        gamma=gamma,
        h=h,
        momenta_positive=momenta_positive,
        momenta_negative=momenta_negative,
        mode_energies_positive=eps_positive,
        mode_energies_negative=mode_energies_negative,
        ground_positive=float(levels_positive.min()),
        ground_negative=float(levels_negative.min()),
        canonical_energies=canonical,
        energies=energies,
        parities=parities,
    )


def xy_boltzmann_leaf_distribution(n: int, gamma: float, h: float, beta: float) -> np.ndarray:
    """Gibbs weights in the canonical leaf order of the XY spectrum."""
    spectrum = xy_spectrum_exact(n, gamma, h)
    energies = spectrum.canonical_energies
    with np.errstate(under="ignore"):
        weights = np.exp(-beta * (energies - energies.min()))
    return weights / weights.sum()


def xy_degeneracy_counts(n: int, fermions: int) -> dict[int, int]:
    """Number of 4**q-fold degenerate levels in the p-fermion sector.

    Diagnostic validating the momentum-inversion degeneracy structure of
    the positive-parity sector; p must be even.
    """
    if fermions % 2 != 0:
        raise ValueError("positive-sector excitations come in pairs")
    half = n // 2
    counts: dict[int, int] = {}
    for q in range(fermions // 2 + 1):
        paired = fermions // 2 - q
        remaining = half - paired
        total = math.comb(half, paired) * math.comb(remaining, 2 * q)
        if total:
            counts[4**q] = total
    return counts


# --- product-ansatz reachability ---------------------------------------------


def product_ansatz_constraint(probabilities) -> float:
    """Violation |p0 p3 - p1 p2| of the product-amplitude identity.

    Any entangler-free Ry register satisfies p0 p3 = p1 p2 on the first
    four leaf probabilities, so a strictly positive violation for a target
    distribution certifies that no product ancilla can prepare it.
    """
    p = np.asarray(probabilities, dtype=float)
    if p.size < 4:
        raise ValueError("need at least a 2-qubit distribution")
    return float(abs(p[0] * p[3] - p[1] * p[2]))


# --- defaults -----------------------------------------------------------------


def default_gibbs_ansatz(
    model_kind: str, n: int
) -> tuple[ParametrizedCircuit, ParametrizedCircuit]:
    """Layer choices used by the benchmark runs: one linear Ry layer for the
    Ising ancilla, (n-1) alternating layers for XY/XXZ, and an (n-1)-layer
    parity brick wall on the system register throughout."""
    system = build_parity_brickwall(n, max(n - 1, 1))
    if model_kind == "ising":
        ancilla = build_hw_efficient_ry(n, 1, "linear")
    elif model_kind in ("xy", "xxz"):
        ancilla = build_hw_efficient_ry(n, max(n - 1, 1), "alternating")
    else:
        raise ValueError(f"unknown model kind {model_kind!r}")
    return ancilla, system
