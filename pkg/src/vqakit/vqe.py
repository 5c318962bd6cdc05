"""Ground-state workflow for the SU(N) Hubbard ring.

Energies are minimized inside the particle-number sector fixed by the
ansatz initial state; exact sector diagonalization provides the benchmark
energies, states and currents throughout.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import hamiltonian as ham
from .ansatz import (
    ParametrizedCircuit,
    bind_parameters,
    build_hva_hubbard,
    circuit_state,
    expectation_with_gradient,
)
from .hamiltonian import HubbardSpec, PauliHamiltonian
from .optimize import (
    Objective,
    OptimizationResult,
    OptimizerConfig,
    minimize,
    multi_start,
)
from .statevector import QubitState, ShotsMode, bipartite_entropy, child_seed


@dataclass(frozen=True)
class VqeProblem:
    spec: HubbardSpec
    ansatz_layers: int
    mode: str | ShotsMode = "statevector"  # "statevector" or ShotsMode
    optimizer: OptimizerConfig = field(
        default_factory=lambda: OptimizerConfig("quasi_newton", max_evaluations=20_000)
    )
    restarts: int = 1

    @property
    def statevector_mode(self) -> bool:
        return self.mode == "statevector"


def _energy_objective(
    problem: VqeProblem, circuit: ParametrizedCircuit
) -> Objective:
    h = ham.build_hubbard(problem.spec)
    if problem.statevector_mode:
        h_matrix = ham.to_matrix(h)

        def evaluate(values: np.ndarray) -> float:
            state = circuit_state(circuit, values)
            return float(
                np.real(np.vdot(state.amplitudes, h_matrix @ state.amplitudes))
            )

        def gradient(values: np.ndarray) -> np.ndarray:
            _, grad = expectation_with_gradient(
                circuit, values, lambda psi: h_matrix @ psi
            )
            return grad

        return Objective(circuit.num_params, evaluate, exact_gradient=gradient)

    mode = problem.mode
    groups = ham.group_commuting(h, "hubbard")
    counter = {"evaluation": 0}

    def evaluate(values: np.ndarray) -> float:
        state = circuit_state(circuit, values)
        counter["evaluation"] += 1
        value = h.identity_offset
        for k, group in enumerate(groups):
            seed = child_seed(mode.seed, counter["evaluation"], k)
            value += ham.group_expectation_sampled(group, state, mode.shots, seed)
        return float(value)

    return Objective(
        circuit.num_params,
        evaluate,
        circuits_per_evaluation=len(groups),
        shots_per_evaluation=mode.shots * len(groups),
    )


def run_vqe(
    problem: VqeProblem, x0=None, seed: int = 0
) -> tuple[OptimizationResult, QubitState | None]:
    """Minimize <H> over the number-preserving ansatz parameters.

    With ``x0`` the optimizer starts there; otherwise ``problem.restarts``
    seeded random starts are used and the best run wins.  The returned
    state is the bound optimal circuit output (statevector mode only).
    """
    circuit = build_hva_hubbard(problem.spec, problem.ansatz_layers)
    objective = _energy_objective(problem, circuit)
    if circuit.num_params == 0:
        h = ham.build_hubbard(problem.spec)
        state = circuit_state(circuit, np.zeros(0))
        energy = ham.expectation(h, state)
        result = OptimizationResult(np.zeros(0), energy, [(0, energy)], 0, True, "no_parameters")
        return result, state
    if x0 is not None:
        result = minimize(objective, problem.optimizer, x0=np.asarray(x0, float))
    else:
        result, _ = multi_start(objective, problem.optimizer, problem.restarts, seed)
    state = None
    if problem.statevector_mode:
        state = circuit_state(circuit, result.best_params)
    return result, state


def persistent_current(state: QubitState, spec: HubbardSpec) -> float:
    """Matter current I(phi) = -<dH/dphi> on ``state``.

    Evaluated through the dense current operator; the imaginary residue is
    asserted below 1e-10 and truncated.
    """
    op = ham.persistent_current_operator(spec)
    if state.num_qubits != op.num_qubits:
        raise ValueError("state size does not match the model")
    matrix = ham.to_matrix(op)
    value = complex(np.vdot(state.amplitudes, matrix @ state.amplitudes))
    if abs(value.imag) > 1e-10:
        raise AssertionError(f"current has imaginary residue {value.imag}")
    return float(value.real)


# --- exact sector oracle ----------------------------------------------------


@dataclass(frozen=True)
class SectorSolution:
    energies: np.ndarray
    vectors: np.ndarray  # columns, embedded in the full 2**n space
    indices: np.ndarray

    def ground_energy(self) -> float:
        return float(self.energies[0])

    def ground_projector_overlap(self, state: QubitState, degeneracy_tol: float = 1e-9) -> float:
        """Squared overlap with the (possibly degenerate) ground eigenspace."""
        ground = self.energies[0]
        cols = self.vectors[:, np.abs(self.energies - ground) < degeneracy_tol]
        return float(np.sum(np.abs(cols.conj().T @ state.amplitudes) ** 2))


def exact_sector_solution(spec: HubbardSpec) -> SectorSolution:
    """Dense diagonalization restricted to the fixed particle-number sector."""
    h = ham.build_hubbard(spec)
    matrix = ham.to_matrix(h)
    indices = ham.sector_basis_indices(spec)
    block = matrix[np.ix_(indices, indices)]
    vals, vecs = np.linalg.eigh(block)
    full = np.zeros((matrix.shape[0], vecs.shape[1]), dtype=complex)
    full[indices, :] = vecs
    return SectorSolution(vals, full, indices)


def exact_sector_current(spec: HubbardSpec, degeneracy_tol: float = 1e-9) -> float:
    """Current of the exact sector ground state (averaged over a degenerate
    ground space, which keeps the value well defined at level crossings)."""
    sol = exact_sector_solution(spec)
    ground = sol.energies[0]
    cols = sol.vectors[:, np.abs(sol.energies - ground) < degeneracy_tol]
    op = ham.to_matrix(ham.persistent_current_operator(spec))
    vals = [float(np.real(np.vdot(c, op @ c))) for c in cols.T]
    return float(np.mean(vals))


# --- flux sweep --------------------------------------------------------------


@dataclass
class FluxSweepResult:
    phi_grid: np.ndarray
    energies: np.ndarray
    currents: np.ndarray
    exact_energies: np.ndarray
    exact_currents: np.ndarray
    parameters: list[np.ndarray]
    fidelities: np.ndarray
    evaluations: np.ndarray
    spec: HubbardSpec
    ansatz_layers: int


def flux_sweep(
    problem: VqeProblem,
    phi_grid,
    seed: int = 0,
    restarts_first_point: int | None = None,
    mirror: bool = True,
) -> FluxSweepResult:
    """Adiabatically-assisted sweep of the flux-pierced ring.

    The first grid point runs a random multi-start; every later point is
    warm-started from the previous optimum.  With ``mirror`` on, points
    with a partner across phi = 0.5 reuse the partner's result through the
    E(phi) = E(1 - phi) symmetry (currents flip sign).
    """
    phi_grid = np.asarray(phi_grid, dtype=float)
    if phi_grid.ndim != 1 or np.any(np.diff(phi_grid) <= 0):
        raise ValueError("phi grid must be strictly increasing")
    n_points = phi_grid.size
    restarts = restarts_first_point or problem.restarts

    mirror_source = np.full(n_points, -1)
    if mirror:
        for k, phi in enumerate(phi_grid):
            partner = 1.0 - phi
            if phi <= 0.5 + 1e-12:
                continue
            hits = np.nonzero(np.abs(phi_grid - partner) < 1e-12)[0]
            if hits.size:
                mirror_source[k] = hits[0]

    energies = np.zeros(n_points)
    currents = np.zeros(n_points)
    exact_energies = np.zeros(n_points)
    exact_currents = np.zeros(n_points)
    fidelities = np.zeros(n_points)
    evaluations = np.zeros(n_points, dtype=int)
    parameters: list[np.ndarray] = [np.zeros(0)] * n_points

    warm: np.ndarray | None = None
    for k, phi in enumerate(phi_grid):
        spec_k = replace(problem.spec, flux=float(phi))
        if mirror_source[k] >= 0:
            src = mirror_source[k]
            energies[k] = energies[src]
            currents[k] = -currents[src]
            exact_energies[k] = exact_energies[src]
            exact_currents[k] = -exact_currents[src]
            fidelities[k] = fidelities[src]
            parameters[k] = parameters[src]
            continue
        problem_k = replace(problem, spec=spec_k)
        if warm is None:
            result, state = run_vqe(replace(problem_k, restarts=restarts), seed=seed)
        else:
            result, state = run_vqe(problem_k, x0=warm, seed=seed)
        warm = result.best_params
        sol = exact_sector_solution(spec_k)
        energies[k] = result.best_value
        exact_energies[k] = sol.ground_energy()
        exact_currents[k] = exact_sector_current(spec_k)
        evaluations[k] = result.evaluations_used
        parameters[k] = result.best_params
        if state is not None:
            currents[k] = persistent_current(state, spec_k)
            fidelities[k] = sol.ground_projector_overlap(state)
    return FluxSweepResult(
        phi_grid,
        energies,
        currents,
        exact_energies,
        exact_currents,
        parameters,
        fidelities,
        evaluations,
        problem.spec,
        problem.ansatz_layers,
    )


def vqe_entropy_profile(sweep: FluxSweepResult, cut: int) -> np.ndarray:
    """Bipartite entropy of each stored optimal state along the sweep.

    States are rebuilt deterministically from the stored parameters, so
    this works on any statevector-mode sweep result.
    """
    circuit = build_hva_hubbard(sweep.spec, sweep.ansatz_layers)
    entropies = np.zeros(sweep.phi_grid.size)
    for k, (phi, params) in enumerate(zip(sweep.phi_grid, sweep.parameters)):
        if params.size != circuit.num_params:
            raise ValueError("sweep was not run in statevector mode")
        state = circuit_state(circuit, params)
        entropies[k] = bipartite_entropy(state, cut)
    return entropies


def sign_change_count(values: np.ndarray, tol: float = 1e-8) -> int:
    """Sign flips along a curve, ignoring entries within ``tol`` of zero."""
    signs = [1 if v > tol else -1 for v in values if abs(v) > tol]
    return int(sum(1 for a, b in zip(signs, signs[1:]) if a != b))


def sweep_to_csv(sweep: FluxSweepResult) -> str:
    buf = io.StringIO()
    buf.write(
        "phi,energy_vqe,energy_exact,current_vqe,current_exact,fidelity,evaluations\n"
    )
    for k in range(sweep.phi_grid.size):
        row = [
            sweep.phi_grid[k],
            sweep.energies[k],
            sweep.exact_energies[k],
            sweep.currents[k],
            sweep.exact_currents[k],
            sweep.fidelities[k],
        ]
        buf.write(",".join(format(v, ".17g") for v in row))
        buf.write(f",{sweep.evaluations[k]}\n")
    return buf.getvalue()
