"""Closest-separable-state search by Hilbert-Schmidt distance minimization.

The trial state is a classical mixture of ``s`` separable pure products;
its distance to the test state is quadratic in the mixture weights, so the
search splits into an upper level over single-qubit angles and an exact
convex-QP lower level over the probability simplex.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .optimize import OptimizerConfig, fit_sinusoid
from .statevector import (
    DensityMatrix,
    QubitState,
    ShotsMode,
    child_seed,
    cnot_gate,
    hadamard_gate,
    rng_from_seed,
    run_circuit,
    state_from_amplitudes,
)

ANGLE_PERIODS = {"theta": math.pi, "phi": 2.0 * math.pi}


@dataclass(frozen=True)
class SeparableEnsemble:
    """Mixture sum_i p_i |psi(theta_i, phi_i)><psi| of product states.

    Component amplitudes follow cos(theta)|0> + e^{i phi} sin(theta)|1>
    per qubit (no half-angle), so theta in [0, pi) with phi in [0, 2 pi)
    covers every product state.
    """

    probabilities: np.ndarray
    theta: np.ndarray  # (s, n)
    phi: np.ndarray  # (s, n)

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        theta = np.asarray(self.theta, dtype=float)
        phi = np.asarray(self.phi, dtype=float)
        if theta.shape != phi.shape or theta.ndim != 2 or p.shape != (theta.shape[0],):
            raise ValueError("inconsistent ensemble shapes")
        if abs(p.sum() - 1.0) > 1e-12 or np.any(p < -1e-15) or np.any(p > 1 + 1e-15):
            raise ValueError("probabilities must form a distribution")
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @property
    def size(self) -> int:
        return self.theta.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.theta.shape[1]

    def component_state(self, i: int) -> QubitState:
        return separable_pure_state(self.theta[i], self.phi[i])

    def to_density_matrix(self) -> DensityMatrix:
        dim = 2**self.num_qubits
        rho = np.zeros((dim, dim), dtype=complex)
        for i, p in enumerate(self.probabilities):
            amps = self.component_state(i).amplitudes
            rho += p * np.outer(amps, amps.conj())
        return DensityMatrix(self.num_qubits, rho)


def separable_pure_state(theta_row, phi_row) -> QubitState:
    amps = np.array([1.0 + 0j])
    for theta, phi in zip(theta_row, phi_row):
        qubit = np.array([math.cos(theta), np.exp(1j * phi) * math.sin(theta)])
        amps = np.kron(amps, qubit)
    return state_from_amplitudes(amps)


def hsd(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Tr[(rho - sigma)^2] via the purity/overlap decomposition."""
    if rho.num_qubits != sigma.num_qubits:
        raise ValueError("dimension mismatch")
    a, b = rho.entries, sigma.entries
    value = (
        np.trace(a @ a).real + np.trace(b @ b).real - 2.0 * np.trace(a @ b).real
    )
    return float(max(value, 0.0))


# --- overlap cache ----------------------------------------------------------


def _angles_digest(theta: np.ndarray, phi: np.ndarray) -> bytes:
    return theta.tobytes() + phi.tobytes()


@dataclass
class OverlapCache:
    """All angle-dependent overlaps the weight QP needs.

    ``cross[i]`` holds <psi_i| rho |psi_i>, ``gram[i, j]`` holds
    |<psi_i|psi_j>|^2.  Shot-mode entries are clamped into [0, 1] before
    use (raw estimators may leave the interval; the clamp is a small bias
    source).
    """

    rho_purity: float
    cross: np.ndarray
    gram: np.ndarray
    mode: str | ShotsMode
    digest: bytes


def _exact_cross(rho: np.ndarray, component: np.ndarray) -> float:
    return float(np.real(np.vdot(component, rho @ component)))


def _sample_swap_overlap_pure(
    a: np.ndarray, b: np.ndarray, shots: int, seed
) -> float:
    state_a = state_from_amplitudes(a)
    state_b = state_from_amplitudes(b)
    return destructive_swap_overlap(state_a, state_b, shots, seed)


def _sample_cross_mixed(
    rho_eigs: np.ndarray, rho_vecs: np.ndarray, component: np.ndarray, shots: int, seed
) -> float:
    """Tr(rho |psi><psi|) with rho prepared as its eigen-ensemble."""
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = seq.spawn(rho_eigs.size + 1)
    rng = rng_from_seed(children[0])
    weights = np.clip(rho_eigs, 0.0, None)
    weights = weights / weights.sum()
    draws = rng.multinomial(shots, weights)
    estimate = 0.0
    for k, count in enumerate(draws):
        if count == 0:
            continue
        estimate += count * _sample_swap_overlap_pure(
            rho_vecs[:, k], component, int(count), children[k + 1]
        )
    return estimate / shots


def build_overlap_cache(
    rho: DensityMatrix,
    theta: np.ndarray,
    phi: np.ndarray,
    mode: str | ShotsMode = "statevector",
    evaluation_index: int = 0,
) -> OverlapCache:
    s = theta.shape[0]
    components = [
        separable_pure_state(theta[i], phi[i]).amplitudes for i in range(s)
    ]
    rho_purity = float(np.trace(rho.entries @ rho.entries).real)
    cross = np.zeros(s)
    gram = np.eye(s)
    if mode == "statevector":
        for i in range(s):
            cross[i] = _exact_cross(rho.entries, components[i])
            for j in range(i + 1, s):
                gram[i, j] = gram[j, i] = (
                    abs(np.vdot(components[i], components[j])) ** 2
                )
    else:
        eigs, vecs = np.linalg.eigh(rho.entries)
        for i in range(s):
            cross[i] = _sample_cross_mixed(
                eigs, vecs, components[i], mode.shots,
                child_seed(mode.seed, evaluation_index, i),
            )
            for j in range(i + 1, s):
                gram[i, j] = gram[j, i] = _sample_swap_overlap_pure(
                    components[i], components[j], mode.shots,
                    child_seed(mode.seed, evaluation_index, s + i * s + j),
                )
        cross = np.clip(cross, 0.0, 1.0)
        gram = np.clip(gram, 0.0, 1.0)
        np.fill_diagonal(gram, 1.0)
    return OverlapCache(rho_purity, cross, gram, mode, _angles_digest(theta, phi))


def ensemble_hsd(
    rho: DensityMatrix, ensemble: SeparableEnsemble, cache: OverlapCache
) -> float:
    """HSD from cached overlaps: quadratic form in the mixture weights."""
    if cache.digest != _angles_digest(ensemble.theta, ensemble.phi):
        raise ValueError("stale cache: angles changed since it was built")
    p = ensemble.probabilities
    return float(
        cache.rho_purity + p @ cache.gram @ p - 2.0 * float(cache.cross @ p)
    )


# --- simplex-constrained quadratic program ----------------------------------


def simplex_qp_minimize(
    gram: np.ndarray, cross: np.ndarray, tolerance: float = 1e-12
) -> np.ndarray:
    """Exact minimizer of p^T G p - 2 c^T p over the probability simplex.

    Active-set over support faces: the Gram matrix is positive
    semidefinite (Hadamard square of a PSD Gram), so each face subproblem
    is convex and the iteration terminates finitely.
    """
    s = cross.size
    support = list(range(s))
    for _ in range(4 * s + 8):
        g_s = gram[np.ix_(support, support)]
        c_s = cross[support]
        k = len(support)
        kkt = np.zeros((k + 1, k + 1))
        kkt[:k, :k] = 2.0 * g_s
        kkt[:k, k] = 1.0
        kkt[k, :k] = 1.0
        rhs = np.concatenate([2.0 * c_s, [1.0]])
        solution, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
        p_s, lam = solution[:k], solution[k]
        if np.any(p_s < -tolerance):
            worst = support[int(np.argmin(p_s))]
            support.remove(worst)
            continue
        p = np.zeros(s)
        p[support] = np.clip(p_s, 0.0, None)
        p /= p.sum()
        # Dual feasibility on inactive coordinates: grad_i + lam >= 0.
        gradient = 2.0 * (gram @ p - cross)
        inactive = [i for i in range(s) if i not in support]
        violations = [i for i in inactive if gradient[i] + lam < -1e-9]
        if not violations:
            return p
        support.append(min(violations, key=lambda i: gradient[i] + lam))
        support.sort()
    return p  # pragma: no cover - iteration cap


def qp_kkt_residual(gram: np.ndarray, cross: np.ndarray, p: np.ndarray) -> float:
    """Max KKT violation of a candidate simplex-QP solution."""
    gradient = 2.0 * (gram @ p - cross)
    active = p > 1e-12
    if not np.any(active):
        return math.inf
    lam = -float(np.mean(gradient[active]))
    residual = abs(float(p.sum()) - 1.0)
    residual = max(residual, float(np.max(np.abs(gradient[active] + lam))))
    if np.any(~active):
        residual = max(residual, float(np.max(np.clip(-(gradient[~active] + lam), 0, None))))
    residual = max(residual, float(np.max(np.clip(-p, 0, None))))
    return residual


# --- the verifier ------------------------------------------------------------


@dataclass
class VsvResult:
    ensemble: SeparableEnsemble
    hse: float
    history: list[tuple[int, float]]
    evaluations: int


def _hsd_from_parts(purity_rho, gram, cross, p) -> float:
    return float(purity_rho + p @ gram @ p - 2.0 * float(cross @ p))


class _ExactVsvState:
    """Incrementally maintained overlaps for coordinate-descent search."""

    def __init__(self, rho: np.ndarray, theta: np.ndarray, phi: np.ndarray):
        self.rho = rho
        self.theta = theta
        self.phi = phi
        s = theta.shape[0]
        self.components = [
            separable_pure_state(theta[i], phi[i]).amplitudes for i in range(s)
        ]
        self.purity_rho = float(np.trace(rho @ rho).real)
        self.cross = np.array(
            [_exact_cross(rho, c) for c in self.components]
        )
        self.gram = np.eye(s)
        for i in range(s):
            for j in range(i + 1, s):
                self.gram[i, j] = self.gram[j, i] = (
                    abs(np.vdot(self.components[i], self.components[j])) ** 2
                )

    def hsd(self, p: np.ndarray) -> float:
        return _hsd_from_parts(self.purity_rho, self.gram, self.cross, p)

    def _candidate_overlaps(
        self, i: int, kind: str, q: int, value: float
    ) -> tuple[float, np.ndarray]:
        theta_row = self.theta[i].copy()
        phi_row = self.phi[i].copy()
        (theta_row if kind == "theta" else phi_row)[q] = value
        amps = separable_pure_state(theta_row, phi_row).amplitudes
        cross_i = _exact_cross(self.rho, amps)
        gram_i = np.array(
            [
                1.0 if j == i else abs(np.vdot(amps, c)) ** 2
                for j, c in enumerate(self.components)
            ]
        )
        return cross_i, gram_i

    def probe(self, i: int, kind: str, q: int, value: float, p: np.ndarray) -> float:
        """HSD after setting one angle of component i, without committing."""
        cross_i, gram_i = self._candidate_overlaps(i, kind, q, value)
        others = np.delete(p, i)
        delta_quad = 2.0 * p[i] * float(
            others @ (np.delete(gram_i, i) - np.delete(self.gram[i], i))
        )
        delta_cross = -2.0 * p[i] * (cross_i - self.cross[i])
        return self.hsd(p) + delta_quad + delta_cross

    def residual(self, i: int, p: np.ndarray) -> float:
        """<psi_i|(rho - sigma)|psi_i>: how much weight on i would help."""
        return float(self.cross[i] - self.gram[i] @ p)

    def probe_residual(
        self, i: int, kind: str, q: int, value: float, p: np.ndarray
    ) -> float:
        cross_i, gram_i = self._candidate_overlaps(i, kind, q, value)
        return float(cross_i - gram_i @ p)

    def commit(self, i: int, kind: str, q: int, value: float) -> None:
        (self.theta if kind == "theta" else self.phi)[i, q] = value
        amps = separable_pure_state(self.theta[i], self.phi[i]).amplitudes
        self.components[i] = amps
        self.cross[i] = _exact_cross(self.rho, amps)
        for j, c in enumerate(self.components):
            self.gram[i, j] = self.gram[j, i] = (
                1.0 if j == i else abs(np.vdot(amps, c)) ** 2
            )


def _vsv_nft(
    rho: DensityMatrix,
    s: int,
    upper: OptimizerConfig,
    lower_tolerance: float,
) -> VsvResult:
    """Block-coordinate descent: exact sinusoidal angle updates + weight QP.

    At fixed weights the HSD is offset + single sinusoid in each angle
    (period pi for theta, 2 pi for phi), so each coordinate update is an
    exact three-point fit; the simplex QP re-solves the weights after each
    component and after every sweep.
    """
    n = rho.num_qubits
    rng = rng_from_seed(upper.seed)
    theta = rng.random((s, n)) * math.pi
    phi = rng.random((s, n)) * 2.0 * math.pi
    state = _ExactVsvState(rho.entries, theta, phi)
    p = simplex_qp_minimize(state.gram, state.cross, lower_tolerance)
    evaluations = 1
    best = state.hsd(p)
    history = [(evaluations, best)]
    stall = 0
    while evaluations < upper.max_evaluations and stall < 4:
        for i in range(s):
            # Zero-weight components are invisible to the distance, so
            # first re-point them along the residual rho - sigma (exactly
            # sinusoidal per angle as well); the weight QP then decides
            # whether the revived component enters the mixture.
            reviving = p[i] < 1e-12
            for kind in ("theta", "phi"):
                period = ANGLE_PERIODS[kind]
                freq = 2.0 * math.pi / period
                for q in range(n):
                    x = (state.theta if kind == "theta" else state.phi)[i, q]
                    if reviving:
                        f0 = -state.residual(i, p)
                        f_plus = -state.probe_residual(i, kind, q, x + period / 4.0, p)
                        f_minus = -state.probe_residual(i, kind, q, x - period / 4.0, p)
                    else:
                        f0 = state.hsd(p)
                        f_plus = state.probe(i, kind, q, x + period / 4.0, p)
                        f_minus = state.probe(i, kind, q, x - period / 4.0, p)
                    evaluations += 2
                    a, b, c = fit_sinusoid(f0, f_plus, f_minus, freq * x)
                    new_x = (-b - math.pi / 2.0) / freq
                    state.commit(i, kind, q, new_x % period)
            p = simplex_qp_minimize(state.gram, state.cross, lower_tolerance)
            evaluations += 1
            if evaluations >= upper.max_evaluations:
                break
        value = state.hsd(p)
        history.append((evaluations, value))
        if value < best - 1e-12:
            best = value
            stall = 0
        else:
            stall += 1
    ensemble = SeparableEnsemble(p, state.theta.copy(), state.phi.copy())
    return VsvResult(ensemble, state.hsd(p), history, evaluations)


def _vsv_gsa(
    rho: DensityMatrix,
    s: int,
    upper: OptimizerConfig,
    lower_tolerance: float,
    mode: str | ShotsMode,
) -> VsvResult:
    from .optimize import Objective, gsa_minimize

    n = rho.num_qubits
    counter = {"evaluation": 0}

    def evaluate(angles: np.ndarray) -> float:
        counter["evaluation"] += 1
        theta = angles[: s * n].reshape(s, n)
        phi = angles[s * n :].reshape(s, n)
        cache = build_overlap_cache(rho, theta, phi, mode, counter["evaluation"])
        p = simplex_qp_minimize(cache.gram, cache.cross, lower_tolerance)
        return _hsd_from_parts(cache.rho_purity, cache.gram, cache.cross, p)

    bounds = [(0.0, math.pi)] * (s * n) + [(0.0, 2.0 * math.pi)] * (s * n)
    objective = Objective(2 * s * n, evaluate)
    result = gsa_minimize(objective, bounds, upper)
    theta = result.best_params[: s * n].reshape(s, n)
    phi = result.best_params[s * n :].reshape(s, n)
    cache = build_overlap_cache(rho, theta, phi, "statevector")
    p = simplex_qp_minimize(cache.gram, cache.cross, lower_tolerance)
    ensemble = SeparableEnsemble(p, theta, phi)
    hse = _hsd_from_parts(cache.rho_purity, cache.gram, cache.cross, p)
    return VsvResult(ensemble, hse, result.history, result.evaluations_used)


def vsv_minimize(
    rho: DensityMatrix,
    s: int | None = None,
    upper: OptimizerConfig | None = None,
    lower_tolerance: float = 1e-12,
    mode: str | ShotsMode = "statevector",
) -> VsvResult:
    """Search for the closest fully separable state of ``rho``.

    ``s`` defaults to the Hilbert-space dimension (enough components for
    every test state).  The upper level proposes product-state angles via
    NFT-style coordinate descent (default) or generalized simulated
    annealing; per proposal an exact simplex QP assigns the weights.
    """
    if s is None:
        s = 2**rho.num_qubits
    if s < 1:
        raise ValueError("need at least one component")
    if upper is None:
        upper = OptimizerConfig("nft", max_evaluations=60_000, seed=0)
    if upper.kind == "nft":
        if mode != "statevector":
            raise ValueError("coordinate-descent upper level is statevector-only")
        return _vsv_nft(rho, s, upper, lower_tolerance)
    if upper.kind == "gsa":
        return _vsv_gsa(rho, s, upper, lower_tolerance, mode)
    raise ValueError(f"unsupported upper-level optimizer {upper.kind!r}")


# --- reference states and values ---------------------------------------------


def ghz_state(n: int) -> QubitState:
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = amps[-1] = 1.0 / math.sqrt(2.0)
    return state_from_amplitudes(amps)


def ghz_density(n: int) -> DensityMatrix:
    amps = ghz_state(n).amplitudes
    return DensityMatrix(n, np.outer(amps, amps.conj()))


def ghz_hse_analytic(n: int) -> float:
    """Closed-form Hilbert-Schmidt entanglement of the n-qubit GHZ state."""
    if n < 2:
        raise ValueError("need at least 2 qubits")
    return (2**n - 2) / (2 ** (n + 1) + 2 ** (3 - n) - 4)


@dataclass(frozen=True)
class XMemsSpec:
    num_qubits: int
    gamma: complex

    def __post_init__(self):
        if abs(self.gamma) > 0.5 + 1e-12:
            raise ValueError("|gamma| must not exceed 1/2")
        if self.num_qubits < 2:
            raise ValueError("need at least 2 qubits")


def xmems_state(spec: XMemsSpec) -> DensityMatrix:
    """Maximally entangled mixed X-state at coherence ``gamma``.

    Diagonal layout: f at both corners, g on slots 1..N-1, zeros on slots
    N..2N-2, with gamma on the anti-corner (N = 2**(n-1)); the f/g pair
    switches branch at |gamma| = 1/(N+1).
    """
    n = spec.num_qubits
    big_n = 2 ** (n - 1)
    mag = abs(spec.gamma)
    if mag <= 1.0 / (big_n + 1):
        f = g = 1.0 / (big_n + 1)
    else:
        f = mag
        g = (1.0 - 2.0 * mag) / (big_n - 1)
    dim = 2 * big_n
    mat = np.zeros((dim, dim), dtype=complex)
    mat[0, 0] = mat[dim - 1, dim - 1] = f
    for k in range(1, big_n):
        mat[k, k] = g
    mat[0, dim - 1] = spec.gamma
    mat[dim - 1, 0] = np.conj(spec.gamma)
    return DensityMatrix(n, mat)


def xmems_css_2qubit(gamma: complex) -> tuple[DensityMatrix, float]:
    """Closed-form closest separable state and HSE of the 2-qubit X-MEMS.

    Branch joint at |gamma| = 1/3; the CSS keeps the X shape with corner
    a/2, inner diagonal (b, 1-a-b) and anti-corner d aligned with gamma.
    """
    mag = abs(gamma)
    if mag > 0.5 + 1e-12:
        raise ValueError("|gamma| must not exceed 1/2")
    if mag <= 1.0 / 3.0:
        root = math.sqrt(1.0 + 36.0 * mag**2)
        a = (7.0 - root) / 9.0
        b = (1.0 + 12.0 * mag**2 + root) / (6.0 * root)
        d_mag = (mag / 3.0) * (1.0 + 2.0 / root)
        hse = (2.0 / 27.0) * (1.0 + 18.0 * mag**2 - root)
    else:
        root = math.sqrt(1.0 - 4.0 * mag + 8.0 * mag**2)
        a = (1.0 + 4.0 * mag - root) / 3.0
        b = (3.0 - 6.0 * mag + (3.0 - 12.0 * mag + 16.0 * mag**2) / root) / 6.0
        d_mag = mag * (2.0 - 4.0 * mag + root) / (3.0 * root)
        hse = (2.0 / 3.0) * (
            1.0 - 4.0 * mag + 6.0 * mag**2 + (2.0 * mag - 1.0) * root
        )
    phase = gamma / mag if mag > 0 else 1.0
    mat = np.zeros((4, 4), dtype=complex)
    mat[0, 0] = mat[3, 3] = a / 2.0
    mat[1, 1] = b
    mat[2, 2] = 1.0 - a - b
    mat[0, 3] = d_mag * phase
    mat[3, 0] = np.conj(mat[0, 3])
    return DensityMatrix(2, mat), float(hse)


def _xmems_css_family_hsd(spec: XMemsSpec, a: float, b: float) -> float:
    n = spec.num_qubits
    big_n = 2 ** (n - 1)
    mag = abs(spec.gamma)
    target = xmems_state(spec)
    f = float(target.entries[0, 0].real)
    g = float(target.entries[1, 1].real) if big_n > 1 else 0.0
    low = 1.0 - a - b
    if a < 0 or b < 0 or low < -1e-12:
        return math.inf
    d_bound = math.sqrt(max(b * low, 0.0)) / (big_n - 1)
    d_mag = min(mag, a / 2.0, d_bound)
    return (
        2.0 * (f - a / 2.0) ** 2
        + (big_n - 1) * (g - b / (big_n - 1)) ** 2
        + (big_n - 1) * (low / (big_n - 1)) ** 2
        + 2.0 * (mag - d_mag) ** 2
    )


def xmems_css_numeric(spec: XMemsSpec, grid: int = 240) -> tuple[DensityMatrix, float]:
    """Numeric CSS for n-qubit X-MEMS within the conjectured X-shaped family.

    Grid search plus local refinement over (a, b); the anti-corner takes
    the largest magnitude allowed by the zero-negativity constraint
    |d|^2 <= b(1-a-b)/(N-1)^2 (checked, not assumed, as the binding face).
    """
    n = spec.num_qubits
    big_n = 2 ** (n - 1)
    best = (math.inf, 0.0, 0.0)
    for a in np.linspace(0.0, 1.0, grid):
        for b in np.linspace(0.0, 1.0 - a, max(int(grid * (1 - a)), 2)):
            value = _xmems_css_family_hsd(spec, float(a), float(b))
            if value < best[0]:
                best = (value, float(a), float(b))
    _, a, b = best
    step = 1.5 / grid
    for _ in range(60):  # coordinate refinement
        improved = False
        for da, db in ((step, 0), (-step, 0), (0, step), (0, -step)):
            value = _xmems_css_family_hsd(spec, a + da, b + db)
            if value < best[0] - 1e-16:
                best = (value, a + da, b + db)
                a, b = a + da, b + db
                improved = True
        if not improved:
            step /= 2.0
            if step < 1e-10:
                break
    hse, a, b = best
    mag = abs(spec.gamma)
    low = max(1.0 - a - b, 0.0)
    d_mag = min(mag, a / 2.0, math.sqrt(b * low) / (big_n - 1))
    phase = spec.gamma / mag if mag > 0 else 1.0
    dim = 2 * big_n
    mat = np.zeros((dim, dim), dtype=complex)
    mat[0, 0] = mat[dim - 1, dim - 1] = a / 2.0
    for k in range(1, big_n):
        mat[k, k] = b / (big_n - 1)
    for k in range(big_n, dim - 1):
        mat[k, k] = low / (big_n - 1)
    mat[0, dim - 1] = d_mag * phase
    mat[dim - 1, 0] = np.conj(mat[0, dim - 1])
    return DensityMatrix(spec.num_qubits, mat), float(hse)


# --- destructive SWAP test ---------------------------------------------------


def _pair_values(n: int) -> np.ndarray:
    """(-1)**(number of 11 pairs) for every 2n-bit outcome."""
    idx = np.arange(4**n)
    signs = np.ones(4**n)
    for i in range(n):
        bit_a = (idx >> (2 * n - 1 - i)) & 1
        bit_b = (idx >> (n - 1 - i)) & 1
        signs *= 1.0 - 2.0 * (bit_a & bit_b)
    return signs


def destructive_swap_overlap(
    state_a: QubitState, state_b: QubitState, shots: int | None = None, seed=None
) -> float:
    """Overlap |<a|b>|^2 via the pairwise Bell-basis measurement circuit.

    ``shots=None`` bypasses sampling and returns the exact value; otherwise
    the 2n-qubit circuit (CNOT per pair, Hadamard on the first register)
    is sampled and each shot contributes the product over pairs of -1 for
    a 11 readout and +1 otherwise.
    """
    n = state_a.num_qubits
    if state_b.num_qubits != n:
        raise ValueError("states must have equal qubit counts")
    if shots is None:
        return float(abs(np.vdot(state_a.amplitudes, state_b.amplitudes)) ** 2)
    if shots < 1:
        raise ValueError("shots must be >= 1 in sampling mode")
    joint = state_from_amplitudes(
        np.kron(state_a.amplitudes, state_b.amplitudes)
    )
    gates = []
    for i in range(n):
        gates.append(cnot_gate(i, n + i))
    for i in range(n):
        gates.append(hadamard_gate(i))
    measured = run_circuit(gates, 2 * n, joint)
    rng = rng_from_seed(seed if seed is not None else 0)
    probs = measured.probabilities()
    draws = rng.multinomial(shots, probs / probs.sum())
    return float(np.dot(draws, _pair_values(n)) / shots)


# --- quantum Gilbert algorithm ------------------------------------------------


@dataclass
class QgaResult:
    css_estimate: DensityMatrix
    hsd_history: list[float]
    trials: int
    successes: int


def _random_product_state(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-random single-qubit product state amplitudes."""
    amps = np.array([1.0 + 0j])
    for _ in range(n):
        z = rng.uniform(-1.0, 1.0)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        c = math.sqrt((1.0 + z) / 2.0)
        s_ = math.sqrt((1.0 - z) / 2.0)
        amps = np.kron(amps, np.array([c, np.exp(1j * phi) * s_]))
    return amps


def qga_run(
    rho: DensityMatrix,
    sigma0: QubitState,
    max_trials: int,
    seed: int,
) -> QgaResult:
    """Gilbert-style projection baseline for the closest separable state.

    Random product trial states pass a linear preselection (geometric
    angle below pi/2), then the mixing weight minimizing the quadratic
    distance is taken in closed form; purity and test-state overlap are
    maintained iteratively.
    """
    n = rho.num_qubits
    rng = rng_from_seed(seed)
    rho_mat = rho.entries
    purity_rho = float(np.trace(rho_mat @ rho_mat).real)
    current = np.outer(sigma0.amplitudes, sigma0.amplitudes.conj())
    purity_cur = 1.0
    cross_cur = float(np.real(np.vdot(sigma0.amplitudes, rho_mat @ sigma0.amplitudes)))
    history = [purity_rho + purity_cur - 2.0 * cross_cur]
    successes = 0
    for _ in range(max_trials):
        candidate = _random_product_state(rng, n)
        overlap_rho = float(np.real(np.vdot(candidate, rho_mat @ candidate)))
        overlap_cur = float(np.real(np.vdot(candidate, current @ candidate)))
        # preselection: Tr[(sigma_n - rho_{n-1})(rho - rho_{n-1})] > 0
        if purity_cur + overlap_rho <= cross_cur + overlap_cur:
            continue
        denom = purity_cur + 1.0 - 2.0 * overlap_cur
        if denom <= 1e-15:
            continue
        weight = (1.0 - overlap_cur + cross_cur - overlap_rho) / denom
        weight = min(max(weight, 0.0), 1.0)
        new_purity = (
            weight**2 * purity_cur
            + (1.0 - weight) ** 2
            + 2.0 * weight * (1.0 - weight) * overlap_cur
        )
        new_cross = weight * cross_cur + (1.0 - weight) * overlap_rho
        new_value = purity_rho + new_purity - 2.0 * new_cross
        if new_value >= history[-1] - 1e-15:
            continue
        current = weight * current + (1.0 - weight) * np.outer(
            candidate, candidate.conj()
        )
        purity_cur, cross_cur = new_purity, new_cross
        history.append(new_value)
        successes += 1
    return QgaResult(DensityMatrix(n, current), history, max_trials, successes)
