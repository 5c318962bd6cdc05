"""Pauli-string algebra, lattice-model builders and exact oracles.

Model builders return canonical ``PauliHamiltonian`` values: terms are
deduplicated, sorted lexicographically by label string, and pruned below
1e-14; the all-identity component lives in ``identity_offset``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .statevector import (
    DensityMatrix,
    GateOp,
    PAULI_MATRICES,
    QubitState,
    expectation_pauli,
    hadamard_gate,
    HADAMARD,
    SDG_MATRIX,
)

COEFF_PRUNE = 1e-14
MAX_DIAG_QUBITS = 14
MAX_GIBBS_QUBITS = 10


@dataclass(frozen=True)
class PauliString:
    coefficient: complex
    labels: str

    def __post_init__(self):
        if any(c not in "IXYZ" for c in self.labels):
            raise ValueError(f"invalid Pauli labels {self.labels!r}")


@dataclass(frozen=True)
class PauliHamiltonian:
    num_qubits: int
    terms: tuple[PauliString, ...]
    identity_offset: float = 0.0

    def __post_init__(self):
        for t in self.terms:
            if len(t.labels) != self.num_qubits:
                raise ValueError(
                    f"term {t.labels!r} does not match register size {self.num_qubits}"
                )

    @property
    def num_terms(self) -> int:
        return len(self.terms)

    def coefficients(self) -> np.ndarray:
        return np.array([t.coefficient for t in self.terms])


def hamiltonian_from_terms(
    num_qubits: int, raw_terms, offset: float = 0.0
) -> PauliHamiltonian:
    """Canonicalize (coefficient, labels) pairs: merge, prune, sort."""
    merged: dict[str, complex] = {}
    identity = "I" * num_qubits
    total_offset = complex(offset)
    for coeff, labels in raw_terms:
        if len(labels) != num_qubits:
            raise ValueError(f"term {labels!r} has wrong length")
        if labels == identity:
            total_offset += coeff
        else:
            merged[labels] = merged.get(labels, 0.0) + complex(coeff)
    terms = []
    for labels in sorted(merged):
        coeff = merged[labels]
        if abs(coeff) < COEFF_PRUNE:
            continue
        if abs(coeff.imag) < 1e-12:
            coeff = complex(coeff.real, 0.0)
        terms.append(PauliString(coeff, labels))
    if abs(total_offset.imag) > 1e-10:
        raise ValueError("identity offset must be real for a Hermitian operator")
    return PauliHamiltonian(num_qubits, tuple(terms), float(total_offset.real))


def scale(h: PauliHamiltonian, factor: float) -> PauliHamiltonian:
    return hamiltonian_from_terms(
        h.num_qubits,
        ((factor * t.coefficient, t.labels) for t in h.terms),
        factor * h.identity_offset,
    )


def add(a: PauliHamiltonian, b: PauliHamiltonian) -> PauliHamiltonian:
    if a.num_qubits != b.num_qubits:
        raise ValueError("register size mismatch")
    raw = [(t.coefficient, t.labels) for t in a.terms]
    raw += [(t.coefficient, t.labels) for t in b.terms]
    return hamiltonian_from_terms(
        a.num_qubits, raw, a.identity_offset + b.identity_offset
    )


def pauli_string_matrix(labels: str) -> np.ndarray:
    mat = np.array([[1.0 + 0j]])
    for lab in labels:
        mat = np.kron(mat, PAULI_MATRICES[lab])
    return mat


def to_matrix(h: PauliHamiltonian) -> np.ndarray:
    dim = 2**h.num_qubits
    mat = np.eye(dim, dtype=complex) * h.identity_offset
    for term in h.terms:
        mat += term.coefficient * pauli_string_matrix(term.labels)
    return mat


def expectation(h: PauliHamiltonian, state: QubitState) -> float:
    if state.num_qubits != h.num_qubits:
        raise ValueError("register size mismatch")
    value = h.identity_offset
    for term in h.terms:
        value += term.coefficient.real * expectation_pauli(state, term.labels)
    return float(value)


# --- model builders -------------------------------------------------------


@dataclass(frozen=True)
class HubbardSpec:
    """SU(N) Fermi-Hubbard ring: L sites, N colours, flux in 2*pi*phi/L units.

    ``hopping[r-1]`` and ``neighbour[r-1]`` are the range-r amplitudes t_r
    and V_r; ``particles[s]`` is the conserved fermion count of colour s.
    Qubit layout: colour s occupies qubits s*L .. s*L + L - 1 (site-major
    within a colour rail).
    """

    sites: int
    colours: int
    hopping: tuple[float, ...] = (1.0,)
    onsite: float = 0.0
    neighbour: tuple[float, ...] = ()
    flux: float = 0.0
    particles: tuple[int, ...] = ()

    def __post_init__(self):
        if self.sites < 2 or self.colours < 1:
            raise ValueError("need at least 2 sites and 1 colour")
        max_range = self.sites // 2
        if len(self.hopping) > max_range or len(self.neighbour) > max_range:
            raise ValueError(f"interaction range exceeds L/2 = {max_range}")
        if self.onsite < 0 or any(v < 0 for v in self.neighbour):
            raise ValueError("U and V_r must be non-negative")
        particles = self.particles or tuple(0 for _ in range(self.colours))
        if len(particles) != self.colours:
            raise ValueError("one particle count per colour required")
        if any(not 0 <= p <= self.sites for p in particles):
            raise ValueError("particle count per colour must be in [0, L]")
        object.__setattr__(self, "particles", tuple(particles))
        object.__setattr__(self, "hopping", tuple(self.hopping))
        object.__setattr__(self, "neighbour", tuple(self.neighbour))

    @property
    def num_qubits(self) -> int:
        return self.sites * self.colours

    def qubit(self, site: int, colour: int) -> int:
        return colour * self.sites + site % self.sites


def _hopping_bonds(spec: HubbardSpec):
    """Yield (colour, site, range_r, t_r, qubit_a, qubit_b, string, parity).

    ``string`` lists the rail qubits carrying Z factors between the bond
    endpoints; ``parity`` is the fermionic boundary sign for bonds that
    wrap around the ring, fixed by the colour's particle number: moving a
    fermion across the boundary commutes it past the other N_s - 1
    fermions of that colour, so the sign is (-1)**(N_s - 1).
    """
    L = spec.sites
    for s in range(spec.colours):
        for r, t_r in enumerate(spec.hopping, start=1):
            if t_r == 0.0:
                continue
            for i in range(L):
                a = spec.qubit(i, s)
                b = spec.qubit(i + r, s)
                string = tuple(spec.qubit(j, s) for j in range(i + 1, i + r))
                wraps = i + r >= L
                parity = -1.0 if (wraps and spec.particles[s] % 2 == 0) else 1.0
                yield s, i, r, t_r, a, b, string, parity


def _labels_with(num_qubits: int, assignments: dict[int, str]) -> str:
    labels = ["I"] * num_qubits
    for q, lab in assignments.items():
        labels[q] = lab
    return "".join(labels)


def build_hubbard(spec: HubbardSpec) -> PauliHamiltonian:
    """Qubit Hamiltonian of the SU(N) extended Hubbard ring.

    Hopping terms expand into cos-weighted XX+YY and sin-weighted YX-XY
    pairs (flux phase 2*pi*phi/L per bond regardless of range), with Z
    strings on the in-between rail qubits for range > 1 and boundary
    parity signs baked in from the particle numbers.  U and V terms expand
    from the (1-Z)(1-Z)/4 number-operator products.
    """
    n = spec.num_qubits
    L = spec.sites
    alpha = 2.0 * math.pi * spec.flux / L
    raw: list[tuple[complex, str]] = []
    offset = 0.0

    for _s, _i, _r, t_r, a, b, string, parity in _hopping_bonds(spec):
        pref = -t_r * parity * 0.5
        zs = {q: "Z" for q in string}
        c, s_ = math.cos(alpha), math.sin(alpha)
        # exp(i a) s+_a s-_b + h.c. =
        #   [cos(a) (XX + YY) + sin(a) (YX - XY)] / 2   (s+ = |1><0|)
        raw.append((pref * c, _labels_with(n, {a: "X", b: "X", **zs})))
        raw.append((pref * c, _labels_with(n, {a: "Y", b: "Y", **zs})))
        raw.append((pref * s_, _labels_with(n, {a: "Y", b: "X", **zs})))
        raw.append((-pref * s_, _labels_with(n, {a: "X", b: "Y", **zs})))

    if spec.onsite != 0.0:
        u4 = spec.onsite / 4.0
        for i in range(L):
            for s1 in range(spec.colours):
                for s2 in range(s1 + 1, spec.colours):
                    a, b = spec.qubit(i, s1), spec.qubit(i, s2)
                    offset += u4
                    raw.append((-u4, _labels_with(n, {a: "Z"})))
                    raw.append((-u4, _labels_with(n, {b: "Z"})))
                    raw.append((u4, _labels_with(n, {a: "Z", b: "Z"})))

    for r, v_r in enumerate(spec.neighbour, start=1):
        if v_r == 0.0:
            continue
        v4 = v_r / 4.0
        for i in range(L):
            for s1 in range(spec.colours):
                for s2 in range(spec.colours):
                    a = spec.qubit(i, s1)
                    b = spec.qubit(i + r, s2)
                    offset += v4
                    raw.append((-v4, _labels_with(n, {a: "Z"})))
                    raw.append((-v4, _labels_with(n, {b: "Z"})))
                    raw.append((v4, _labels_with(n, {a: "Z", b: "Z"})))

    return hamiltonian_from_terms(n, raw, offset)


def hubbard_term_count(spec: HubbardSpec) -> int:
    """Closed-form Pauli term count 3NL(N+3)/2 for the nearest-neighbour model."""
    if len(spec.hopping) != 1 or len(spec.neighbour) != 1:
        raise ValueError("count formula applies to the nearest-neighbour model")
    return 3 * spec.colours * spec.sites * (spec.colours + 3) // 2


def persistent_current_operator(spec: HubbardSpec) -> PauliHamiltonian:
    """Matter-current operator -dH/dphi of the flux-pierced Hubbard ring."""
    n = spec.num_qubits
    L = spec.sites
    alpha = 2.0 * math.pi * spec.flux / L
    raw: list[tuple[complex, str]] = []
    for _s, _i, _r, t_r, a, b, string, parity in _hopping_bonds(spec):
        # -d/dphi of the bond term: -t * parity * (pi/L) *
        #   [sin(a) (XX + YY) - cos(a) (YX - XY)]
        pref = -t_r * parity * math.pi / L
        zs = {q: "Z" for q in string}
        c, s_ = math.cos(alpha), math.sin(alpha)
        raw.append((pref * s_, _labels_with(n, {a: "X", b: "X", **zs})))
        raw.append((pref * s_, _labels_with(n, {a: "Y", b: "Y", **zs})))
        raw.append((-pref * c, _labels_with(n, {a: "Y", b: "X", **zs})))
        raw.append((pref * c, _labels_with(n, {a: "X", b: "Y", **zs})))
    return hamiltonian_from_terms(n, raw, 0.0)


def _ring_bonds(n: int, periodic: bool):
    """Bonds of the literal sum over i of (i, i+1); n=2 periodic doubles (0,1)."""
    last = n if periodic else n - 1
    return [(i, (i + 1) % n) for i in range(last)]


def build_ising(n: int, h: float, periodic: bool = True) -> PauliHamiltonian:
    """Transverse-field Ising chain: -sum XX - h sum Z."""
    if n < 2:
        raise ValueError("need at least 2 qubits")
    raw: list[tuple[complex, str]] = []
    for a, b in _ring_bonds(n, periodic):
        raw.append((-1.0, _labels_with(n, {a: "X", b: "X"})))
    for q in range(n):
        raw.append((-h, _labels_with(n, {q: "Z"})))
    return hamiltonian_from_terms(n, raw)


def build_xy(n: int, gamma: float, h: float, periodic: bool = True) -> PauliHamiltonian:
    """Anisotropic XY chain: -sum [(1+g)/2 XX + (1-g)/2 YY] - h sum Z."""
    if n < 2:
        raise ValueError("need at least 2 qubits")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("anisotropy must lie in [0, 1]")
    raw: list[tuple[complex, str]] = []
    for a, b in _ring_bonds(n, periodic):
        raw.append((-(1 + gamma) / 2, _labels_with(n, {a: "X", b: "X"})))
        raw.append((-(1 - gamma) / 2, _labels_with(n, {a: "Y", b: "Y"})))
    for q in range(n):
        raw.append((-h, _labels_with(n, {q: "Z"})))
    return hamiltonian_from_terms(n, raw)


def build_xxz(n: int, delta: float, h: float, periodic: bool = True) -> PauliHamiltonian:
    """Heisenberg XXZ chain: -(1/4) sum (XX + YY + d ZZ) - h sum Z."""
    if n < 2:
        raise ValueError("need at least 2 qubits")
    raw: list[tuple[complex, str]] = []
    for a, b in _ring_bonds(n, periodic):
        raw.append((-0.25, _labels_with(n, {a: "X", b: "X"})))
        raw.append((-0.25, _labels_with(n, {a: "Y", b: "Y"})))
        raw.append((-0.25 * delta, _labels_with(n, {a: "Z", b: "Z"})))
    for q in range(n):
        raw.append((-h, _labels_with(n, {q: "Z"})))
    return hamiltonian_from_terms(n, raw)


# --- measurement grouping -------------------------------------------------


@dataclass(frozen=True)
class MeasurementGroup:
    """Simultaneously measurable chunk of a Hamiltonian.

    ``rotation`` maps the group to Z-diagonal form; after applying it,
    each original term equals the sum of ``diagonal_terms`` entries
    (coefficient, Z-labels) evaluated as Z-string parities.
    """

    terms: tuple[PauliString, ...]
    rotation: tuple[GateOp, ...]
    diagonal_terms: tuple[tuple[float, str], ...]


def _qubit_wise_compatible(labels_a: str, labels_b: str) -> bool:
    return all(
        a == b or a == "I" or b == "I" for a, b in zip(labels_a, labels_b)
    )


def _qubit_wise_group(num_qubits: int, members: list[PauliString]) -> MeasurementGroup:
    basis = ["I"] * num_qubits
    for t in members:
        for q, lab in enumerate(t.labels):
            if lab != "I":
                basis[q] = lab
    rotation = []
    for q, lab in enumerate(basis):
        if lab == "X":
            rotation.append(hadamard_gate(q))
        elif lab == "Y":
            rotation.append(GateOp("y_to_z", HADAMARD @ SDG_MATRIX, (q,)))
    diagonal = tuple(
        (
            float(t.coefficient.real),
            "".join("Z" if lab != "I" else "I" for lab in t.labels),
        )
        for t in members
    )
    return MeasurementGroup(tuple(members), tuple(rotation), diagonal)


def _group_qubit_wise(h: PauliHamiltonian) -> list[MeasurementGroup]:
    groups: list[list[PauliString]] = []
    for term in h.terms:
        for members in groups:
            if all(_qubit_wise_compatible(term.labels, m.labels) for m in members):
                members.append(term)
                break
        else:
            groups.append([term])
    return [_qubit_wise_group(h.num_qubits, g) for g in groups]


def _bond_rotation(alpha: float, a: int, b: int) -> GateOp:
    """Two-qubit rotation sending the flux-dressed hopping pair to (Za - Zb)/2.

    Diagonalizes cos(alpha) (XX + YY)/2 + sin(alpha) (YX - XY)/2, whose
    +1/-1 eigenvectors are (|01> +- e^{i alpha}|10>)/sqrt(2).
    """
    ph = np.exp(1j * alpha)
    mat = np.array(
        [
            [1, 0, 0, 0],
            [0, 1 / math.sqrt(2), ph.conjugate() / math.sqrt(2), 0],
            [0, 1 / math.sqrt(2), -ph.conjugate() / math.sqrt(2), 0],
            [0, 0, 0, 1],
        ],
        dtype=complex,
    )
    return GateOp("hop_basis", mat, (a, b))


def _group_hopping_bonds(h: PauliHamiltonian) -> tuple[list, list[PauliString]]:
    """Split terms into flux-dressed hopping bonds and a diagonal remainder."""
    by_support: dict[tuple, dict[str, PauliString]] = {}
    rest: list[PauliString] = []
    for term in h.terms:
        support = tuple(q for q, lab in enumerate(term.labels) if lab in "XY")
        if len(support) == 2:
            key_labels = "".join(term.labels[q] for q in support)
            zkey = tuple(
                q for q, lab in enumerate(term.labels) if lab == "Z"
            )
            by_support.setdefault((support, zkey), {})[key_labels] = term
        else:
            rest.append(term)
    bonds = []
    for (support, zkey), parts in sorted(by_support.items()):
        if set(parts) == {"XX", "YY"} or set(parts) == {"XX", "YY", "XY", "YX"}:
            cxx = parts["XX"].coefficient.real
            cyy = parts["YY"].coefficient.real
            cyx = parts["YX"].coefficient.real if "YX" in parts else 0.0
            cxy = parts["XY"].coefficient.real if "XY" in parts else 0.0
            if abs(cxx - cyy) < 1e-12 and abs(cyx + cxy) < 1e-12:
                magnitude = math.hypot(cxx, cyx) * 2.0
                alpha = math.atan2(cyx, cxx)
                bonds.append((support, zkey, magnitude, alpha, tuple(parts.values())))
                continue
        rest.extend(parts.values())
    return bonds, rest


def group_commuting(h: PauliHamiltonian, strategy: str = "qubit_wise"):
    """Partition terms into simultaneously measurable groups.

    ``qubit_wise`` greedily packs qubit-wise-commuting strings (single-qubit
    basis changes only).  ``hubbard`` additionally diagonalizes paired
    hopping terms with two-qubit bond rotations, giving the 4-circuit
    measurement layout of the nearest-neighbour Hubbard model.
    """
    if strategy == "qubit_wise":
        return _group_qubit_wise(h)
    if strategy != "hubbard":
        raise ValueError(f"unknown grouping strategy {strategy!r}")

    bonds, rest = _group_hopping_bonds(h)
    groups: list[MeasurementGroup] = []
    # Greedy pack qubit-disjoint bonds (bond qubits plus Z-string qubits).
    packed: list[list] = []
    for bond in bonds:
        support, zkey, _, _, _ = bond
        used = set(support) | set(zkey)
        for bucket in packed:
            busy = set()
            for s2, z2, *_ in bucket:
                busy |= set(s2) | set(z2)
            if not (busy & used):
                bucket.append(bond)
                break
        else:
            packed.append([bond])
    n = h.num_qubits
    for bucket in packed:
        rotation = []
        diagonal = []
        members = []
        for support, zkey, magnitude, alpha, terms in bucket:
            a, b = support
            rotation.append(_bond_rotation(alpha, a, b))
            zs = {q: "Z" for q in zkey}
            diagonal.append(
                (magnitude / 2.0, _labels_with(n, {a: "Z", **zs}))
            )
            diagonal.append(
                (-magnitude / 2.0, _labels_with(n, {b: "Z", **zs}))
            )
            members.extend(terms)
        groups.append(
            MeasurementGroup(tuple(members), tuple(rotation), tuple(diagonal))
        )
    if rest:
        rest_h = PauliHamiltonian(h.num_qubits, tuple(rest))
        groups.extend(_group_qubit_wise(rest_h))
    return groups


def group_expectation_exact(group: MeasurementGroup, state: QubitState) -> float:
    from .statevector import run_circuit

    rotated = run_circuit(group.rotation, state.num_qubits, state)
    return float(
        sum(c * expectation_pauli(rotated, labels) for c, labels in group.diagonal_terms)
    )


def group_expectation_sampled(
    group: MeasurementGroup, state: QubitState, shots: int, seed
) -> float:
    from .statevector import run_circuit, sample_counts, _support_parities

    rotated = run_circuit(group.rotation, state.num_qubits, state)
    counts = sample_counts(rotated, shots, seed)
    freqs = counts.frequencies()
    value = 0.0
    for coeff, labels in group.diagonal_terms:
        support = [q for q, lab in enumerate(labels) if lab == "Z"]
        value += coeff * float(
            np.dot(_support_parities(state.num_qubits, support), freqs)
        )
    return value


def sampled_expectation(
    h: PauliHamiltonian,
    state: QubitState,
    shots_per_group: int,
    seed: int,
    strategy: str = "qubit_wise",
) -> float:
    """Shot-based estimate of <H>: equal shots for each commuting group."""
    groups = group_commuting(h, strategy)
    value = h.identity_offset
    for k, group in enumerate(groups):
        from .statevector import child_seed

        value += group_expectation_sampled(
            group, state, shots_per_group, child_seed(seed, k)
        )
    return float(value)


# --- exact oracles --------------------------------------------------------


@dataclass(frozen=True)
class EigenSolution:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None

    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    def ground_state(self) -> np.ndarray:
        if self.eigenvectors is None:
            raise ValueError("eigenvectors were not retained")
        return self.eigenvectors[:, 0]


def exact_diagonalize(h: PauliHamiltonian, keep_vectors: bool = True) -> EigenSolution:
    """Full dense Hermitian eigendecomposition, eigenvalues ascending."""
    if h.num_qubits > MAX_DIAG_QUBITS:
        raise ValueError(f"register too large ({h.num_qubits} > {MAX_DIAG_QUBITS})")
    mat = to_matrix(h)
    if keep_vectors:
        vals, vecs = np.linalg.eigh(mat)
        return EigenSolution(vals, vecs)
    return EigenSolution(np.linalg.eigvalsh(mat), None)


def exact_gibbs(h: PauliHamiltonian, beta: float) -> tuple[DensityMatrix, np.ndarray]:
    """Gibbs state exp(-beta H)/Z and its occupation probabilities.

    Probabilities come back sorted by energy (ascending), stabilized by
    subtracting the ground energy before exponentiation; weights that
    underflow clamp to zero.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if not math.isfinite(beta):
        raise ValueError("beta must be finite")
    if h.num_qubits > MAX_GIBBS_QUBITS:
        raise ValueError(f"register too large ({h.num_qubits} > {MAX_GIBBS_QUBITS})")
    sol = exact_diagonalize(h)
    energies = sol.eigenvalues
    with np.errstate(under="ignore"):
        weights = np.exp(-beta * (energies - energies[0]))
    probs = weights / weights.sum()
    vecs = sol.eigenvectors
    rho = (vecs * probs) @ vecs.conj().T
    return DensityMatrix(h.num_qubits, rho), probs


def free_energy_exact(h: PauliHamiltonian, beta: float) -> float:
    """-(1/beta) ln Z, stabilized around the ground energy."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    energies = exact_diagonalize(h, keep_vectors=False).eigenvalues
    e0 = energies[0]
    with np.errstate(under="ignore"):
        log_z = math.log(float(np.sum(np.exp(-beta * (energies - e0)))))
    return float(e0 - log_z / beta)


# --- serialization --------------------------------------------------------


def dumps(h: PauliHamiltonian) -> str:
    """Line-oriented text form: header then one coefficient<TAB>labels per term."""
    lines = [f"qubits={h.num_qubits} offset={h.identity_offset!r}"]
    for term in h.terms:
        coeff = term.coefficient
        value = repr(coeff.real) if coeff.imag == 0 else repr(coeff)
        lines.append(f"{value}\t{term.labels}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> PauliHamiltonian:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("qubits="):
        raise ValueError("missing header line")
    head = dict(part.split("=", 1) for part in lines[0].split())
    num_qubits = int(head["qubits"])
    offset = float(head["offset"])
    raw = []
    for ln in lines[1:]:
        value, labels = ln.split("\t")
        raw.append((complex(value), labels))
    return hamiltonian_from_terms(num_qubits, raw, offset)


# --- symmetry helpers -----------------------------------------------------


def colour_number_operator(spec: HubbardSpec, colour: int) -> PauliHamiltonian:
    """Total particle number of one colour: sum_i (1 - Z_{sL+i})/2."""
    n = spec.num_qubits
    raw = [
        (-0.5, _labels_with(n, {spec.qubit(i, colour): "Z"}))
        for i in range(spec.sites)
    ]
    return hamiltonian_from_terms(n, raw, 0.5 * spec.sites)


def sector_basis_indices(spec: HubbardSpec) -> np.ndarray:
    """Basis indices whose per-colour Hamming weight matches the spec."""
    L, N = spec.sites, spec.colours
    rail_indices: list[list[int]] = []
    for s in range(N):
        occ_states = []
        for occ in combinations(range(L), spec.particles[s]):
            bits = 0
            for site in occ:
                bits |= 1 << (L - 1 - site)
            occ_states.append(bits)
        rail_indices.append(sorted(occ_states))
    out: list[int] = []

    def build(prefix: int, rail: int):
        if rail == N:
            out.append(prefix)
            return
        for bits in rail_indices[rail]:
            build((prefix << L) | bits, rail + 1)

    build(0, 0)
    return np.array(sorted(out), dtype=np.int64)
