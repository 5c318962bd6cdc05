"""Parametrised-circuit builders and parameter binding.

Most circuits are flat lists of gate templates whose angles are linear in
the parameter vector (``angle = scale * values[slot]``).  Distribution-
loading circuits need nonlinear angle maps, so a circuit may instead carry
a ``binder`` that turns a parameter vector directly into concrete gates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import statevector as sv
from .hamiltonian import HubbardSpec
from .statevector import GateOp, QubitState, run_circuit


@dataclass(frozen=True)
class GateTemplate:
    name: str
    qubits: tuple[int, ...]
    slot: int | None = None
    scale: float = 1.0
    angle: float | None = None  # literal angle for fixed parametrised gates


# name -> (matrix builder, generator for U = exp(-i angle G), shift radius)
GATE_LIBRARY: dict[str, tuple] = {
    "ry": (sv.ry_matrix, sv.PAULI_MATRICES["Y"] / 2, 0.5),
    "rz": (sv.rz_matrix, sv.PAULI_MATRICES["Z"] / 2, 0.5),
    "rx": (sv.rx_matrix, sv.PAULI_MATRICES["X"] / 2, 0.5),
    "phase": (sv.phase_matrix, np.diag([0.0, -1.0 + 0j]), None),
    "crz": (sv.crz_matrix, np.diag([0, 0, 1.0, -1.0]).astype(complex) / 2, None),
    "hopping": (
        sv.hopping_matrix,
        (np.kron(sv.PAULI_MATRICES["X"], sv.PAULI_MATRICES["X"])
         + np.kron(sv.PAULI_MATRICES["Y"], sv.PAULI_MATRICES["Y"])) / 2,
        None,
    ),
    "rxy": (
        sv.rxy_matrix,
        np.kron(sv.PAULI_MATRICES["X"], sv.PAULI_MATRICES["Y"]) / 2,
        0.5,
    ),
    "ryx": (
        sv.ryx_matrix,
        np.kron(sv.PAULI_MATRICES["Y"], sv.PAULI_MATRICES["X"]) / 2,
        0.5,
    ),
}

FIXED_GATES: dict[str, Callable[..., GateOp]] = {
    "x": sv.x_gate,
    "h": sv.hadamard_gate,
    "cnot": sv.cnot_gate,
    "s": sv.s_gate,
    "sdg": sv.sdg_gate,
}


@dataclass(frozen=True)
class ParametrizedCircuit:
    """Ordered gate templates with parameter slots.

    ``binder``, when present, supersedes the template list for binding:
    it maps a full parameter vector to concrete gates.
    """

    num_qubits: int
    num_params: int
    templates: tuple[GateTemplate, ...] = ()
    metadata: dict = field(default_factory=dict)
    binder: Callable[[np.ndarray], list[GateOp]] | None = None

    def __post_init__(self):
        if self.binder is None:
            used = {
                t.slot for t in self.templates if t.slot is not None
            }
            if used != set(range(self.num_params)):
                raise ValueError("every parameter slot must be referenced")

    @property
    def supports_adjoint(self) -> bool:
        return self.binder is None

    def shift_radii(self) -> np.ndarray | None:
        """Per-slot parameter-shift radius, or None if any slot lacks one."""
        if self.binder is not None:
            return None
        radii = np.full(self.num_params, np.nan)
        for t in self.templates:
            if t.slot is None:
                continue
            r = GATE_LIBRARY[t.name][2]
            if r is None:
                return None
            r_eff = r * abs(t.scale)
            if math.isnan(radii[t.slot]):
                radii[t.slot] = r_eff
            elif abs(radii[t.slot] - r_eff) > 1e-12:
                return None  # mixed radii on one slot: shift rule inapplicable
        return radii


def _template_gate(template: GateTemplate, values: np.ndarray | None) -> GateOp:
    if template.name in FIXED_GATES:
        return FIXED_GATES[template.name](*template.qubits)
    matrix_fn, generator, radius = GATE_LIBRARY[template.name]
    if template.slot is not None:
        if values is None:
            raise ValueError("unbound parametrised gate")
        angle = template.scale * float(values[template.slot])
    else:
        angle = float(template.angle)
    return GateOp(
        template.name, matrix_fn(angle), template.qubits, generator, radius
    )


def bind_parameters(circuit: ParametrizedCircuit, values) -> list[GateOp]:
    """Substitute every slot; returns the concrete gate sequence."""
    values = np.asarray(values, dtype=float)
    if values.shape != (circuit.num_params,):
        raise ValueError(
            f"expected {circuit.num_params} parameters, got {values.shape}"
        )
    if circuit.binder is not None:
        return circuit.binder(values)
    return [_template_gate(t, values) for t in circuit.templates]


def circuit_state(
    circuit: ParametrizedCircuit, values, initial: QubitState | None = None
) -> QubitState:
    return run_circuit(
        bind_parameters(circuit, values), circuit.num_qubits, initial
    )


def expectation_with_gradient(
    circuit: ParametrizedCircuit,
    values: np.ndarray,
    apply_observable: Callable[[np.ndarray], np.ndarray],
    initial: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """<psi|O|psi> and its exact parameter gradient by a reverse sweep.

    ``apply_observable`` maps an amplitude array to O @ array.  ``initial``
    may carry a trailing batch axis; the expectation is then summed over
    the batch (Frobenius pairing), which evaluates Tr[B' O B] for a batch
    matrix B.  Only template-based circuits (linear angle maps) qualify.
    """
    if not circuit.supports_adjoint:
        raise ValueError("circuit does not support analytic gradients")
    n = circuit.num_qubits
    if initial is None:
        psi = np.zeros(2**n, dtype=complex)
        psi[0] = 1.0
    else:
        psi = np.asarray(initial, dtype=complex)
    gates = bind_parameters(circuit, values)
    for gate in gates:
        psi = sv.apply_unitary_to_array(psi, gate.matrix, gate.qubits, n)
    lam = apply_observable(psi)
    value = float(np.real(np.vdot(psi, lam)))
    grad = np.zeros(circuit.num_params)
    for gate, template in zip(reversed(gates), reversed(circuit.templates)):
        if template.slot is not None:
            gen_psi = sv.apply_unitary_to_array(
                psi, gate.generator, gate.qubits, n
            )
            grad[template.slot] += (
                2.0 * template.scale * float(np.imag(np.vdot(lam, gen_psi)))
            )
        dag = gate.matrix.conj().T
        psi = sv.apply_unitary_to_array(psi, dag, gate.qubits, n)
        lam = sv.apply_unitary_to_array(lam, dag, gate.qubits, n)
    return value, grad


# --- ansatz builders ------------------------------------------------------


@dataclass(frozen=True)
class AnsatzSpec:
    """Declarative ansatz selection used by the experiment runner."""

    kind: str  # hva_hubbard | hw_efficient_ry | parity_brickwall |
    #           grover_rudolph | grover_rudolph_xy_reduced
    layers: int = 1
    geometry: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.layers < 1:
            raise ValueError("layers must be >= 1")


def build_hva_hubbard(spec: HubbardSpec, layers: int) -> ParametrizedCircuit:
    """Number-preserving Hamiltonian-variational ansatz for the Hubbard ring.

    X gates put the N_s fermions of each colour on its lowest-index sites,
    followed by Rz on the occupied lines; each layer then applies the
    hopping sublayer (parametrised-iSWAP on same-colour neighbours), the
    controlled-Rz interaction sublayer between adjacent colours, and an
    Rz sublayer on every qubit.
    """
    if layers < 1:
        raise ValueError("layers must be >= 1")
    L, N = spec.sites, spec.colours
    n = spec.num_qubits
    templates: list[GateTemplate] = []
    slot = 0
    occupied = []
    for s in range(N):
        for i in range(spec.particles[s]):
            q = spec.qubit(i, s)
            occupied.append(q)
            templates.append(GateTemplate("x", (q,)))
    for q in occupied:
        templates.append(GateTemplate("rz", (q,), slot))
        slot += 1
    for _ in range(layers):
        for s in range(N):
            for start in (0, 1):  # even-odd then odd-even for parallel depth
                for i in range(start, L - 1, 2):
                    a, b = spec.qubit(i, s), spec.qubit(i + 1, s)
                    templates.append(GateTemplate("hopping", (a, b), slot))
                    slot += 1
        for i in range(L):
            for s in range(N - 1):
                a, b = spec.qubit(i, s), spec.qubit(i, s + 1)
                templates.append(GateTemplate("crz", (a, b), slot))
                slot += 1
        for q in range(n):
            templates.append(GateTemplate("rz", (q,), slot))
            slot += 1
    params_per_layer = 3 * N * L - N - L
    metadata = {
        "kind": "hva_hubbard",
        "layers": layers,
        "params_per_layer": params_per_layer,
        "initial_params": sum(spec.particles),
        "cnot_count_per_layer": 5 * N * L - 3 * N - 2 * L,
    }
    assert slot == sum(spec.particles) + layers * params_per_layer
    return ParametrizedCircuit(n, slot, tuple(templates), metadata)


def _entangler_pairs(n: int, topology: str) -> list[tuple[int, int]]:
    if topology == "linear":
        return [(i, i + 1) for i in range(n - 1)]
    if topology == "alternating":
        pairs = [(i, i + 1) for i in range(0, n - 1, 2)]
        pairs += [(i, i + 1) for i in range(1, n - 2, 2)]
        pairs.append((n - 1, 0))
        return pairs
    raise ValueError(f"unknown topology {topology!r}")


def build_hw_efficient_ry(
    n: int, layers: int, topology: str = "linear"
) -> ParametrizedCircuit:
    """Ry rotations plus CNOT entanglers; real amplitudes by construction."""
    if n < 1:
        raise ValueError("need at least one qubit")
    if layers < 1:
        raise ValueError("layers must be >= 1")
    templates: list[GateTemplate] = []
    slot = 0
    for _ in range(layers):
        for q in range(n):
            templates.append(GateTemplate("ry", (q,), slot))
            slot += 1
        if n > 1:
            for a, b in _entangler_pairs(n, topology):
                templates.append(GateTemplate("cnot", (a, b)))
    for q in range(n):
        templates.append(GateTemplate("ry", (q,), slot))
        slot += 1
    metadata = {"kind": "hw_efficient_ry", "layers": layers, "topology": topology}
    return ParametrizedCircuit(n, slot, tuple(templates), metadata)


def build_product_ry(n: int) -> ParametrizedCircuit:
    """Entangler-free ancilla: one Ry per qubit (product distributions only)."""
    templates = tuple(GateTemplate("ry", (q,), q) for q in range(n))
    return ParametrizedCircuit(n, n, templates, {"kind": "product_ry"})


def _brickwall_pairs(n: int) -> list[tuple[int, int]]:
    pairs = [(i, i + 1) for i in range(0, n - 1, 2)]
    pairs += [(i, i + 1) for i in range(1, n - 1, 2)]
    pairs.append((n - 1, 0))
    return pairs


def build_parity_brickwall(n: int, layers: int) -> ParametrizedCircuit:
    """Brick-wall of two-parameter parity-preserving gates on a ring.

    Each brick is exp(-i a XY/2) followed by exp(-i b YX/2); the product is
    the block-diagonal parity gate that mixes {|00>,|11>} and {|01>,|10>}
    separately.  2n parameters per layer.
    """
    if n < 2:
        raise ValueError("need at least 2 qubits")
    if layers < 1:
        raise ValueError("layers must be >= 1")
    templates: list[GateTemplate] = []
    slot = 0
    for _ in range(layers):
        for a, b in _brickwall_pairs(n):
            templates.append(GateTemplate("rxy", (a, b), slot))
            templates.append(GateTemplate("ryx", (a, b), slot + 1))
            slot += 2
    metadata = {"kind": "parity_brickwall", "layers": layers}
    assert slot == 2 * n * layers
    return ParametrizedCircuit(n, slot, tuple(templates), metadata)


def parity_gate_matrix(phi_i: float, phi_j: float) -> np.ndarray:
    """Combined two-parameter parity gate R_yx(phi_j) R_xy(phi_i)."""
    return sv.ryx_matrix(phi_j) @ sv.rxy_matrix(phi_i)


# --- distribution-loading circuits ----------------------------------------


def _uc_ry_gates(angles: np.ndarray, controls: list[int], target: int) -> list[GateOp]:
    """Uniformly-controlled Ry: Ry(angles[p]) for control pattern p.

    Recursive CNOT conjugation; exact matrix semantics, no ancillas.
    """
    if not controls:
        return [GateOp("ry", sv.ry_matrix(float(angles[0])), (target,),
                       sv.PAULI_MATRICES["Y"] / 2, 0.5)]
    half = len(angles) // 2
    left, right = angles[:half], angles[half:]
    first = _uc_ry_gates((left + right) / 2.0, controls[1:], target)
    second = _uc_ry_gates((left - right) / 2.0, controls[1:], target)
    flip = sv.cnot_gate(controls[0], target)
    return first + [flip] + second + [flip]


def _gr_tree_gates(n: int, tree_angles: np.ndarray) -> list[GateOp]:
    gates: list[GateOp] = []
    for level in range(n):
        start = 2**level - 1
        angles = np.asarray(tree_angles[start : start + 2**level], dtype=float)
        gates.extend(_uc_ry_gates(angles, list(range(level)), level))
    return gates


def build_grover_rudolph(n: int) -> ParametrizedCircuit:
    """Binary tree of multi-controlled Ry rotations loading sqrt(p) amplitudes.

    Slot m sits at tree level floor(log2(m+1)); its control pattern is the
    position within the level.  Bound gates are emitted as CNOT + Ry via
    uniformly-controlled decompositions.
    """
    if not 1 <= n <= 12:
        raise ValueError("supported register sizes are 1..12")
    num_params = 2**n - 1

    def binder(values: np.ndarray) -> list[GateOp]:
        return _gr_tree_gates(n, values)

    metadata = {"kind": "grover_rudolph", "tree_size": num_params}
    return ParametrizedCircuit(n, num_params, (), metadata, binder)


def compute_gr_angles(probabilities) -> np.ndarray:
    """Tree angles reproducing a distribution: theta = 2 atan(sqrt(S1/S0)).

    S0/S1 are the probability masses of the left/right subtree under each
    node; zero-mass nodes get angle 0 (the branch is unreachable).
    """
    p = np.asarray(probabilities, dtype=float)
    if np.any(p < 0):
        raise ValueError("probabilities must be non-negative")
    n = int(round(math.log2(p.size)))
    if 2**n != p.size:
        raise ValueError("distribution length must be a power of two")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {p.sum()}, expected 1")
    angles = np.zeros(2**n - 1)
    m = 0
    for level in range(n):
        block = p.reshape(2 ** (level + 1), -1).sum(axis=1)
        for j in range(2**level):
            s0, s1 = block[2 * j], block[2 * j + 1]
            angles[m] = 2.0 * math.atan2(math.sqrt(s1), math.sqrt(s0))
            m += 1
    return angles


# Reduced 4-qubit tree for XY-model Boltzmann loading.  Tree positions
# 0..14; the model's spectral degeneracies pin 8 of them:
#   8, 9, 12, 13      -> pi/2                (degenerate level pairs)
#   11, 14            -> 2 atan(exp(-2 beta)) (boundary-mode gap of 4)
#   10                -> tied to position 7
#   4                 -> f(theta_1, theta_3)
GR_XY_FREE_POSITIONS = (0, 1, 2, 3, 5, 6, 7)


def gr_xy_tied_angle(theta_1: float, theta_3: float) -> float:
    """f(theta_1, theta_3) = 2 acos(sin(theta_3/2) / tan(theta_1/2))."""
    tan_half = math.tan(theta_1 / 2.0)
    if abs(tan_half) < 1e-12:
        raise ValueError("tied angle undefined: tan(theta_1/2) = 0")
    ratio = math.sin(theta_3 / 2.0) / tan_half
    if abs(ratio) > 1.0 + 1e-12:
        raise ValueError(f"tied angle undefined: |ratio| = {abs(ratio)} > 1")
    return 2.0 * math.acos(min(1.0, max(-1.0, ratio)))


def build_gr_xy_reduced(h: float, gamma: float, beta: float) -> ParametrizedCircuit:
    """Symmetry-reduced 4-qubit distribution loader for the XY Gibbs weights.

    Seven free slots map onto tree positions (0,1,2,3,5,6,7); the other
    eight angles are fixed by the XY degeneracy structure at inverse
    temperature ``beta``.
    """
    pinned = 2.0 * math.atan(math.exp(-2.0 * beta))

    def binder(values: np.ndarray) -> list[GateOp]:
        tree = np.zeros(15)
        for slot, pos in enumerate(GR_XY_FREE_POSITIONS):
            tree[pos] = values[slot]
        tree[4] = gr_xy_tied_angle(tree[1], tree[3])
        tree[8] = tree[9] = math.pi / 2.0
        tree[12] = tree[13] = math.pi / 2.0
        tree[10] = tree[7]
        tree[11] = tree[14] = pinned
        return _gr_tree_gates(4, tree)

    metadata = {
        "kind": "grover_rudolph_xy_reduced",
        "h": h,
        "gamma": gamma,
        "beta": beta,
        "free_positions": GR_XY_FREE_POSITIONS,
        "pinned_angle": pinned,
    }
    return ParametrizedCircuit(4, 7, (), metadata, binder)


def build_ansatz(spec: AnsatzSpec) -> ParametrizedCircuit:
    geo = spec.geometry
    if spec.kind == "hva_hubbard":
        return build_hva_hubbard(geo["hubbard"], spec.layers)
    if spec.kind == "hw_efficient_ry":
        return build_hw_efficient_ry(
            geo["num_qubits"], spec.layers, geo.get("topology", "linear")
        )
    if spec.kind == "parity_brickwall":
        return build_parity_brickwall(geo["num_qubits"], spec.layers)
    if spec.kind == "grover_rudolph":
        return build_grover_rudolph(geo["num_qubits"])
    if spec.kind == "grover_rudolph_xy_reduced":
        return build_gr_xy_reduced(geo["h"], geo["gamma"], geo["beta"])
    raise ValueError(f"unknown ansatz kind {spec.kind!r}")


# --- circuit serialization --------------------------------------------------


def circuit_to_text(circuit: ParametrizedCircuit, values=None) -> str:
    """Reproducibility dump: one ``gate targets [slot/angle]`` line per gate.

    Template circuits serialize symbolically; binder-based circuits
    require ``values`` and serialize their bound gate sequence.
    """
    lines = [f"qubits={circuit.num_qubits} params={circuit.num_params}"]
    if circuit.binder is not None:
        if values is None:
            raise ValueError("binder-based circuits serialize bound only")
        for gate in bind_parameters(circuit, values):
            qubits = ",".join(str(q) for q in gate.qubits)
            angle = _gate_angle(gate)
            suffix = f" angle={angle!r}" if angle is not None else ""
            lines.append(f"{gate.name} {qubits}{suffix}")
        return "\n".join(lines) + "\n"
    for t in circuit.templates:
        qubits = ",".join(str(q) for q in t.qubits)
        if t.slot is not None:
            suffix = f" slot={t.slot}"
            if t.scale != 1.0:
                suffix += f" scale={t.scale!r}"
        elif t.angle is not None:
            suffix = f" angle={t.angle!r}"
        else:
            suffix = ""
        lines.append(f"{t.name} {qubits}{suffix}")
    return "\n".join(lines) + "\n"


def _gate_angle(gate: GateOp) -> float | None:
    if gate.name not in GATE_LIBRARY:
        return None
    matrix_fn = GATE_LIBRARY[gate.name][0]
    # Recover the angle from the generator expectation; only used for dumps.
    generator = GATE_LIBRARY[gate.name][1]
    vals, vecs = np.linalg.eigh(generator)
    probe = vecs[:, -1]
    phase = np.vdot(probe, gate.matrix @ probe)
    angle = -np.angle(phase) / vals[-1] if vals[-1] != 0 else 0.0
    if np.allclose(matrix_fn(angle), gate.matrix, atol=1e-9):
        return float(angle)
    return None


def circuit_from_text(text: str) -> ParametrizedCircuit:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = dict(part.split("=", 1) for part in lines[0].split())
    num_qubits, num_params = int(head["qubits"]), int(head["params"])
    templates = []
    for ln in lines[1:]:
        parts = ln.split()
        name = parts[0]
        qubits = tuple(int(q) for q in parts[1].split(","))
        slot, scale, angle = None, 1.0, None
        for extra in parts[2:]:
            key, value = extra.split("=", 1)
            if key == "slot":
                slot = int(value)
            elif key == "scale":
                scale = float(value)
            elif key == "angle":
                angle = float(value)
        templates.append(GateTemplate(name, qubits, slot, scale, angle))
    return ParametrizedCircuit(num_qubits, num_params, tuple(templates))
