"""Simulation toolkit for variational quantum algorithms at desk scale.

Modules: ``statevector`` (dense simulation), ``hamiltonian`` (Pauli
algebra, lattice models, exact oracles), ``ansatz`` (parametrised-circuit
builders), ``optimize`` (classical optimizers), ``vqe`` (Hubbard
ground-state workflow), ``vsv`` (closest-separable-state search),
``gibbs`` (thermal-state preparation) and ``cli`` (experiment runner).
"""

__version__ = "0.1.0"

from .statevector import (  # noqa: F401
    DensityMatrix,
    GateOp,
    QubitState,
    ShotCounts,
    ShotsMode,
)
from .hamiltonian import HubbardSpec, PauliHamiltonian, PauliString  # noqa: F401
from .ansatz import AnsatzSpec, ParametrizedCircuit  # noqa: F401
from .optimize import Objective, OptimizationResult, OptimizerConfig  # noqa: F401
