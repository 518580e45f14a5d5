"""qdriftlab: randomized product-formula compiler, rigorous gate-cost bounds,
dense channel verification, and phase-estimation resource planning for
Pauli-sum Hamiltonians."""

from .compiler import (
    AliasSampler,
    Circuit,
    CircuitMeta,
    GateOp,
    compile_circuit,
    compile_controlled,
    elementary_gate_estimate,
    gate_count_approx,
    gate_count_exact,
    rng_from_seed,
    sample_term,
    segment_error_bound,
    total_error_bound,
)
from .hamiltonian import (
    ControlledExtension,
    ControlledTerm,
    Hamiltonian,
    HamiltonianError,
    HamiltonianParseError,
    PauliString,
    Term,
    WeightProfile,
    parse_hamiltonian,
)
from .trotter import (
    CostQuery,
    CostReport,
    Method,
    best_method,
    closed_form_suzuki_count,
    crossover_time,
    gate_count,
    solve_r,
    suzuki_error,
    suzuki_prefactor,
    trotter_error_det,
    trotter_error_random,
)

__version__ = "0.1.0"

__all__ = [
    "AliasSampler",
    "Circuit",
    "CircuitMeta",
    "ControlledExtension",
    "ControlledTerm",
    "CostQuery",
    "CostReport",
    "GateOp",
    "Hamiltonian",
    "HamiltonianError",
    "HamiltonianParseError",
    "Method",
    "PauliString",
    "Term",
    "WeightProfile",
    "best_method",
    "closed_form_suzuki_count",
    "compile_circuit",
    "compile_controlled",
    "crossover_time",
    "elementary_gate_estimate",
    "gate_count",
    "gate_count_approx",
    "gate_count_exact",
    "parse_hamiltonian",
    "rng_from_seed",
    "sample_term",
    "segment_error_bound",
    "solve_r",
    "suzuki_error",
    "suzuki_prefactor",
    "total_error_bound",
    "trotter_error_det",
    "trotter_error_random",
]
