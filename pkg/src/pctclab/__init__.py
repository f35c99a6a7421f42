"""Quantum circuits with closed timelike curves under post-selected teleportation and Deutsch semantics."""
from .circuit import (
    BellInit,
    Circuit,
    CircuitError,
    MatrixGate,
    NamedGate,
    Postselection,
    TableGate,
    TableRow,
    Wire,
    WireRole,
    compile_unitary,
    validate,
)
from .deutsch import DeutschSolution, circuit_deutsch, deutsch_map, fixed_points
from .experiments import ExperimentReport, run_experiment
from .linalg import AmplitudeVector, Operator, partial_trace, tensor_product
from .pctc import (
    EntangledResidueError,
    effective_operator,
    loop_operator,
    run_postselected,
    teleportation_identity_check,
)
from .serialization import CircuitParseError, parse_circuit, serialize_circuit

__version__ = "0.1.0"

__all__ = [
    "BellInit",
    "Circuit",
    "CircuitError",
    "MatrixGate",
    "NamedGate",
    "Postselection",
    "TableGate",
    "TableRow",
    "Wire",
    "WireRole",
    "compile_unitary",
    "validate",
    "DeutschSolution",
    "circuit_deutsch",
    "deutsch_map",
    "fixed_points",
    "ExperimentReport",
    "run_experiment",
    "AmplitudeVector",
    "Operator",
    "partial_trace",
    "tensor_product",
    "EntangledResidueError",
    "effective_operator",
    "loop_operator",
    "run_postselected",
    "teleportation_identity_check",
    "CircuitParseError",
    "parse_circuit",
    "serialize_circuit",
]
