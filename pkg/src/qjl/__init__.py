"""Quantum Johnson-Lindenstrauss transforms from unitary designs, plus a PIR simulator."""
from .circuits import GateCircuit, apply_circuit, generate_local_random_circuit
from .designs import FiniteDesign, estimate_tpe_lambda, iterate_design, monomial_design_error
from .estimator import JLProjector
from .jl import classical_jl, pairwise_preservation_report, quantum_jl_measure
from .linalg import BlockStructure, inner_product, polarization_inner_product
from .sampling import HaarRestriction, RngStream, sample_haar_unit_vector, sample_haar_unitary

__version__ = "0.1.0"

__all__ = [
    "BlockStructure",
    "FiniteDesign",
    "GateCircuit",
    "HaarRestriction",
    "JLProjector",
    "RngStream",
    "apply_circuit",
    "classical_jl",
    "estimate_tpe_lambda",
    "generate_local_random_circuit",
    "inner_product",
    "iterate_design",
    "monomial_design_error",
    "pairwise_preservation_report",
    "polarization_inner_product",
    "quantum_jl_measure",
    "sample_haar_unit_vector",
    "sample_haar_unitary",
]
