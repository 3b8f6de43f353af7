"""Wasserstein distances between persistence diagrams as QUBO problems.

Compile two diagrams into a binary quadratic model, minimize it by
enumeration or classical annealing, embed it onto a Chimera graph, and
check every answer against exact matching oracles.
"""

from .diagrams import PersistenceDiagram, augment, parse_diagram, read_diagram
from .embed import chimera, embed_qubo, find_embedding, unembed_sampleset, validate_embedding
from .errors import DimensionError, DomainError, ParameterError, ParseError, PdQuboError, SizeError, StructuralError
from .model import IsingModel, QuboModel, argmin_exhaustive, evaluate_ising, evaluate_qubo, ising_to_qubo, logical_graph, qubo_to_ising
from .oracle import brute_force_distance, hungarian_distance
from .qubo_io import format_qubo, parse_qubo, read_qubo
from .sampler import Schedule, SampleSet, anneal, exact_sampleset, histogram, metropolis_chain, reverse_anneal
from .wgraph import build_wasserstein_graph, compile_qubo, decode_matching, default_gamma

__version__ = "0.1.0"

__all__ = [
    "PersistenceDiagram", "augment", "parse_diagram", "read_diagram",
    "chimera", "embed_qubo", "find_embedding", "unembed_sampleset", "validate_embedding",
    "DimensionError", "DomainError", "ParameterError", "ParseError", "PdQuboError", "SizeError", "StructuralError",
    "IsingModel", "QuboModel", "argmin_exhaustive", "evaluate_ising", "evaluate_qubo",
    "ising_to_qubo", "logical_graph", "qubo_to_ising",
    "brute_force_distance", "hungarian_distance",
    "format_qubo", "parse_qubo", "read_qubo",
    "Schedule", "SampleSet", "anneal", "exact_sampleset", "histogram", "metropolis_chain", "reverse_anneal",
    "build_wasserstein_graph", "compile_qubo", "decode_matching", "default_gamma",
]
