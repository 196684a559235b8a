"""Workbench for fast matrix multiplication algorithms.

Algorithms are bilinear triples (U, V, W); they can be proven correct,
composed by Kronecker products, lowered to block programs, executed,
costed and emitted as BLAS-style call sequences.
"""

from .analysis import CostReport, count_model, error_profile, workspace_model
from .catalog import BilinearTriple, builtin, builtin_names, classical_triple, load_triple, parse_chain, save_triple
from .codegen import EmitConfig, emit_callseq
from .composer import chain_flatten, kron_compose
from .core import Coefficient, PartitionSet, mat_add, naive_multiply, partition, unpartition
from .executor import ExecStats, execute, recursive_multiply
from .graph_ir import GraphIR, build_bilinear_graph, build_classical_graph, parse_graph, pretty_print, schedule
from .verifier import VerifyReport, brent_check, numeric_spot_check

__all__ = [
    "BilinearTriple", "Coefficient", "CostReport", "EmitConfig", "ExecStats", "GraphIR",
    "PartitionSet", "VerifyReport", "brent_check", "build_bilinear_graph", "build_classical_graph",
    "builtin", "builtin_names", "chain_flatten", "classical_triple", "count_model", "emit_callseq",
    "error_profile", "execute", "kron_compose", "load_triple", "mat_add", "naive_multiply",
    "numeric_spot_check", "parse_chain", "parse_graph", "partition", "pretty_print",
    "recursive_multiply", "save_triple", "schedule", "unpartition", "workspace_model",
]
