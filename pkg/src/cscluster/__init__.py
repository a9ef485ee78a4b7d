"""Compressive spectral clustering for static and time-evolving graphs.

Clustering features are low-pass filtered random signals instead of exact
eigenvectors; on graph sequences, part of the feature block is carried over
from the previous step. A dense eigendecomposition path is kept as the
baseline and evaluation oracle.
"""

from .graphs import (Graph, LaplacianMatrix, SbmParams, graphs_equal, laplacian,
                     load_edge_list, load_labels, perturb_edges, perturb_nodes,
                     planted_labels, planted_sizes, save_edge_list, save_labels,
                     sbm_generate)
from .spectral import (CapacityError, SpectralBasis, edge_similarity, eigendecompose,
                       ideal_projector_apply, perturbation_eigengap, sc_assign,
                       spectral_similarity)
from .filters import (EigencountSearchError, FilterConfig, FilterPoly, MatvecCounter,
                      apply_filter, cheb_coeffs, eigencount, find_lambda_k,
                      jackson_damping, warm_interval)
from .kmeans import Assignment, KmeansConfig, evaluate_on_basis, kmeans, kmeans_cost
from .signals import FeatureMatrix, random_signals
from .csc import (CscDiagnostics, alignment_Q, cost_margin, csc_assign, csc_features,
                  reuse_cost_margin)
from .dynamic import (DynamicConfig, DynamicState, SequenceError, StepDiagnostics,
                      dynamic_init, dynamic_step, run_sequence)
from .bench import (ExperimentConfig, perturbed_sequence, run_dynamic_experiment,
                    run_similarity_study, run_static_study)
from .cli import cli_main

__version__ = "0.1.0"

__all__ = [
    "Graph", "LaplacianMatrix", "SbmParams", "graphs_equal", "laplacian",
    "load_edge_list", "load_labels", "perturb_edges", "perturb_nodes",
    "planted_labels", "planted_sizes", "save_edge_list", "save_labels",
    "sbm_generate",
    "CapacityError", "SpectralBasis", "edge_similarity", "eigendecompose",
    "ideal_projector_apply", "perturbation_eigengap", "sc_assign",
    "spectral_similarity",
    "EigencountSearchError", "FilterConfig", "FilterPoly", "MatvecCounter",
    "apply_filter", "cheb_coeffs", "eigencount", "find_lambda_k",
    "jackson_damping", "warm_interval",
    "Assignment", "KmeansConfig", "evaluate_on_basis", "kmeans", "kmeans_cost",
    "FeatureMatrix", "random_signals",
    "CscDiagnostics", "alignment_Q", "cost_margin", "csc_assign", "csc_features",
    "reuse_cost_margin",
    "DynamicConfig", "DynamicState", "SequenceError", "StepDiagnostics",
    "dynamic_init", "dynamic_step", "run_sequence",
    "ExperimentConfig", "perturbed_sequence", "run_dynamic_experiment",
    "run_similarity_study", "run_static_study",
    "cli_main",
]
