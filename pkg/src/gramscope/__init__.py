"""Reconstruction of state-measurement Gram matrices from outcome
frequencies by trace-minimization semidefinite completion."""

from .estimator import (
    GramEstimate,
    Metrics,
    TrialConfig,
    estimate,
    evaluate,
    factor,
    gauge_distance,
)
from .gram import (
    GramMatrix,
    Knowledge,
    Realization,
    gram,
    knowledge_projective,
    knowledge_relax,
    numerical_rank,
    r_qm,
    rank_certificate,
    realize,
)
from .hermitian import HermBasis, clip_spectrum, herm_basis, sym_eig, vectorize
from .solver import (
    SdpProblem,
    SolverOptions,
    SolverReport,
    project_knowledge,
    prox_trace_plus_knowledge,
    rank_conjugate,
    solve_trace_min,
)
from .synth import (
    DataTable,
    Ensemble,
    born_table,
    finite_shot_table,
    haar_unitary,
    sample_ensemble,
    sample_projective_measurement,
    sample_pure_state,
)

__version__ = "0.1.0"

__all__ = [
    "DataTable",
    "Ensemble",
    "GramEstimate",
    "GramMatrix",
    "HermBasis",
    "Knowledge",
    "Metrics",
    "Realization",
    "SdpProblem",
    "SolverOptions",
    "SolverReport",
    "TrialConfig",
    "born_table",
    "clip_spectrum",
    "estimate",
    "evaluate",
    "factor",
    "finite_shot_table",
    "gauge_distance",
    "gram",
    "haar_unitary",
    "herm_basis",
    "knowledge_projective",
    "knowledge_relax",
    "numerical_rank",
    "project_knowledge",
    "prox_trace_plus_knowledge",
    "r_qm",
    "rank_certificate",
    "rank_conjugate",
    "realize",
    "sample_ensemble",
    "sample_projective_measurement",
    "sample_pure_state",
    "solve_trace_min",
    "sym_eig",
    "vectorize",
]
