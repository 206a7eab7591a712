"""Spectra of non-Hermitian 1D tight-binding chains.

Build open or periodic chains with asymmetric nearest-neighbour hops and
on-site gain/loss, solve them, certify real spectra through a diagonal
gauge transform and inspect fidelity, chiral pairing and exceptional points.
"""

from .model import (
    Boundary,
    ComplexMatrix,
    InvalidModelError,
    LatticeModel,
    ModelFileError,
    Structure,
    ValidationResult,
    build_hamiltonian,
    hermiticity_check,
    load_model,
    model_from_matrix,
    save_model,
    validate,
)
from .symmetrize import GaugeCertificate, gauge_sequence, reality_certificate
from .spectral import (
    CharPolyValue,
    SolverError,
    SolverPath,
    Spectrum,
    char_poly,
    eigs,
    eigs_general,
    eigs_symmetric_tridiagonal,
    exact_constant_hopping,
)
from .analysis import (
    TRIANGLE_MATRIX,
    CurveCount,
    EPReport,
    FidelityMatrix,
    HermitianDemoCase,
    PairingReport,
    TrendPoint,
    clustering_trend,
    count_distinct_curves,
    density_curves,
    ep_diagnostics,
    f12_closed_form,
    fidelity,
    fidelity_matrix,
    hermitian_demo,
    pairing_check,
    pairwise_fidelity_extremes,
)

__version__ = "0.1.0"

__all__ = [
    "TRIANGLE_MATRIX",
    "Boundary",
    "CharPolyValue",
    "ComplexMatrix",
    "CurveCount",
    "EPReport",
    "FidelityMatrix",
    "GaugeCertificate",
    "HermitianDemoCase",
    "InvalidModelError",
    "LatticeModel",
    "ModelFileError",
    "PairingReport",
    "SolverError",
    "SolverPath",
    "Spectrum",
    "Structure",
    "TrendPoint",
    "ValidationResult",
    "build_hamiltonian",
    "char_poly",
    "clustering_trend",
    "count_distinct_curves",
    "density_curves",
    "eigs",
    "eigs_general",
    "eigs_symmetric_tridiagonal",
    "ep_diagnostics",
    "exact_constant_hopping",
    "f12_closed_form",
    "fidelity",
    "fidelity_matrix",
    "gauge_sequence",
    "hermiticity_check",
    "hermitian_demo",
    "load_model",
    "model_from_matrix",
    "pairing_check",
    "pairwise_fidelity_extremes",
    "reality_certificate",
    "save_model",
    "validate",
]
