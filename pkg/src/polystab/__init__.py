"""Spectra, structured pseudospectra, numerical ranges and Jordan structure
of parameter-dependent matrix polynomials, with empirical Hoelder checks."""
from .core import Family, MatrixPolynomial, evaluate_at, evaluate_coeffs, family_from_arrays, load_family, parse_family
from .jordan import jordan_pair, matrix_signature, stratify
from .pseudospectral import PseudoQuery, eigenvalue_cloud, pseudo_membership, pseudospectrum_grid
from .ranges import jw_sample, numrange_grid, numrange_membership, reconstruct_w_from_jw
from .regularity import fit_holder, genericity_probe, sample_scale_pairs
from .spectral import companion_matrix, hausdorff, spectral_radius, spectrum, spectrum_at, verify_spectrum_perturbation

__version__ = "0.1.0"

__all__ = [
    "Family",
    "MatrixPolynomial",
    "PseudoQuery",
    "companion_matrix",
    "eigenvalue_cloud",
    "evaluate_at",
    "evaluate_coeffs",
    "family_from_arrays",
    "fit_holder",
    "genericity_probe",
    "hausdorff",
    "jordan_pair",
    "jw_sample",
    "load_family",
    "matrix_signature",
    "numrange_grid",
    "numrange_membership",
    "parse_family",
    "pseudo_membership",
    "pseudospectrum_grid",
    "reconstruct_w_from_jw",
    "sample_scale_pairs",
    "spectral_radius",
    "spectrum",
    "spectrum_at",
    "stratify",
    "verify_spectrum_perturbation",
]
