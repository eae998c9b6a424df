"""Spectrum, spectral radius, companion form, Hausdorff distance and the
determinant-perturbation certificates behind spectral Hoelder continuity."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    MatrixPolynomial,
    as_point,
    evaluate_coeffs,
    evaluate_coeffs_batch,
    horner_matrix_batch,
    leading_is_singular,
)
from .linalg import lu_det, spectral_norm
from .scalar_poly import (
    aberth_roots_batch,
    cluster_roots_adaptive,
    interpolate_monic,
    interpolation_nodes,
)

__all__ = [
    "NotAnEigenvalueError",
    "PerturbationCertificate",
    "SingularLeadingCoefficientError",
    "SpectrumSet",
    "companion_matrix",
    "det_poly_coeffs",
    "directed_hausdorff",
    "family_roots",
    "hausdorff",
    "roots_batch",
    "spectral_radius",
    "spectrum",
    "spectrum_at",
    "verify_spectrum_perturbation",
]


class SingularLeadingCoefficientError(ArithmeticError):
    pass


class NotAnEigenvalueError(ValueError):
    pass


@dataclass(frozen=True)
class SpectrumSet:
    """Distinct eigenvalues with multiplicities, plus the raw root multiset."""

    eigenvalues: tuple  # ((value, multiplicity), ...)
    roots: np.ndarray

    @property
    def total(self):
        return sum(m for _, m in self.eigenvalues)

    @property
    def values(self):
        return np.array([v for v, _ in self.eigenvalues], dtype=complex)

    @property
    def multiplicities(self):
        return np.array([m for _, m in self.eigenvalues], dtype=int)

    def __len__(self):
        return len(self.eigenvalues)


def _coeff_stack(P):
    if isinstance(P, MatrixPolynomial):
        return P.coeffs, P.monic
    C = np.asarray(P, dtype=complex)
    return C, False


def det_poly_coeffs(C, monic=False, rho=None):
    """Coefficients of det P(lam) for stacked coefficients (B, d+1, n, n).

    Samples det P on dn+1 scaled roots of unity (radius ``rho``, by default
    1 + max_k ||A_k||_F) and inverts the DFT. Returns (B, dn+1), ascending
    powers.
    """
    C = np.asarray(C, dtype=complex)
    B, d1, n, _ = C.shape
    d = d1 - 1
    if n == 1:
        return C[:, :, 0, 0].copy()
    D = d * n
    if rho is None:
        rho = 1.0 + np.max(np.linalg.norm(C, axis=(2, 3)), axis=1)
    rho = np.broadcast_to(np.asarray(rho, dtype=float), (B,))
    z = rho[:, None] * interpolation_nodes(D, 1.0)[None, :]
    vals = lu_det(horner_matrix_batch(C[:, None], z))
    lead = np.ones(B, dtype=complex) if monic else lu_det(C[:, d])
    return interpolate_monic(vals, D, rho, expected_lead=lead)


def _spread(init):
    # coincident starting values stall Aberth; separate them slightly
    init = np.asarray(init, dtype=complex)
    D = init.shape[-1]
    offs = np.exp(2j * np.pi * (np.arange(D) + 0.37) / max(D, 1))
    return init + 1e-7 * (1.0 + np.abs(init)) * offs


def roots_batch(C, monic=False, init=None, tol=1e-12, max_iter=200, strict=True, refine=False):
    """All dn eigenvalues (with repetition) for each coefficient stack in C.

    ``init`` warm-starts Aberth from nearby roots (e.g. at a neighbouring
    parameter). With ``strict=False`` unconverged batches return their last
    iterate instead of raising. ``refine`` re-interpolates det P on a circle
    just outside the computed roots and polishes them; this matters when
    the coefficient norms far exceed the spectral radius (strongly
    non-normal matrices).
    """
    C = np.asarray(C, dtype=complex)
    coeffs = det_poly_coeffs(C, monic=monic)
    if init is not None and coeffs.shape[1] > 2:
        init = _spread(init)
    z, _, _ = aberth_roots_batch(coeffs, tol=tol, max_iter=max_iter, init=init,
                                 raise_on_failure=strict and not refine)
    if refine and C.shape[2] > 1:
        for _ in range(2):
            rho = np.maximum(0.5, 1.1 * np.max(np.abs(z), axis=1))
            coeffs = det_poly_coeffs(C, monic=monic, rho=rho)
            z, _, _ = aberth_roots_batch(coeffs, tol=tol, max_iter=max_iter, init=_spread(z),
                                         raise_on_failure=strict)
    return z


def family_roots(f, U, init=None, strict=True):
    """Eigenvalue multisets of P_v for each parameter row of U, shape (B, dn)."""
    return roots_batch(evaluate_coeffs_batch(f, U), monic=f.monic, init=init, strict=strict)


def spectrum(P, noise=1e-12, cluster_tol=None):
    """sigma(P) from the roots of det P(lam), clustered by multiplicity."""
    C, monic = _coeff_stack(P)
    if not monic and leading_is_singular(C[-1]):
        raise SingularLeadingCoefficientError("leading coefficient is numerically singular")
    roots = roots_batch(C[None], monic=monic, refine=True)[0]
    groups = cluster_roots_adaptive(roots, noise=noise, cluster_tol=cluster_tol)
    return SpectrumSet(tuple(groups), roots)


def spectrum_at(f, u, **kw):
    return spectrum(evaluate_coeffs(f, u), **kw)


def spectral_radius(s):
    vals = s.values if isinstance(s, SpectrumSet) else np.asarray(s, dtype=complex)
    if vals.size == 0:
        raise ValueError("empty spectrum")
    return float(np.max(np.abs(vals)))


def companion_matrix(P):
    """Block companion matrix: identity superdiagonal, bottom row -A_0..-A_{d-1}.

    A nonsingular (non-identity) leading coefficient is first divided out.
    """
    C, monic = _coeff_stack(P)
    d = C.shape[0] - 1
    n = C.shape[1]
    lead = C[d]
    if not monic and not np.array_equal(lead, np.eye(n)):
        if leading_is_singular(lead):
            raise SingularLeadingCoefficientError("leading coefficient is numerically singular")
        C = np.linalg.solve(lead[None], C)
    N = d * n
    comp = np.zeros((N, N), dtype=complex)
    for k in range(d - 1):
        comp[k * n:(k + 1) * n, (k + 1) * n:(k + 2) * n] = np.eye(n)
    for k in range(d):
        comp[(d - 1) * n:, k * n:(k + 1) * n] = -C[k]
    return comp


def _as_points(A):
    if isinstance(A, SpectrumSet):
        return A.values
    return np.asarray(A, dtype=complex).ravel()


def directed_hausdorff(A, B):
    """sup_{a in A} dist(a, B) for finite complex point sets."""
    A = _as_points(A)
    B = _as_points(B)
    if A.size == 0 or B.size == 0:
        raise ValueError("Hausdorff distance needs nonempty sets")
    best = np.full(A.size, np.inf)
    # chunk to bound memory for large clouds
    step = max(1, 4_000_000 // max(B.size, 1))
    for s in range(0, A.size, step):
        best[s:s + step] = np.min(np.abs(A[s:s + step, None] - B[None, :]), axis=1)
    return float(np.max(best))


def hausdorff(A, B):
    return max(directed_hausdorff(A, B), directed_hausdorff(B, A))


@dataclass(frozen=True)
class PerturbationCertificate:
    u: np.ndarray
    u_prime: np.ndarray
    lam: complex
    dist_pow: float
    det_val: float
    det_bound: float

    @property
    def holds(self):
        return (
            self.dist_pow <= self.det_val * (1 + 1e-8) + 1e-12,
            self.det_val <= self.det_bound * (1 + 1e-8) + 1e-12,
        )


def verify_spectrum_perturbation(f, u, u_prime, lam, sigma_u=None, roots_u_prime=None):
    """Evaluate both inequalities bounding dist(lam, sigma(u'))^{dn}.

    dist(lam, sigma(u'))^{dn} <= |det P_{u'}(lam)|
        <= n max(||P_u(lam)||, ||P_{u'}(lam)||)^{n-1} ||P_u(lam) - P_{u'}(lam)||
    with spectral norms. ``lam`` must be an eigenvalue of P_u.
    """
    u = as_point(f, u)
    up = as_point(f, u_prime)
    if sigma_u is None:
        sigma_u = spectrum_at(f, u)
    lam = complex(lam)
    tol = 1e-6 * (1.0 + abs(lam))
    if np.min(np.abs(sigma_u.roots - lam)) > tol and np.min(np.abs(sigma_u.values - lam)) > tol:
        raise NotAnEigenvalueError(f"{lam} is not an eigenvalue of P_u")
    Cu = evaluate_coeffs_batch(f, np.stack([u, up]))
    if roots_u_prime is None:
        roots_u_prime = roots_batch(Cu[1:], monic=f.monic, refine=True)[0]
    Pu = horner_matrix_batch(Cu[0], lam)
    Pv = horner_matrix_batch(Cu[1], lam)
    dn = f.d * f.n
    dist = float(np.min(np.abs(roots_u_prime - lam)))
    det_val = float(abs(lu_det(Pv)))
    bound = f.n * max(spectral_norm(Pu), spectral_norm(Pv)) ** (f.n - 1) * spectral_norm(Pu - Pv)
    return PerturbationCertificate(u, up, lam, dist ** dn, det_val, float(bound))
