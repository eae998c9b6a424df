"""Dense complex kernels: LU determinant, Jacobi eigen/SVD, numerical rank.

Everything here works on numpy arrays; ``lu_det`` and ``hermitian_eig``
accept stacked matrices (..., n, n) so grid code can batch them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NotHermitianError",
    "RankReport",
    "hermitian_eig",
    "hermitian_eigvals",
    "jacobi_svd",
    "lu_det",
    "null_space",
    "orth",
    "spectral_norm",
    "svd_rank",
]


class NotHermitianError(ValueError):
    pass


def lu_det(A):
    """Determinant by partial-pivot LU, batched over leading axes."""
    A = np.array(A, dtype=complex, copy=True)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ValueError("lu_det needs square matrices")
    n = A.shape[-1]
    batch = A.shape[:-2]
    A = A.reshape((-1, n, n))
    det = np.ones(A.shape[0], dtype=complex)
    rows = np.arange(A.shape[0])
    for k in range(n):
        piv = k + np.argmax(np.abs(A[:, k:, k]), axis=1)
        swap = piv != k
        if swap.any():
            r = rows[swap]
            tmp = A[r, k, :].copy()
            A[r, k, :] = A[r, piv[swap], :]
            A[r, piv[swap], :] = tmp
            det[swap] = -det[swap]
        pivot = A[:, k, k]
        det *= pivot
        if k + 1 < n:
            safe = np.where(pivot == 0, 1.0, pivot)
            factors = A[:, k + 1:, k] / safe[:, None]
            factors[pivot == 0] = 0.0
            A[:, k + 1:, k:] -= factors[:, :, None] * A[:, None, k, k:]
    det = det.reshape(batch)
    return det[()] if det.ndim == 0 else det


def _jacobi_rotation(a_pp, a_qq, a_pq):
    """(c, s, phase) annihilating a_pq of a Hermitian 2x2 block.

    The rotation G has columns p' = c*p - s*conj(phase)*q and
    q' = s*p + c*conj(phase)*q.
    """
    mag = np.abs(a_pq)
    live = mag > 0
    safe = np.where(live, mag, 1.0)
    phase = np.where(live, a_pq / safe, 1.0)
    tau = (a_qq - a_pp) / (2.0 * safe)
    sgn = np.where(tau >= 0, 1.0, -1.0)
    t = sgn / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
    t = np.where(live, t, 0.0)
    c = 1.0 / np.sqrt(1.0 + t * t)
    return c, t * c, phase


def hermitian_eig(A, tol=1e-12, max_sweeps=60, check=True):
    """Cyclic complex Jacobi: eigenvalues ascending and unitary eigenvectors.

    Works on a single matrix or a stack (..., n, n).
    """
    A = np.array(A, dtype=complex, copy=True)
    n = A.shape[-1]
    batch = A.shape[:-2]
    A = A.reshape((-1, n, n))
    fro = np.linalg.norm(A, axis=(1, 2))
    if check:
        skew = np.linalg.norm(A - np.conj(np.swapaxes(A, 1, 2)), axis=(1, 2))
        if np.any(skew > 1e-10 * (1.0 + fro)):
            raise NotHermitianError("matrix is not Hermitian")
    A = 0.5 * (A + np.conj(np.swapaxes(A, 1, 2)))
    V = np.broadcast_to(np.eye(n, dtype=complex), A.shape).copy()
    iu = np.triu_indices(n, 1)
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(np.abs(A[:, iu[0], iu[1]]) ** 2, axis=1))
        if np.all(off <= tol * fro):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                c, s, e = _jacobi_rotation(A[:, p, p].real, A[:, q, q].real, A[:, p, q])
                c = c[:, None]
                s = s[:, None]
                ec = np.conj(e)[:, None]
                e = e[:, None]
                # columns
                cp, cq = A[:, :, p].copy(), A[:, :, q]
                A[:, :, p] = c * cp - s * ec * cq
                A[:, :, q] = s * cp + c * ec * cq
                vp, vq = V[:, :, p].copy(), V[:, :, q]
                V[:, :, p] = c * vp - s * ec * vq
                V[:, :, q] = s * vp + c * ec * vq
                # rows
                rp, rq = A[:, p, :].copy(), A[:, q, :]
                A[:, p, :] = c * rp - s * e * rq
                A[:, q, :] = s * rp + c * e * rq
    w = np.real(np.diagonal(A, axis1=1, axis2=2))
    order = np.argsort(w, axis=1)
    w = np.take_along_axis(w, order, axis=1)
    V = np.take_along_axis(V, order[:, None, :], axis=2)
    w = w.reshape(batch + (n,))
    V = V.reshape(batch + (n, n))
    return w, V


def hermitian_eigvals(A, **kw):
    return hermitian_eig(A, **kw)[0]


def jacobi_svd(A, tol=1e-15, max_sweeps=80):
    """One-sided (Hestenes) Jacobi SVD.

    Returns ``U, s, V`` with ``A @ V = U * s``, ``s`` nonincreasing and ``V``
    unitary (N x N). Columns of U belonging to zero singular values are zero.
    """
    A = np.array(A, dtype=complex, copy=True)
    if A.ndim != 2:
        raise ValueError("jacobi_svd needs a 2-D matrix")
    M, N = A.shape
    U = A
    V = np.eye(N, dtype=complex)
    # columns below this squared norm are treated as exact zeros
    floor = (1e-18 * np.linalg.norm(A)) ** 2
    for _ in range(max_sweeps):
        rotated = False
        for p in range(N - 1):
            for q in range(p + 1, N):
                up, uq = U[:, p], U[:, q]
                alpha = np.vdot(up, up).real
                beta = np.vdot(uq, uq).real
                gamma = np.vdot(up, uq)
                if min(alpha, beta) <= floor or abs(gamma) <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                c, s, e = _jacobi_rotation(alpha, beta, gamma)
                ec = np.conj(e)
                up = up.copy()
                U[:, p] = c * up - s * ec * uq
                U[:, q] = s * up + c * ec * uq
                vp = V[:, p].copy()
                V[:, p] = c * vp - s * ec * V[:, q]
                V[:, q] = s * vp + c * ec * V[:, q]
        if not rotated:
            break
    s = np.linalg.norm(U, axis=0)
    order = np.argsort(-s, kind="stable")
    s = s[order]
    U = U[:, order]
    V = V[:, order]
    nz = s > 0
    U[:, nz] = U[:, nz] / s[nz]
    U[:, ~nz] = 0.0
    return U, s, V


@dataclass(frozen=True)
class RankReport:
    singular_values: np.ndarray
    rank: int
    tol_used: float

    @property
    def norm2(self):
        return float(self.singular_values[0]) if self.singular_values.size else 0.0

    def gap(self):
        """sigma_rank / sigma_{rank+1} (inf when one side is empty or exactly zero)."""
        sv = self.singular_values
        r = self.rank
        if r == 0 or r >= sv.size:
            return np.inf
        return np.inf if sv[r] == 0 else float(sv[r - 1] / sv[r])


def svd_rank(A, tol="auto"):
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return RankReport(np.zeros(0), 0, 0.0)
    _, s, _ = jacobi_svd(A)
    # a wide matrix has only min(M, N) meaningful singular values
    s = s[: min(A.shape)]
    smax = float(s[0]) if s.size else 0.0
    if tol == "auto":
        tol = max(A.shape) * smax * 1e-10
    rank = int(np.sum(s > tol))
    return RankReport(s, rank, float(tol))


def spectral_norm(A):
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return 0.0
    return float(jacobi_svd(A)[1][0])


def orth(A, rank):
    """Orthonormal basis (columns) of the dominant ``rank``-dim column space."""
    U, s, _ = jacobi_svd(A)
    return U[:, :rank]


def null_space(A, rank):
    """Orthonormal basis of the right null space given the numerical rank."""
    _, _, V = jacobi_svd(A)
    return V[:, rank:]
