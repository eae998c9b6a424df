"""Numerical range W(u), its grids, and the joint numerical range JW(u).

W(u) = {lam : x* P_u(lam) x = 0 for some unit x}; lam is in W(u) exactly
when 0 lies in the classical field of values F(P_u(lam)). F is convex, so
0 is outside F(M) iff some rotation e^{i theta} M has a positive definite
Hermitian part.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_point, evaluate_coeffs, evaluate_coeffs_batch, horner_matrix_batch
from .grids import GridSpec, label_components, marching_squares
from .linalg import hermitian_eigvals, spectral_norm
from .pseudospectral import IndicatorGrid
from .rng import stream, unit_sphere_complex
from .scalar_poly import aberth_roots_batch
from .spectral import spectrum

__all__ = [
    "DegenerateLeadingCoefficientError",
    "FovQuery",
    "JWCloud",
    "NumRangeQuery",
    "fov_contains_zero",
    "fov_distance",
    "jw_points",
    "jw_sample",
    "numrange_grid",
    "numrange_membership",
    "reconstruct_w_from_jw",
    "fov_signed_distance",
    "w_boundary",
    "w_bound",
]

REFINE_STEPS = 30


class DegenerateLeadingCoefficientError(ValueError):
    pass


@dataclass(frozen=True)
class FovQuery:
    matrix: np.ndarray
    angle_count: int = 64

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("field of values needs a square matrix")
        if self.angle_count < 8:
            raise ValueError("angle_count must be >= 8")
        object.__setattr__(self, "matrix", M)


@dataclass(frozen=True)
class NumRangeQuery:
    u: np.ndarray
    region: tuple
    resolution: tuple

    @property
    def grid(self):
        return GridSpec(self.region, self.resolution)


@dataclass(frozen=True)
class JWCloud:
    points: np.ndarray  # (N, d+1)
    sphere_samples: int
    seed: int
    vectors: np.ndarray  # (N, n) unit vectors generating the points


def _min_eig_hermitian_part(M):
    """lambda_min of (M + M*)/2 for a stack (..., n, n)."""
    n = M.shape[-1]
    if n == 1:
        return M[..., 0, 0].real
    if n == 2:
        a = M[..., 0, 0].real
        c = M[..., 1, 1].real
        b = 0.5 * (M[..., 0, 1] + np.conj(M[..., 1, 0]))
        return 0.5 * (a + c) - np.sqrt(0.25 * (a - c) ** 2 + np.abs(b) ** 2)
    H = 0.5 * (M + np.conj(np.swapaxes(M, -1, -2)))
    return hermitian_eigvals(H, check=False)[..., 0]


def _support(M, theta):
    # lambda_min(H(e^{i theta} M)) = min over F(M) of Re(e^{i theta} z)
    rot = np.exp(1j * theta)[..., None, None]
    return _min_eig_hermitian_part(rot * M[..., None, :, :])


def fov_signed_distance(M, angle_count=64):
    """max over theta of lambda_min(H(e^{i theta} M)).

    For convex F(M) this is the signed distance from 0 to F(M): positive
    outside, minus the distance to the boundary inside. A coarse sweep of
    ``angle_count`` angles is followed by ternary refinement around the best
    one. Works on stacks (..., n, n).
    """
    M = np.asarray(M, dtype=complex)
    batch = M.shape[:-2]
    M = M.reshape((-1,) + M.shape[-2:])
    theta = 2 * np.pi * np.arange(angle_count) / angle_count
    vals = _support(M, theta[None, :].repeat(M.shape[0], 0))
    k = np.argmax(vals, axis=1)
    best = vals[np.arange(M.shape[0]), k]
    half = 2 * np.pi / angle_count
    lo = theta[k] - half
    hi = theta[k] + half
    for _ in range(REFINE_STEPS):
        a = lo + (hi - lo) / 3.0
        b = hi - (hi - lo) / 3.0
        fa = _support(M, a[:, None])[:, 0]
        fb = _support(M, b[:, None])[:, 0]
        best = np.maximum(best, np.maximum(fa, fb))
        left = fa < fb
        lo = np.where(left, a, lo)
        hi = np.where(left, hi, b)
    out = best.reshape(batch)
    return out[()] if out.ndim == 0 else out


def fov_distance(M, angle_count=64):
    """dist(0, F(M)), zero when 0 lies in the field of values."""
    return np.maximum(fov_signed_distance(M, angle_count), 0.0)


def _margin(M):
    return 1e-10 * np.maximum(1.0, np.linalg.norm(M, axis=(-2, -1)))


def fov_contains_zero(q):
    """True iff 0 is in the field of values, up to a 1e-10 relative margin."""
    if not isinstance(q, FovQuery):
        q = FovQuery(q)
    return bool(fov_distance(q.matrix, q.angle_count) <= _margin(q.matrix))


def _check_leading(f, coeffs):
    if f.monic:
        return
    if fov_contains_zero(coeffs[f.d]):
        raise DegenerateLeadingCoefficientError(
            "0 lies in the field of values of the leading coefficient; W(u) may be unbounded"
        )


def numrange_membership(f, u, lam):
    P = evaluate_coeffs(f, u)
    _check_leading(f, P.coeffs)
    M = horner_matrix_batch(P.coeffs, complex(lam))
    return fov_contains_zero(M)


def _lipschitz(coeffs, absz):
    # bound on ||P'(z)|| for |z| <= absz
    norms = np.array([spectral_norm(A) for A in coeffs])
    k = np.arange(coeffs.shape[0])
    return np.sum((k[1:] * norms[1:])[None, :] * absz[:, None] ** (k[1:] - 1)[None, :], axis=1)


def _cells_meet_w(coeffs, centres, half_re, half_im, depth):
    """Decide whether each rectangle meets W by Lipschitz exclusion.

    A rectangle is out when dist(0, F(P(c))) exceeds the largest possible
    change of P over it; undecided rectangles are split 3x3, and those
    still undecided after ``depth`` splits count as members.
    """
    result = np.zeros(centres.size, dtype=bool)
    pts = centres.copy()
    owner = np.arange(centres.size)
    hr, hi = half_re, half_im
    for level in range(depth + 1):
        if pts.size == 0:
            break
        M = horner_matrix_batch(coeffs, pts)
        dist = fov_distance(M)
        inside = dist <= _margin(M)
        r = np.hypot(hr, hi)
        reach = _lipschitz(coeffs, np.abs(pts) + r) * r
        maybe = (~inside) & (dist <= reach)
        result[owner[inside]] = True
        if level == depth:
            result[owner[maybe]] = True
            break
        keep = maybe & ~result[owner]
        pts, owner = pts[keep], owner[keep]
        hr, hi = hr / 3.0, hi / 3.0
        offs = np.array([a * 2 * hr + 1j * b * 2 * hi for a in (-1, 0, 1) for b in (-1, 0, 1)])
        pts = (pts[:, None] + offs[None, :]).ravel()
        owner = np.repeat(owner, offs.size)
        # skip rectangles whose owner was already decided
        live = ~result[owner]
        pts, owner = pts[live], owner[live]
    return result


def numrange_grid(f, u, region, resolution, depth=2):
    """Indicator grid of W(u).

    ``member`` marks cells (rectangles of half-widths h/2 around nodes) that
    meet W, decided by the Lipschitz exclusion test with ``depth`` levels of
    3x3 subdivision, so thin sets such as segments are not missed.
    ``center_member`` marks nodes inside W and ``values`` holds the signed
    distance from 0 to F(P_u(node)) (negative inside W).
    """
    u = as_point(f, u)
    P = evaluate_coeffs(f, u)
    _check_leading(f, P.coeffs)
    q = NumRangeQuery(u, tuple(region), tuple(resolution))
    spec = q.grid
    nodes = spec.nodes()
    M = horner_matrix_batch(P.coeffs, nodes.ravel())
    dist = fov_signed_distance(M)
    center_member = (dist <= _margin(M)).reshape(nodes.shape)
    hr, hi = spec.steps
    member = _cells_meet_w(P.coeffs, nodes.ravel(), hr / 2.0, hi / 2.0, depth).reshape(nodes.shape)
    labels, count = label_components(member)
    sigma = spectrum(P).values
    checks = {}
    bound = 1.0 + max(spectral_norm(A) for A in P.coeffs)
    re0, re1, im0, im1 = spec.region
    if f.monic and re0 <= -bound and re1 >= bound and im0 <= -bound and im1 >= bound:
        checks["component_bound"] = count <= f.d
    return IndicatorGrid(
        query=q, spec=spec, member=member, values=dist.reshape(nodes.shape),
        boundary=marching_squares(member, spec), components=count, labels=labels,
        center_member=center_member, spectrum=sigma, family=f, checks=checks,
    )


def w_boundary(f, u, region, resolution):
    """Sub-cell boundary of the interior of W(u) as polylines.

    Contours the signed field of :func:`fov_signed_distance` at level 0
    with linear interpolation along grid edges. Sets without interior (such
    as segments or finite point sets) give an empty list.
    """
    u = as_point(f, u)
    P = evaluate_coeffs(f, u)
    _check_leading(f, P.coeffs)
    spec = GridSpec(region, resolution)
    nodes = spec.nodes()
    M = horner_matrix_batch(P.coeffs, nodes.ravel())
    vals = fov_signed_distance(M).reshape(nodes.shape)
    inside = vals < -_margin(M).reshape(nodes.shape)
    if not np.any(inside):
        return []
    return marching_squares(inside, spec, vals, 0.0)


def w_bound(f, u):
    """Radius of the disk |lam| <= 1 + max_k ||A_k(u)||_2 holding W(u) for monic families."""
    coeffs = evaluate_coeffs_batch(f, as_point(f, u)[None, :])[0]
    return 1.0 + max(spectral_norm(A) for A in coeffs)


def jw_points(coeffs, x):
    """(x* A_0 x, ..., x* A_d x) for unit rows x, shape (N, d+1)."""
    return np.einsum("si,kij,sj->sk", np.conj(x), coeffs, x)


def jw_sample(f, u, n_samples, seed=0):
    """Sampled JW(u): the n basis vectors plus ``n_samples`` uniform unit vectors."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    u = as_point(f, u)
    coeffs = evaluate_coeffs_batch(f, u[None, :])[0]
    x = np.concatenate([
        np.eye(f.n, dtype=complex),
        unit_sphere_complex(stream(seed, "jw"), n_samples, f.n),
    ])
    pts = jw_points(coeffs, x)
    if f.monic:
        # x* I x = 1 exactly for unit x; remove normalization roundoff
        pts[:, -1] = 1.0
    return JWCloud(pts, n_samples, seed, x)


def reconstruct_w_from_jw(c, rtol=1e-12):
    """Union of roots of a_d lam^d + ... + a_0 over the cloud points."""
    pts = np.asarray(c.points if isinstance(c, JWCloud) else c, dtype=complex)
    scale = np.max(np.abs(pts), axis=1)
    if np.any(np.abs(pts[:, -1]) <= rtol * np.maximum(scale, 1.0)):
        raise DegenerateLeadingCoefficientError("a JW point has vanishing leading coordinate")
    if pts.shape[1] == 1:
        raise ValueError("constant polynomials have no roots")
    z, _, _ = aberth_roots_batch(pts, raise_on_failure=False)
    return z.ravel()
