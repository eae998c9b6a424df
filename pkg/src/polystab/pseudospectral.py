"""Structured eps-pseudospectra: membership, indicator grids, eigenvalue clouds.

Lambda_eps(u) is the union of sigma(v) over parameters v in the closed
Euclidean ball B(u, eps). All ball minimizations use the same multi-start
pattern search: starts at u, the 2m axis points on the sphere and eight
seeded interior points; polls along +-e_k, projected back onto the ball.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .core import as_point, evaluate_coeffs_batch, horner_matrix_batch
from .grids import GridSpec, label_components, marching_squares, touches_border
from .linalg import lu_det
from .rng import stream, unit_ball
from .spectral import family_roots, spectrum_at

__all__ = [
    "AsymmetryError",
    "IndicatorGrid",
    "MembershipResult",
    "PseudoQuery",
    "Witness",
    "check_axis_symmetry",
    "default_tol",
    "eigenvalue_cloud",
    "pseudo_membership",
    "pseudospectrum_grid",
    "search_starts",
]

N_RANDOM_STARTS = 8
GRID_POOL = 400
GRID_STARTS = 3


class AsymmetryError(ValueError):
    """Symmetry check requested on an unsuitable grid or family."""


@dataclass(frozen=True)
class PseudoQuery:
    u: np.ndarray
    eps: float
    region: tuple
    resolution: tuple

    def __post_init__(self):
        if not self.eps >= 0:
            raise ValueError("eps must be >= 0")
        object.__setattr__(self, "u", np.atleast_1d(np.asarray(self.u, dtype=float)))
        object.__setattr__(self, "eps", float(self.eps))
        spec = GridSpec(self.region, self.resolution)
        object.__setattr__(self, "region", spec.region)
        object.__setattr__(self, "resolution", spec.resolution)

    @property
    def grid(self):
        return GridSpec(self.region, self.resolution)


@dataclass(frozen=True)
class Witness:
    v: np.ndarray
    residual: float


class MembershipResult(NamedTuple):
    member: bool
    witness: Optional[Witness]
    best_residual: float


@dataclass(frozen=True, eq=False)
class IndicatorGrid:
    """Boolean node field with derived boundary and component data.

    ``member[j, i]`` says the cell around node (re[i], im[j]) meets the set;
    ``center_member`` says the node itself lies in it (up to tolerance).
    ``values`` holds the per-node margin, nonpositive-ish for members
    (meaning depends on the producing routine).
    """

    query: object
    spec: GridSpec
    member: np.ndarray
    values: np.ndarray
    boundary: list
    components: int
    labels: np.ndarray = field(repr=False)
    center_member: Optional[np.ndarray] = field(default=None, repr=False)
    spectrum: Optional[np.ndarray] = field(default=None, repr=False)
    family: object = field(default=None, repr=False)
    checks: dict = field(default_factory=dict, repr=False)

    @property
    def member_count(self):
        return int(self.member.sum())

    def member_points(self):
        return self.spec.nodes()[self.member]


def default_tol(f, lam):
    """1e-8 * (1 + rho^{dn}) with rho = 1 + |lam|."""
    rho = 1.0 + np.abs(lam)
    return 1e-8 * (1.0 + rho ** (f.d * f.n))


def search_starts(u, eps, seed=0):
    """u, the 2m sphere axis points, then eight seeded interior points."""
    m = u.size
    if eps == 0:
        return u[None, :].copy()
    axis = np.concatenate([np.eye(m), -np.eye(m)]) * eps + u
    rnd = u + eps * unit_ball(stream(seed, "pseudo-starts"), N_RANDOM_STARTS, m)
    return np.concatenate([u[None, :], axis, rnd])


def _project(V, u, eps):
    diff = V - u
    norm = np.linalg.norm(diff, axis=-1, keepdims=True)
    scale = np.where(norm > eps, eps / np.where(norm > 0, norm, 1.0), 1.0)
    return u + diff * scale


def _ball_search(objective, u, eps, n_targets, target, starts, aux0,
                 min_step_rel=1e-12, max_iter=400):
    """Vectorized multi-start pattern search over B(u, eps).

    ``objective(V, tidx, aux) -> (values, aux)`` scores parameter rows V for
    target indices ``tidx``; ``aux`` carries warm-start data (e.g. roots).
    Returns best values, best points and the per-target solved mask.
    """
    m = u.size
    if starts.ndim == 3:
        # per-target starts (n_targets, S, m), aux (n_targets, S, ...)
        S = starts.shape[1]
        V = starts.reshape(-1, m).copy()
        aux = None if aux0 is None else aux0.reshape((n_targets * S,) + aux0.shape[2:]).copy()
    else:
        S = starts.shape[0]
        V = np.tile(starts, (n_targets, 1))
        aux = None if aux0 is None else np.tile(aux0, (n_targets, 1))
    tidx = np.repeat(np.arange(n_targets), S)
    val, aux = objective(V, tidx, aux)
    step = np.full(V.shape[0], eps / 2.0)
    min_step = max(eps, 1e-300) * min_step_rel
    dirs = np.concatenate([np.eye(m), -np.eye(m)])

    solved = np.zeros(n_targets, dtype=bool)
    np.logical_or.at(solved, tidx, val <= target[tidx])
    alive = step >= min_step
    if eps > 0:
        for _ in range(max_iter):
            act = np.nonzero(alive & ~solved[tidx])[0]
            if act.size == 0:
                break
            P = V[act, None, :] + step[act, None, None] * dirs[None]
            P = _project(P, u, eps).reshape(-1, m)
            t_rep = np.repeat(tidx[act], 2 * m)
            a_rep = None if aux is None else np.repeat(aux[act], 2 * m, axis=0)
            pv, pa = objective(P, t_rep, a_rep)
            pv = pv.reshape(act.size, 2 * m)
            k = np.argmin(pv, axis=1)
            best = pv[np.arange(act.size), k]
            better = best < val[act]
            mv = act[better]
            rows = np.arange(act.size)[better] * 2 * m + k[better]
            V[mv] = P[rows]
            val[mv] = best[better]
            if aux is not None:
                aux[mv] = pa[rows]
            step[mv] = np.minimum(step[mv] * 2.0, eps)
            step[act[~better]] *= 0.5
            alive[act] = step[act] >= min_step
            np.logical_or.at(solved, tidx[act], val[act] <= target[tidx[act]])

    best_val = np.full(n_targets, np.inf)
    np.minimum.at(best_val, tidx, val)
    # first start attaining the minimum for each target
    order = np.lexsort((np.arange(tidx.size), val, tidx))
    first = order[np.r_[True, tidx[order][1:] != tidx[order][:-1]]]
    return best_val, V[first], solved


def _det_objective(f, lam):
    def objective(V, tidx, aux):
        C = evaluate_coeffs_batch(f, V)
        return np.abs(lu_det(horner_matrix_batch(C, lam[tidx]))), None
    return objective


def pseudo_membership(f, u, eps, lam, tol=None, seed=0):
    """Decide lam in Lambda_eps(u) by minimizing |det P_v(lam)| over the ball.

    Membership holds when the minimum found is <= tol (default
    :func:`default_tol`). Returns (member, witness, best_residual); the
    witness is the minimizing v, present only on success.
    """
    u = as_point(f, u)
    if eps < 0:
        raise ValueError("eps must be >= 0")
    lam_arr = np.array([complex(lam)])
    if tol is None:
        tol = default_tol(f, lam_arr[0])
    starts = search_starts(u, float(eps), seed)
    best, V, _ = _ball_search(_det_objective(f, lam_arr), u, float(eps), 1,
                              np.array([float(tol)]), starts, None)
    v = V[0]
    res = float(best[0])
    if res <= tol:
        return MembershipResult(True, Witness(v, res), res)
    return MembershipResult(False, None, res)


def _cell_objective(f, nodes, half_re, half_im):
    """min over roots of the Chebyshev distance to the node, in half-cell units."""
    def objective(V, tidx, aux):
        roots = family_roots(f, V, init=aux, strict=False)
        diff = roots - nodes[tidx, None]
        g = np.maximum(np.abs(diff.real) / half_re, np.abs(diff.imag) / half_im)
        return np.min(g, axis=1), roots
    return objective


def _cell_starts(f, u, eps, nodes, half_re, half_im, seed, pool=GRID_POOL, keep=GRID_STARTS):
    """Per-node starts: the ``keep`` pool points whose spectra come closest.

    The pool is the standard start set plus seeded ball samples, so every
    node still sees u whenever u is among its best candidates.
    """
    base = search_starts(u, eps, seed)
    if eps > 0:
        extra = u + eps * unit_ball(stream(seed, "grid-pool"), pool, u.size)
        base = np.concatenate([base, extra])
    roots = family_roots(f, base)
    keep = min(keep, base.shape[0])
    best = np.empty((nodes.size, keep), dtype=int)
    chunk = max(1, 2_000_000 // (base.shape[0] * roots.shape[1]))
    for s0 in range(0, nodes.size, chunk):
        diff = roots[None, :, :] - nodes[s0:s0 + chunk, None, None]
        g = np.min(np.maximum(np.abs(diff.real) / half_re, np.abs(diff.imag) / half_im), axis=2)
        best[s0:s0 + chunk] = np.argsort(g, axis=1, kind="stable")[:, :keep]
    return base[best], roots[best]


def pseudospectrum_grid(f, q: PseudoQuery, tol=1e-4, seed=0, center=True):
    """Indicator grid of Lambda_eps(u).

    A node is a member when its cell (the rectangle of half-widths h/2 around
    it) meets sigma(v) for some v in the ball; the ball search minimizes the
    Chebyshev distance from the node to sigma(v) scaled so that 1 is the cell
    edge. ``center_member`` additionally requires that distance to fall below
    ``tol`` (the node itself is in Lambda_eps). ``center=False`` stops each
    search as soon as the cell is decided, which is faster.
    """
    u = as_point(f, q.u)
    spec = q.grid
    nodes = spec.nodes().ravel()
    hr, hi = spec.steps
    objective = _cell_objective(f, nodes, hr / 2.0, hi / 2.0)
    starts, aux0 = _cell_starts(f, u, q.eps, nodes, hr / 2.0, hi / 2.0, seed)
    target = np.full(nodes.size, tol if center else 1.0)
    best, _, _ = _ball_search(objective, u, q.eps, nodes.size, target, starts, aux0,
                              min_step_rel=1e-7)
    shape = (spec.resolution[1], spec.resolution[0])
    values = best.reshape(shape)
    member = values <= 1.0 + 1e-9
    center_member = values <= tol if center else None
    labels, count = label_components(member)
    sigma = spectrum_at(f, u).values
    checks = {}
    if not touches_border(member):
        # the region holds the whole set, so at most dn components
        checks["component_bound"] = count <= f.d * f.n
    return IndicatorGrid(
        query=q, spec=spec, member=member, values=values,
        boundary=marching_squares(member, spec), components=count,
        labels=labels, center_member=center_member, spectrum=sigma, family=f,
        checks=checks,
    )


def eigenvalue_cloud(f, u, eps, n_samples, seed=0):
    """Union of sigma(v) over u, the 2m sphere axis points and ``n_samples``
    seeded uniform ball samples. eps = 0 gives exactly sigma(u)."""
    u = as_point(f, u)
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if eps == 0:
        return spectrum_at(f, u).values
    m = u.size
    pts = np.concatenate([
        u[None, :],
        u + eps * np.concatenate([np.eye(m), -np.eye(m)]),
        u + eps * unit_ball(stream(seed, "cloud"), n_samples, m),
    ])
    return family_roots(f, pts).ravel()


def _family_real_on_ball(f, u, eps, seed=0, samples=32):
    m = u.size
    pts = np.concatenate([u[None, :], u + eps * unit_ball(stream(seed, "symmetry"), samples, m)])
    C = evaluate_coeffs_batch(f, pts)
    scale = 1e-12 * (1.0 + np.max(np.abs(C)))
    real = np.all(np.abs(C.imag) <= scale)
    herm = np.all(np.abs(C - np.conj(np.swapaxes(C, -1, -2))) <= scale)
    return bool(real or herm)


def check_axis_symmetry(g: IndicatorGrid, seed=0):
    """Compare the member field with its mirror in the real axis.

    Returns (symmetric, mismatches, interior_mismatches); interior cells are
    members or non-members whose 4-neighbours all agree with them, so the
    count excludes the one-cell boundary layer.
    """
    if not g.spec.is_axis_symmetric():
        raise AsymmetryError(f"region {g.spec.region} is not symmetric about the real axis")
    if g.family is not None:
        q = g.query
        if not _family_real_on_ball(g.family, np.asarray(q.u, dtype=float), float(getattr(q, "eps", 0.0)), seed):
            raise AsymmetryError("family is neither real nor Hermitian on the sampled ball")
    mem = g.member
    diff = mem != mem[::-1, :]
    pad = np.pad(mem, 1, mode="edge")
    flat = (
        (pad[1:-1, 1:-1] == pad[:-2, 1:-1]) & (pad[1:-1, 1:-1] == pad[2:, 1:-1])
        & (pad[1:-1, 1:-1] == pad[1:-1, :-2]) & (pad[1:-1, 1:-1] == pad[1:-1, 2:])
    )
    interior = flat & flat[::-1, :]
    total = int(diff.sum())
    inner = int((diff & interior).sum())
    return total == 0, total, inner
