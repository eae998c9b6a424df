"""Empirical Hoelder exponents of the set-valued maps and the spectral radius.

The protocol: move the parameter from ``base`` along a unit direction by a
geometric sequence of steps h, measure the change of the map, and fit
log(dist) = log(c) + alpha * log(h) by least squares.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import as_point, evaluate_coeffs_batch
from .pseudospectral import PseudoQuery, eigenvalue_cloud, pseudospectrum_grid
from .grids import polyline_hausdorff
from .ranges import jw_sample, numrange_grid, reconstruct_w_from_jw, w_bound, w_boundary
from .rng import random_direction, stream
from .spectral import directed_hausdorff, hausdorff, spectral_radius, spectrum_at

__all__ = [
    "MAP_KINDS",
    "GenericityReport",
    "HoelderFit",
    "InsufficientDataError",
    "ScalePair",
    "default_scales",
    "fit_holder",
    "genericity_probe",
    "sample_scale_pairs",
    "vector_hausdorff",
]

MAP_KINDS = ("spectrum", "pseudospectrum", "numrange", "jointnr", "specradius")


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class ScalePair:
    h: float
    dist: float
    map_kind: str

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if not self.dist >= 0:
            raise ValueError("dist must be nonnegative")


@dataclass(frozen=True)
class HoelderFit:
    c_hat: float
    alpha_hat: float
    r2: float
    n_pairs: int
    degenerate: bool


def default_scales(count=8, start=1):
    return [2.0 ** -k for k in range(start, start + count)]


def vector_hausdorff(A, B):
    """Hausdorff distance between rows of A and B in the max norm of C^k."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)

    def one_sided(X, Y):
        worst = 0.0
        step = max(1, 2_000_000 // (Y.shape[0] * Y.shape[1]))
        for s in range(0, X.shape[0], step):
            d = np.max(np.abs(X[s:s + step, None, :] - Y[None, :, :]), axis=2)
            worst = max(worst, float(np.max(np.min(d, axis=1))))
        return worst

    return max(one_sided(A, B), one_sided(B, A))


def _grid_deviation(g1, g2):
    """Symmetric deviation between member node sets (one-sided both ways)."""
    a = g1.member_points()
    b = g2.member_points()
    if a.size == 0 or b.size == 0:
        raise ValueError("empty member set; enlarge the region or refine the grid")
    return max(directed_hausdorff(a, b), directed_hausdorff(b, a))


def _map_distance(f, u, v, kind, opts):
    if kind == "spectrum":
        return hausdorff(spectrum_at(f, u), spectrum_at(f, v))
    if kind == "specradius":
        return abs(spectral_radius(spectrum_at(f, u)) - spectral_radius(spectrum_at(f, v)))
    seed = opts.get("seed", 0)
    if kind == "jointnr":
        n = opts.get("n_samples", 400)
        return vector_hausdorff(jw_sample(f, u, n, seed).points, jw_sample(f, v, n, seed).points)
    if kind == "pseudospectrum":
        eps = opts.get("eps", 0.1)
        if opts.get("metric", "cloud") == "grid":
            region, res = opts["region"], opts.get("resolution", (41, 41))
            g1 = pseudospectrum_grid(f, PseudoQuery(u, eps, region, res), seed=seed, center=False)
            g2 = pseudospectrum_grid(f, PseudoQuery(v, eps, region, res), seed=seed, center=False)
            return _grid_deviation(g1, g2)
        n = opts.get("n_samples", 400)
        return hausdorff(eigenvalue_cloud(f, u, eps, n, seed), eigenvalue_cloud(f, v, eps, n, seed))
    if kind == "numrange":
        metric = opts.get("metric", "boundary")
        if metric == "grid":
            region, res = opts["region"], opts.get("resolution", (41, 41))
            return _grid_deviation(numrange_grid(f, u, region, res), numrange_grid(f, v, region, res))
        if metric == "boundary":
            res = opts.get("resolution", (121, 121))
            region = opts.get("region")
            if region is None:
                r = max(w_bound(f, u), w_bound(f, v)) if f.monic else 10.0
                region = (-r, r, -r, r)
            bu = w_boundary(f, u, region, res)
            bv = w_boundary(f, v, region, res)
            if bu and bv:
                return polyline_hausdorff(bu, bv)
            # no interior: fall back to the JW root clouds
        n = opts.get("n_samples", 400)
        wu = reconstruct_w_from_jw(jw_sample(f, u, n, seed))
        wv = reconstruct_w_from_jw(jw_sample(f, v, n, seed))
        return hausdorff(wu, wv)
    raise ValueError(f"unknown map kind {kind!r}; expected one of {MAP_KINDS}")


def sample_scale_pairs(f, base, map_kind, direction=None, scales=None, seed=0, **opts):
    """(h, dist) pairs for u' = base + h * direction.

    Metrics: Hausdorff for the spectrum, |r(u) - r(u')| for the spectral
    radius, max-norm Hausdorff between matched-seed point clouds for JW,
    Hausdorff between matched-seed eigenvalue clouds for Lambda_eps, and for
    W the Hausdorff distance between interpolated boundary contours (falling
    back to JW root clouds when W has no interior). ``metric="grid"``
    switches Lambda_eps and W to the member-set deviation of indicator
    grids; that needs ``region`` and optionally ``resolution``.
    """
    base = as_point(f, base)
    if map_kind not in MAP_KINDS:
        raise ValueError(f"unknown map kind {map_kind!r}; expected one of {MAP_KINDS}")
    if scales is None:
        scales = default_scales()
    scales = [float(h) for h in scales]
    if len(scales) < 6:
        raise ValueError("need at least 6 scales")
    if any(h <= 0 for h in scales) or any(b >= a for a, b in zip(scales, scales[1:])):
        raise ValueError("scales must be positive and strictly decreasing")
    if direction is None:
        direction = random_direction(stream(seed, "direction"), f.m)
    direction = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(direction)
    if direction.shape != (f.m,) or norm == 0:
        raise ValueError("direction must be a nonzero vector of length m")
    direction = direction / norm
    opts = dict(opts, seed=seed)
    return [
        ScalePair(h, float(_map_distance(f, base, base + h * direction, map_kind, opts)), map_kind)
        for h in scales
    ]


def fit_holder(pairs, noise_floor=1e-9, min_pairs=4):
    """Least-squares line through (log h, log dist) for dist > noise_floor."""
    if len(pairs) < min_pairs:
        raise InsufficientDataError(f"need at least {min_pairs} pairs, got {len(pairs)}")
    use = [p for p in pairs if p.dist > noise_floor]
    if len(use) < min_pairs:
        return HoelderFit(math.nan, math.nan, math.nan, len(use), True)
    x = np.log([p.h for p in use])
    y = np.log([p.dist for p in use])
    A = np.stack([x, np.ones_like(x)], axis=1)
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ np.array([slope, icpt])
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - float(np.sum(resid ** 2)) / ss_tot)
    return HoelderFit(float(math.exp(icpt)), float(slope), r2, len(use), False)


@dataclass(frozen=True)
class GenericityReport:
    distinct_counts: tuple
    count_stable: bool
    radius_fit: HoelderFit
    radius_lipschitz: bool
    verdict: str


def genericity_probe(f, u, radius=1e-4, cluster_tol=None, seed=0):
    """Classify u as "apparently generic" or "near stratum boundary".

    The distinct-eigenvalue count must agree at u and the 2m points
    u +- radius * e_k, and finite differences of the spectral radius must
    fit a slope >= 0.95 (or vanish, for a locally constant radius).
    """
    u = as_point(f, u)
    m = u.size
    probes = np.concatenate([u[None, :], u + radius * np.concatenate([np.eye(m), -np.eye(m)])])
    counts = tuple(len(spectrum_at(f, p, cluster_tol=cluster_tol)) for p in probes)
    stable = len(set(counts)) == 1
    direction = random_direction(stream(seed, "probe-direction"), m)
    scales = [radius * 10.0 ** (-k / 2.0) for k in range(6)]
    pairs = sample_scale_pairs(f, u, "specradius", direction, scales, seed)
    fit = fit_holder(pairs, noise_floor=1e-12 * (1.0 + _coeff_scale(f, u)))
    lipschitz = fit.degenerate or fit.alpha_hat >= 0.95
    verdict = "apparently generic" if stable and lipschitz else "near stratum boundary"
    return GenericityReport(counts, stable, fit, bool(lipschitz), verdict)


def _coeff_scale(f, u):
    return float(np.max(np.abs(evaluate_coeffs_batch(f, u[None, :]))))
