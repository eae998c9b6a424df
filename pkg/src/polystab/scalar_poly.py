"""Scalar complex polynomials: Horner, interpolation, Aberth roots, clustering.

Coefficient arrays are indexed by power: ``c[k]`` multiplies z**k.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConvergenceError",
    "InterpolationError",
    "RootMultiset",
    "ScalarPoly",
    "aberth_roots",
    "aberth_roots_batch",
    "cluster_roots",
    "cluster_roots_adaptive",
    "horner_eval",
    "interpolate_monic",
    "interpolation_nodes",
    "poly_from_roots",
]

EPS = np.finfo(float).eps


class InterpolationError(ArithmeticError):
    pass


class ConvergenceError(ArithmeticError):
    def __init__(self, message, roots=None, residuals=None):
        super().__init__(message)
        self.roots = roots
        self.residuals = residuals


@dataclass(frozen=True)
class ScalarPoly:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if c.ndim != 1 or c.size == 0 or c[-1] == 0:
            raise ValueError("leading coefficient must be nonzero")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self):
        return self.coeffs.size - 1

    def __call__(self, z):
        return horner_eval(self, z)


@dataclass(frozen=True)
class RootMultiset:
    roots: np.ndarray
    residuals: np.ndarray


def _coeffs(p):
    return p.coeffs if isinstance(p, ScalarPoly) else np.asarray(p, dtype=complex)


def horner_eval(p, z):
    c = _coeffs(p)
    z = np.asarray(z, dtype=complex)
    acc = np.full(z.shape, c[-1], dtype=complex)
    for k in range(c.size - 2, -1, -1):
        acc = acc * z + c[k]
    return acc[()] if acc.ndim == 0 else acc


def poly_from_roots(roots, lead=1.0):
    """Coefficients (ascending) of lead * prod(z - r)."""
    c = np.array([lead], dtype=complex)
    for r in roots:
        c = np.concatenate(([0.0], c)) - r * np.concatenate((c, [0.0]))
    return c


def interpolation_nodes(D, rho):
    j = np.arange(D + 1)
    return rho * np.exp(2j * np.pi * j / (D + 1))


def interpolate_monic(values, D, rho=1.0, expected_lead=1.0, check=True):
    """Degree-D interpolant from samples at ``interpolation_nodes(D, rho)``.

    The Vandermonde system on scaled roots of unity inverts by a DFT.
    ``values`` may carry leading batch axes, (..., D+1).
    """
    values = np.asarray(values, dtype=complex)
    if values.shape[-1] != D + 1:
        raise ValueError(f"need {D + 1} samples, got {values.shape[-1]}")
    rho = np.asarray(rho, dtype=float)
    # numpy's forward FFT uses exp(-2 pi i jk/N), the inverse of our sampling
    c = np.fft.fft(values, axis=-1) / (D + 1)
    c = c / rho[..., None] ** np.arange(D + 1)
    if check:
        lead = c[..., D]
        expected = np.asarray(expected_lead)
        bad = np.abs(lead - expected) > 1e-6 * np.maximum(1.0, np.abs(expected))
        if np.any(bad):
            raise InterpolationError(
                f"interpolated leading coefficient {np.ravel(lead)[np.argmax(np.ravel(bad))]!r} "
                f"differs from expected {np.ravel(expected)[0] if expected.ndim else expected!r}"
            )
    if c.ndim == 1:
        return ScalarPoly(c)
    return c


def _root_bound(c):
    lead = c[..., -1:]
    return 1.0 + np.max(np.abs(c[..., :-1] / lead), axis=-1)


def aberth_roots_batch(coeffs, tol=1e-12, max_iter=200, init=None, raise_on_failure=True):
    """Aberth-Ehrlich on a batch of same-degree polynomials.

    ``coeffs`` has shape (B, D+1). ``init`` optionally warm-starts the
    iteration with (B, D) root guesses. Returns (roots, residuals, converged).
    Updates sweep the roots in order, each using the freshest neighbours.
    """
    c = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    B, D1 = c.shape
    D = D1 - 1
    if D < 1:
        raise ValueError("degree must be >= 1")
    if np.any(c[:, -1] == 0):
        raise ValueError("leading coefficient must be nonzero")
    if D == 1:
        z = (-c[:, 0] / c[:, 1])[:, None]
        res = np.abs(c[:, 0] + c[:, 1] * z[:, 0])[:, None]
        return z, res, np.ones(B, dtype=bool)

    cnorm = np.max(np.abs(c), axis=1)
    res_tol = tol * (1.0 + cnorm)
    absc = np.abs(c)
    dc = c[:, 1:] * np.arange(1, D1)

    if init is None:
        R = _root_bound(c)
        ang = 2 * np.pi * np.arange(D) / D + 0.37
        z = R[:, None] * np.exp(1j * ang)[None, :]
    else:
        z = np.array(init, dtype=complex, copy=True).reshape(B, D)

    def evaluate(cc, dd, aa, zz):
        p = np.full(zz.shape, 1.0 + 0j) * cc[:, -1:]
        dp = np.full(zz.shape, 1.0 + 0j) * dd[:, -1:]
        mag = np.abs(p)
        az = np.abs(zz)
        for k in range(D - 1, -1, -1):
            p = p * zz + cc[:, k:k + 1]
            mag = mag * az + aa[:, k:k + 1]
        for k in range(D - 2, -1, -1):
            dp = dp * zz + dd[:, k:k + 1]
        return p, dp, mag

    active = np.arange(B)
    converged = np.zeros(B, dtype=bool)
    for _ in range(max_iter):
        if active.size == 0:
            break
        ca, da, aa, za = c[active], dc[active], absc[active], z[active]
        moved = np.zeros(za.shape)
        res = np.zeros(za.shape)
        mag = np.zeros(za.shape)
        for i in range(D):
            zi = za[:, i]
            azi = np.abs(zi)
            p = np.full(zi.shape, ca[:, -1], dtype=complex)
            dp = np.full(zi.shape, da[:, -1], dtype=complex)
            mg = np.abs(p)
            for k in range(D - 1, -1, -1):
                p = p * zi + ca[:, k]
                mg = mg * azi + aa[:, k]
            for k in range(D - 2, -1, -1):
                dp = dp * zi + da[:, k]
            res[:, i] = np.abs(p)
            mag[:, i] = mg
            diff = zi[:, None] - za
            diff[:, i] = 1.0
            s = np.sum(1.0 / diff, axis=1) - 1.0
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = p / dp
                w = ratio / (1.0 - ratio * s)
            w = np.where(np.isfinite(w), w, 0.0)
            w = np.where(p == 0, 0.0, w)
            za[:, i] = zi - w
            moved[:, i] = np.abs(w)
        z[active] = za
        # residuals were taken before each correction; a tiny correction on
        # top of a converged residual means the new point is converged too
        at_noise = res <= 16 * D * EPS * mag
        done_res = np.all((res <= res_tol[active, None]) | at_noise, axis=1)
        done_step = np.all(moved <= 1e-3 * np.sqrt(EPS) * (1.0 + np.abs(za)), axis=1)
        done = done_res & (done_step | np.all(at_noise, axis=1))
        converged[active[done]] = True
        active = active[~done]

    p, _, mag = evaluate(c, dc, absc, z)
    res = np.abs(p)
    ok = np.all((res <= res_tol[:, None]) | (res <= 16 * D * EPS * mag), axis=1)
    if raise_on_failure and not np.all(ok):
        raise ConvergenceError(
            f"Aberth iteration did not converge in {max_iter} iterations",
            roots=z, residuals=res,
        )
    return z, res, ok


def aberth_roots(p, tol=1e-12, max_iter=200):
    c = _coeffs(p)
    if c.size < 2:
        raise ValueError("degree must be >= 1")
    z, res, _ = aberth_roots_batch(c[None, :], tol=tol, max_iter=max_iter)
    return RootMultiset(z[0], res[0])


class _DSU:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _groups(labels, roots):
    out = {}
    for i, lab in enumerate(labels):
        out.setdefault(lab, []).append(i)
    return [(complex(np.mean(roots[idx])), len(idx)) for idx in out.values()]


def cluster_roots(r, cluster_tol=None):
    """Single-linkage clustering; returns [(mean value, multiplicity), ...].

    The default radius for a pair is 1e-6 * (1 + max(|a|, |b|)).
    """
    roots = np.asarray(r.roots if isinstance(r, RootMultiset) else r, dtype=complex).ravel()
    n = roots.size
    dsu = _DSU(n)
    for i in range(n):
        for j in range(i + 1, n):
            tol = cluster_tol
            if tol is None:
                tol = 1e-6 * (1.0 + max(abs(roots[i]), abs(roots[j])))
            if abs(roots[i] - roots[j]) <= tol:
                dsu.union(i, j)
    groups = _groups([dsu.find(i) for i in range(n)], roots)
    return sorted(groups, key=lambda g: (g[0].real, g[0].imag))


def cluster_roots_adaptive(r, noise=1e-12, cluster_tol=None, scale=1.0):
    """Multiplicity-aware clustering.

    A mu-fold root perturbed by relative coefficient noise ``noise`` spreads
    over a radius of order noise**(1/mu). Walking the single-linkage
    dendrogram top-down, a group of mu roots is accepted as one value when
    its diameter is within that radius (or within ``cluster_tol``).
    """
    roots = np.asarray(r.roots if isinstance(r, RootMultiset) else r, dtype=complex).ravel()
    n = roots.size
    if n == 0:
        return []
    edges = sorted(
        (abs(roots[i] - roots[j]), i, j) for i in range(n) for j in range(i + 1, n)
    )
    # dendrogram nodes: leaves 0..n-1, merges n..2n-2
    members = {i: [i] for i in range(n)}
    children = {}
    dsu = _DSU(2 * n)
    node_of = list(range(n))
    nxt = n
    for _, i, j in edges:
        a, b = node_of[dsu.find(i)], node_of[dsu.find(j)]
        if a == b:
            continue
        members[nxt] = members[a] + members[b]
        children[nxt] = (a, b)
        ri, rj = dsu.find(i), dsu.find(j)
        dsu.union(ri, rj)
        node_of[dsu.find(i)] = nxt
        nxt += 1
    top = nxt - 1

    def accepted(node):
        idx = members[node]
        mu = len(idx)
        if mu == 1:
            return True
        pts = roots[idx]
        centre = np.mean(pts)
        diam = np.max(np.abs(pts[:, None] - pts[None, :]))
        base = cluster_tol if cluster_tol is not None else 1e-6 * (1.0 + abs(centre))
        allowed = 4.0 * (noise ** (1.0 / mu)) * (scale + abs(centre))
        return diam <= max(base, allowed)

    groups = []
    stack = [top]
    while stack:
        node = stack.pop()
        if accepted(node):
            groups.append(members[node])
        else:
            stack.extend(children[node])
    out = [(complex(np.mean(roots[g])), len(g)) for g in groups]
    return sorted(out, key=lambda g: (g[0].real, g[0].imag))
