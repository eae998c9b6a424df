"""Jordan structure through the companion linearization.

With N = C - lam0 I, the ranks r_j = rank N^j give gamma_j = r_{j-1} - r_j,
the number of Jordan blocks of size >= j, and hence the block partition.
Ranks are taken on orthonormal bases of the successive ranges
(rank N R_{j-1}, R_j = orth(N R_{j-1})) rather than on raw matrix powers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import as_point, evaluate_coeffs
from .grids import label_components
from .linalg import jacobi_svd, null_space, spectral_norm
from .spectral import companion_matrix, roots_batch

__all__ = [
    "JordanChainError",
    "JordanPair",
    "JordanSignature",
    "PartitionError",
    "RankInconsistencyError",
    "RankSequence",
    "StratificationMap",
    "chain_relation_residuals",
    "eigen_clusters",
    "jordan_chains",
    "jordan_pair",
    "matrix_eigenvalues",
    "matrix_signature",
    "partition_from_ranks",
    "rank_sequence",
    "stable_defect",
    "stratify",
]

RANK_RTOL = 1e-7
GAP_MIN = 1e3
CHAIN_RTOL = 1e-6


class RankInconsistencyError(ArithmeticError):
    pass


class PartitionError(ArithmeticError):
    pass


class JordanChainError(ArithmeticError):
    def __init__(self, message, worst_column=None, residual=None):
        super().__init__(message)
        self.worst_column = worst_column
        self.residual = residual


@dataclass(frozen=True)
class RankSequence:
    eigenvalue: complex
    ranks: tuple
    algebraic_multiplicity: int
    size: int
    gaps: tuple = ()

    @property
    def min_gap(self):
        return min(self.gaps) if self.gaps else math.inf


@dataclass(frozen=True)
class JordanSignature:
    """Per distinct eigenvalue, its Jordan block partition."""

    blocks: tuple  # ((eigenvalue, (q1, q2, ...)), ...)
    size: int
    min_gap: float = math.inf

    @property
    def k(self):
        return len(self.blocks)

    def key(self):
        """Eigenvalue-free description: the multiset of partitions."""
        parts = sorted((tuple(p) for _, p in self.blocks), reverse=True)
        return " ".join("(" + ",".join(str(q) for q in p) + ")" for p in parts)

    @property
    def confident(self):
        return self.min_gap >= GAP_MIN


@dataclass(frozen=True, eq=False)
class JordanPair:
    X: np.ndarray
    J: np.ndarray
    signature: JordanSignature
    chains: np.ndarray  # full N x N chain matrix of the companion
    residual: float


def _rank_tol(C):
    return RANK_RTOL * max(1.0, spectral_norm(C))


def _rank_run(C, lam0, tol, ref, stop):
    """Ranks of N^j via orthonormal range recursion until ``stop(ranks)``."""
    size = C.shape[0]
    Nm = C - complex(lam0) * np.eye(size)
    R = np.eye(size, dtype=complex)
    ranks = []
    gaps = []
    while True:
        if R.shape[1] == 0:
            ranks.append(0)
            gaps.append(math.inf)
        else:
            U, s, _ = jacobi_svd(Nm @ R)
            s = s[: min(size, R.shape[1])]
            r = int(np.sum(s > tol))
            upper = s[r - 1] if r > 0 else ref
            lower = s[r] if r < s.size else 0.0
            gaps.append(math.inf if lower == 0 else float(upper / lower))
            ranks.append(r)
            R = U[:, :r]
        if stop(ranks) or len(ranks) >= size:
            return ranks, gaps


def rank_sequence(C, lam0, mult, tol=None):
    """Ranks of (lam0 I - C)^j for j = 1.. until N - rank reaches ``mult``.

    ``tol`` is the absolute singular-value threshold, by default
    1e-7 * max(1, ||C||_2). Gaps sigma_r / sigma_{r+1} (sigma_0 taken as
    max(1, ||C||_2)) are recorded for every rank decision. At most ``mult``
    powers are taken.
    """
    C = np.asarray(C, dtype=complex)
    size = C.shape[0]
    if tol is None:
        tol = _rank_tol(C)
    ref = max(1.0, spectral_norm(C))
    mult = int(mult)
    ranks, gaps = _rank_run(
        C, lam0, tol, ref,
        lambda rk: size - rk[-1] >= mult or len(rk) >= max(1, mult),
    )
    defect = size - ranks[-1]
    if defect != mult:
        raise RankInconsistencyError(
            f"rank sequence {ranks} gives multiplicity {defect}, expected {mult}"
        )
    return RankSequence(complex(lam0), tuple(ranks), mult, size, tuple(gaps))


def stable_defect(C, lam0, tol=None):
    """N - rank N^j once the ranks stop dropping: the algebraic multiplicity
    of the eigenvalues within the rank tolerance of lam0."""
    C = np.asarray(C, dtype=complex)
    if tol is None:
        tol = _rank_tol(C)
    ref = max(1.0, spectral_norm(C))
    ranks, gaps = _rank_run(
        C, lam0, tol, ref,
        lambda rk: rk[-1] == 0 or (len(rk) > 1 and rk[-1] == rk[-2]),
    )
    return C.shape[0] - ranks[-1], ranks, gaps


def partition_from_ranks(rs: RankSequence, N=None):
    """Block sizes from gamma_j = r_{j-1} - r_j (r_0 = N)."""
    N = rs.size if N is None else N
    prev = N
    gamma = []
    for r in rs.ranks:
        gamma.append(prev - r)
        prev = r
    for a, b in zip(gamma, gamma[1:]):
        if b > a:
            raise PartitionError(f"gamma sequence {gamma} increases")
    if any(g < 0 for g in gamma):
        raise PartitionError(f"gamma sequence {gamma} has negative entries")
    parts = []
    for s, g in enumerate(gamma, start=1):
        nxt = gamma[s] if s < len(gamma) else 0
        parts.extend([s] * (g - nxt))
    parts.sort(reverse=True)
    if sum(parts) != rs.algebraic_multiplicity:
        raise PartitionError(
            f"partition {parts} does not sum to multiplicity {rs.algebraic_multiplicity}"
        )
    return tuple(parts)


def _orth_basis(A, tol):
    if A.shape[1] == 0:
        return A
    U, s, _ = jacobi_svd(A)
    return U[:, : int(np.sum(s > tol))]


def jordan_chains(C, lam0, partition, tol=None):
    """Canonical chains for lam0, longest first, as columns phi_0..phi_{k-1}.

    Staircase: for s from the largest block size down, new top vectors are
    taken in ker N^s orthogonally to ker N^{s-1} plus the images N^{t-s} v_t
    of longer chains' tops; each chain is (N^{s-1} v, ..., N v, v).
    Returns (matrix of chain columns, list of chain lengths).
    """
    C = np.asarray(C, dtype=complex)
    size = C.shape[0]
    if tol is None:
        tol = _rank_tol(C)
    Nm = C - complex(lam0) * np.eye(size)
    parts = sorted((int(p) for p in partition), reverse=True)
    top = max(parts)
    kernels = {0: np.zeros((size, 0), dtype=complex)}
    power = np.eye(size, dtype=complex)
    for s in range(1, top + 1):
        power = Nm @ power
        dim = sum(min(p, s) for p in parts)
        kernels[s] = null_space(power, size - dim)

    tops = []  # (length, top vector)
    for s in range(top, 0, -1):
        count = parts.count(s)
        if count == 0:
            continue
        images = [np.linalg.matrix_power(Nm, t - s) @ v for t, v in tops]
        span = np.column_stack([kernels[s - 1]] + images) if images else kernels[s - 1]
        Q = _orth_basis(span, 1e-10)
        K = kernels[s]
        X = K - Q @ (Q.conj().T @ K) if Q.shape[1] else K
        U, sv, _ = jacobi_svd(X)
        if sv.size < count or sv[count - 1] <= 1e-8 * max(1.0, sv[0] if sv.size else 1.0):
            raise JordanChainError(f"no complement of dimension {count} in ker N^{s}")
        for c in range(count):
            tops.append((s, U[:, c]))

    columns = []
    lengths = []
    for s, v in tops:
        chain = [v]
        for _ in range(s - 1):
            chain.append(Nm @ chain[-1])
        columns.extend(reversed(chain))
        lengths.append(s)
    Phi = np.column_stack(columns)
    sv = jacobi_svd(Phi)[1]
    if sv[-1] <= 1e-8 * sv[0]:
        raise JordanChainError(f"chains for partition {tuple(parts)} are linearly dependent")
    res = _companion_chain_residual(C, lam0, Phi, lengths)
    bound = CHAIN_RTOL * (1.0 + spectral_norm(C))
    if res.max() > bound:
        worst = int(np.argmax(res))
        raise JordanChainError(
            f"chain residual {res[worst]:.3e} exceeds {bound:.3e} at column {worst}",
            worst, float(res[worst]),
        )
    return Phi, lengths


def _companion_chain_residual(C, lam0, Phi, lengths):
    """||C phi_i - lam0 phi_i - phi_{i-1}|| per column (phi_{-1} = 0)."""
    res = []
    col = 0
    for s in lengths:
        for i in range(s):
            r = C @ Phi[:, col + i] - lam0 * Phi[:, col + i]
            if i > 0:
                r = r - Phi[:, col + i - 1]
            res.append(np.linalg.norm(r))
        col += s
    return np.array(res)


def matrix_eigenvalues(C):
    """Eigenvalues of a square matrix as the roots of det(lam I - C)."""
    C = np.asarray(C, dtype=complex)
    N = C.shape[0]
    stack = np.stack([-C, np.eye(N, dtype=complex)])[None]
    return roots_batch(stack, monic=True, refine=True)[0]


def _dendrogram(roots):
    """Single-linkage merge tree: (members, children) dicts and the root id."""
    n = roots.size
    edges = sorted((abs(roots[i] - roots[j]), i, j) for i in range(n) for j in range(i + 1, n))
    members = {i: [i] for i in range(n)}
    children = {}
    owner = list(range(n))
    nxt = n
    for _, i, j in edges:
        a, b = owner[i], owner[j]
        if a == b:
            continue
        members[nxt] = members[a] + members[b]
        children[nxt] = (a, b)
        for k in members[nxt]:
            owner[k] = nxt
        nxt += 1
    return members, children, nxt - 1


def contour_moments(C, centre, radius, points=64):
    """(count, mean) of the eigenvalues of C inside |z - centre| < radius.

    Trapezoidal rule for (1/2 pi i) * integral of z^k tr((zI - C)^{-1}),
    k = 0, 1. The mean of a cluster is far better conditioned than its
    individual members.
    """
    C = np.asarray(C, dtype=complex)
    N = C.shape[0]
    w = np.exp(2j * np.pi * np.arange(points) / points)
    z = centre + radius * w
    tr = np.trace(np.linalg.inv(z[:, None, None] * np.eye(N) - C), axis1=1, axis2=2)
    # dz = i radius w dtheta, dtheta = 2 pi / points
    weight = radius * w / points
    m0 = np.sum(tr * weight)
    m1 = np.sum(z * tr * weight)
    return m0, (m1 / m0 if abs(m0) > 0.5 else complex(centre))


def _refined_centre(C, roots, idx):
    """Contour-refined mean of a root group, or the plain mean when the group
    is not isolated enough to enclose."""
    group = roots[idx]
    lam = complex(np.mean(group))
    others = np.delete(roots, idx)
    spread = float(np.max(np.abs(group - lam)))
    if others.size == 0:
        radius = max(4.0 * spread, 1e-3 * (1.0 + abs(lam)))
    else:
        radius = 0.5 * float(np.min(np.abs(others - lam)))
        if radius <= 2.0 * spread:
            return lam
    count, mean = contour_moments(C, lam, radius)
    if abs(count - len(idx)) < 0.25:
        return complex(mean)
    return lam


def eigen_clusters(C, roots, tol=None):
    """Group computed eigenvalues so each group's size equals the rank defect.

    The single-linkage tree of the roots is walked from the top; a group's
    centre is refined by a resolvent contour integral, and the group is
    accepted when the stabilized defect of C - centre*I equals its size and
    is split otherwise. A singleton whose defect disagrees raises
    RankInconsistencyError.
    """
    roots = np.asarray(roots, dtype=complex).ravel()
    members, children, top = _dendrogram(roots)
    out = []
    stack = [top]
    while stack:
        node = stack.pop()
        idx = members[node]
        lam = _refined_centre(C, roots, idx)
        defect, _, _ = stable_defect(C, lam, tol)
        if defect == len(idx):
            out.append((lam, len(idx)))
        elif node in children and defect < len(idx):
            stack.extend(children[node])
        else:
            raise RankInconsistencyError(
                f"eigenvalue group at {lam} of size {len(idx)} has rank defect {defect}"
            )
    return sorted(out, key=lambda g: (g[0].real, g[0].imag))


def matrix_signature(C, tol=None, roots=None):
    """Jordan signature of a matrix.

    Multiplicities come from :func:`eigen_clusters`, so every group is
    consistent with the rank defect. ``min_gap`` reports the weakest rank
    decision (below 1e3 means "undetermined").
    """
    C = np.asarray(C, dtype=complex)
    if roots is None:
        roots = matrix_eigenvalues(C)
    if tol is None:
        tol = _rank_tol(C)
    blocks = []
    gap = math.inf
    for lam, mult in eigen_clusters(C, roots, tol):
        rs = rank_sequence(C, lam, mult, tol)
        blocks.append((lam, partition_from_ranks(rs)))
        gap = min(gap, rs.min_gap)
    blocks.sort(key=lambda b: (b[0].real, b[0].imag))
    return JordanSignature(tuple(blocks), C.shape[0], gap)


def _jordan_block(lam, k):
    return lam * np.eye(k, dtype=complex) + np.eye(k, k=1, dtype=complex)


def chain_relation_residuals(coeffs, lam0, X, lengths):
    """Relative residuals of sum_j P^{(j)}(lam0)/j! x_{i-j} per column."""
    coeffs = np.asarray(coeffs, dtype=complex)
    d = coeffs.shape[0] - 1
    # Taylor coefficients P^{(j)}(lam0)/j!
    taylor = []
    for j in range(d + 1):
        acc = np.zeros_like(coeffs[0])
        for k in range(j, d + 1):
            acc = acc + math.comb(k, j) * coeffs[k] * lam0 ** (k - j)
        taylor.append(acc)
    scale = sum(np.linalg.norm(A) * (1.0 + abs(lam0)) ** k for k, A in enumerate(coeffs))
    out = []
    col = 0
    for s in lengths:
        xs = [X[:, col + i] for i in range(s)]
        xnorm = max(np.linalg.norm(x) for x in xs)
        for i in range(s):
            r = sum(taylor[j] @ xs[i - j] for j in range(min(i, d) + 1))
            out.append(np.linalg.norm(r) / (scale * xnorm))
        col += s
    return np.array(out)


def jordan_pair(f, u):
    """Jordan pair (X, J) of P_u from chains of its companion matrix.

    X is the top n rows of the companion chain matrix; columns are grouped
    by eigenvalue, then by chain (longest first).
    """
    P = evaluate_coeffs(f, u)
    C = companion_matrix(P)
    sig = matrix_signature(C)
    coeffs = P.coeffs
    if not P.monic:
        coeffs = np.linalg.solve(coeffs[-1][None], coeffs)
    cols = []
    blocks = []
    worst = 0.0
    for lam, parts in sig.blocks:
        Phi, lengths = jordan_chains(C, lam, parts)
        X = Phi[: f.n]
        res = chain_relation_residuals(coeffs, lam, X, lengths)
        if res.size and res.max() > CHAIN_RTOL:
            k = int(np.argmax(res))
            raise JordanChainError(
                f"chain relation residual {res[k]:.3e} at column {len(cols) + k} (eigenvalue {lam})",
                len(cols) + k, float(res[k]),
            )
        worst = max(worst, float(res.max()) if res.size else 0.0)
        cols.append(Phi)
        blocks.extend(_jordan_block(lam, s) for s in lengths)
    Phi = np.column_stack(cols)
    N = Phi.shape[0]
    J = np.zeros((N, N), dtype=complex)
    p = 0
    for B in blocks:
        k = B.shape[0]
        J[p:p + k, p:p + k] = B
        p += k
    return JordanPair(Phi[: f.n], J, sig, Phi, worst)


@dataclass(frozen=True, eq=False)
class StratificationMap:
    nodes: np.ndarray  # (..., m) parameter points on the grid
    keys: np.ndarray  # signature key per node, "undetermined" on failure
    regions: np.ndarray  # connected same-signature region id per node (0 for undetermined)
    legend: dict  # signature key -> integer code
    gaps: np.ndarray = field(repr=False, default=None)

    @property
    def classes(self):
        return sorted(k for k in set(self.keys.ravel().tolist()) if k != "undetermined")


UNDETERMINED = "undetermined"


def _node_signature(f, v):
    try:
        sig = matrix_signature(companion_matrix(evaluate_coeffs(f, v)))
    except (RankInconsistencyError, PartitionError, ArithmeticError, ValueError):
        return UNDETERMINED, 0.0
    if not sig.confident:
        return UNDETERMINED, sig.min_gap
    return sig.key(), sig.min_gap


def stratify(f, axes, base=None, dims=None):
    """Signature map over a 1- or 2-dimensional parameter slice.

    ``axes`` is a list of one or two 1-D arrays of coordinates; ``dims``
    names the parameter indices they vary (default 0 and 1) and ``base``
    fixes the remaining parameters (default 0). Nodes failing the rank gap
    test or consistency checks are marked "undetermined".
    """
    axes = [np.asarray(a, dtype=float) for a in axes]
    if len(axes) not in (1, 2):
        raise ValueError("stratify takes one or two axes")
    dims = list(range(len(axes))) if dims is None else list(dims)
    base = np.zeros(f.m) if base is None else as_point(f, base).copy()
    if max(dims) >= f.m:
        raise ValueError("slice dimension exceeds the parameter count")
    shape = tuple(a.size for a in axes)
    nodes = np.empty(shape + (f.m,))
    keys = np.empty(shape, dtype=object)
    gaps = np.empty(shape)
    for idx in np.ndindex(*shape):
        v = base.copy()
        for ax, dim, i in zip(axes, dims, idx):
            v[dim] = ax[i]
        nodes[idx] = v
        keys[idx], gaps[idx] = _node_signature(f, v)
    legend = {k: i + 1 for i, k in enumerate(sorted(set(keys.ravel().tolist()) - {UNDETERMINED}))}
    codes = np.vectorize(lambda k: legend.get(k, 0), otypes=[int])(keys)
    regions = np.zeros(shape, dtype=int)
    nxt = 0
    for code in legend.values():
        field2 = (codes == code)
        lab, cnt = label_components(field2.reshape(shape if len(shape) == 2 else (1,) + shape))
        lab = lab.reshape(shape)
        regions[field2] = lab[field2] + nxt
        nxt += cnt
    return StratificationMap(nodes, keys.astype(str), regions, legend, gaps)
