"""Independent reference computations used by the tests."""
import itertools

import numpy as np
from numpy.polynomial import polynomial as npoly

from polystab.core import family_from_arrays


def cofactor_det_poly(coeffs):
    """Ascending coefficients of det(sum_k A_k lam^k) by Laplace expansion
    along the first row, with polynomial entries multiplied by convolution."""
    coeffs = np.asarray(coeffs, dtype=complex)
    n = coeffs.shape[1]
    entries = [[coeffs[:, i, j] for j in range(n)] for i in range(n)]

    def det(rows, cols):
        if len(rows) == 1:
            return entries[rows[0]][cols[0]]
        acc = np.zeros(1, dtype=complex)
        for k, c in enumerate(cols):
            minor = det(rows[1:], cols[:k] + cols[k + 1:])
            term = npoly.polymul(entries[rows[0]][c], minor)
            acc = npoly.polyadd(acc, term if k % 2 == 0 else -term)
        return acc

    return det(list(range(n)), list(range(n)))


def cofactor_det(A):
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if n == 1:
        return A[0, 0]
    return sum((-1) ** j * A[0, j] * cofactor_det(np.delete(A[1:], j, axis=1)) for j in range(n))


def monomial_sum(coeffs, lam):
    return sum(A * lam ** k for k, A in enumerate(np.asarray(coeffs, dtype=complex)))


def brute_hausdorff(A, B):
    A = np.asarray(A, dtype=complex).ravel()
    B = np.asarray(B, dtype=complex).ravel()
    d1 = max(min(abs(a - b) for b in B) for a in A)
    d2 = max(min(abs(a - b) for a in A) for b in B)
    return max(d1, d2)


def _unit(rng, count, n):
    x = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def sphere_fov_samples(M, samples, rng, rounds=8):
    """Values x* M x over ``samples`` unit vectors.

    A fifth of the budget is uniform on the sphere; the rest is spent in
    rounds of random perturbations of the vectors behind the current convex
    hull vertices, with shrinking step, so the sampled hull approaches the
    boundary of the field of values. Pure sampling: no eigensolver involved.
    """
    from scipy.spatial import ConvexHull

    n = M.shape[0]
    first = samples // 5
    X = _unit(rng, first, n)
    vals = np.einsum("si,ij,sj->s", X.conj(), M, X)
    per_round = (samples - first) // rounds
    step = 0.3
    for _ in range(rounds):
        hull = ConvexHull(np.c_[vals.real, vals.imag])
        base = X[hull.vertices]
        k = per_round // base.shape[0]
        Y = np.repeat(base, k, axis=0) + step * (
            rng.standard_normal((base.shape[0] * k, n)) + 1j * rng.standard_normal((base.shape[0] * k, n)))
        Y /= np.linalg.norm(Y, axis=1, keepdims=True)
        X = np.concatenate([X, Y])
        vals = np.concatenate([vals, np.einsum("si,ij,sj->s", Y.conj(), M, Y)])
        step /= 2
    return vals


def _coef_text(c):
    return f"({c.real:.6f}{c.imag:+.6f}i)"


def random_poly_text(rng, m, degree=2, scale=1.0, real=False):
    """Random polynomial expression in t1..tm of total degree <= degree."""
    terms = []
    for powers in itertools.product(range(degree + 1), repeat=m):
        if sum(powers) > degree:
            continue
        c = scale * (rng.uniform(-1, 1) + (0 if real else 1j * rng.uniform(-1, 1)))
        mono = "*".join(f"t{k + 1}^{p}" for k, p in enumerate(powers) if p)
        terms.append(_coef_text(complex(c)) + ("*" + mono if mono else ""))
    return " + ".join(terms)


def random_family(rng, n, d, m, degree=2, scale=0.5, real=False, monic=True):
    mats = []
    for k in range(d + 1):
        if k == d and monic:
            mats.append([["1" if i == j else "0" for j in range(n)] for i in range(n)])
        else:
            mats.append([[random_poly_text(rng, m, degree, scale, real) for _ in range(n)] for _ in range(n)])
    return family_from_arrays(mats, m)


def family(coeff_texts, m=1):
    return family_from_arrays(coeff_texts, m)


LINEAR = [[["t1"]], [["1"]]]
DISK = [[["t1 + 1i*t2"]], [["1"]]]
SQRT = [[["0", "-1"], ["-t1", "0"]], [["1", "0"], ["0", "1"]]]
DIAG = [[["t1", "0"], ["0", "t2"]], [["1", "0"], ["0", "1"]]]
