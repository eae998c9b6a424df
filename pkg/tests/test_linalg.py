import numpy as np
import pytest

from oracles import cofactor_det
from polystab.linalg import (
    NotHermitianError,
    hermitian_eig,
    jacobi_svd,
    lu_det,
    null_space,
    spectral_norm,
    svd_rank,
)


def _rand(rng, *shape):
    return rng.uniform(-1, 1, shape) + 1j * rng.uniform(-1, 1, shape)


def test_lu_det_identity_and_diag():
    assert lu_det(np.eye(3)) == 1
    assert lu_det(np.diag([2.0, 3.0])) == 6


def test_lu_det_integer_frozen():
    # exact determinant (cofactor expansion in integers) is -55
    M = np.array([[2, -1, 0, 3], [1, 4, -2, 0], [0, 1, 1, -1], [5, 0, 2, 1]])
    assert cofactor_det(M) == -55
    assert lu_det(M) == pytest.approx(-55, rel=1e-12)


def test_lu_det_matches_cofactor(rng):
    for _ in range(10):
        A = _rand(rng, 4, 4)
        ref = cofactor_det(A)
        assert abs(lu_det(A) - ref) <= 1e-10 * abs(ref)


def test_lu_det_singular_and_batched(rng):
    A = np.array([[1.0, 2.0], [2.0, 4.0]])
    assert abs(lu_det(A)) <= 1e-15
    B = _rand(rng, 5, 3, 3)
    np.testing.assert_allclose(lu_det(B), [cofactor_det(b) for b in B], rtol=1e-10)


def test_lu_det_multiplicative(rng):
    for _ in range(20):
        A, B = _rand(rng, 4, 4), _rand(rng, 4, 4)
        ab = lu_det(A @ B)
        assert abs(ab - lu_det(A) * lu_det(B)) <= 1e-8 * abs(ab)


def test_hermitian_eig_small_cases():
    w, _ = hermitian_eig(np.diag([1.0, 2.0]))
    np.testing.assert_allclose(w, [1, 2])
    w, _ = hermitian_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(w, [-1, 1], atol=1e-14)


def test_hermitian_eig_reconstruction(rng):
    X = _rand(rng, 5, 5)
    A = X + X.conj().T
    w, Q = hermitian_eig(A)
    assert np.all(np.diff(w) >= 0)
    assert np.linalg.norm(Q @ np.diag(w) @ Q.conj().T - A) <= 1e-9 * (1 + np.linalg.norm(A))
    np.testing.assert_allclose(Q.conj().T @ Q, np.eye(5), atol=1e-12)
    assert abs(w.sum() - np.trace(A).real) <= 1e-10 * (1 + abs(np.trace(A)))


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_svd_rank_basic():
    r = svd_rank(np.diag([3.0, 0.0]))
    np.testing.assert_allclose(r.singular_values, [3, 0])
    assert r.rank == 1
    assert svd_rank(np.eye(4)).rank == 4


def test_svd_rank_outer_product(rng):
    x, y = _rand(rng, 4), _rand(rng, 4)
    A = np.outer(x, y.conj())
    # Gram determinant of the columns vanishes for rank one
    G = A.conj().T @ A
    assert abs(cofactor_det(G[:2, :2])) <= 1e-10 * np.linalg.norm(G) ** 2
    assert svd_rank(A).rank == 1


def test_svd_unitary_singular_values(rng):
    Q, _ = np.linalg.qr(_rand(rng, 6, 6))
    np.testing.assert_allclose(svd_rank(Q).singular_values, 1.0, atol=1e-10)


def test_jacobi_svd_factorization(rng):
    A = _rand(rng, 5, 3)
    U, s, V = jacobi_svd(A)
    np.testing.assert_allclose(A @ V, U * s, atol=1e-12)
    np.testing.assert_allclose(s, np.linalg.svd(A, compute_uv=False), rtol=1e-12)


def test_norm_inequalities(rng):
    for n in (2, 4, 7):
        A = _rand(rng, n, n)
        s2 = spectral_norm(A)
        fro = np.linalg.norm(A)
        assert s2 <= fro * (1 + 1e-12)
        assert fro <= np.sqrt(n) * s2 * (1 + 1e-12)


def test_null_space(rng):
    A = np.outer(_rand(rng, 3), _rand(rng, 3))
    Z = null_space(A, 1)
    assert Z.shape == (3, 2)
    assert np.linalg.norm(A @ Z) <= 1e-12 * np.linalg.norm(A)
