import numpy as np
import pytest

from oracles import family, random_family
from polystab.core import evaluate_coeffs
from polystab.jordan import (
    UNDETERMINED,
    JordanChainError,
    PartitionError,
    RankInconsistencyError,
    RankSequence,
    chain_relation_residuals,
    contour_moments,
    jordan_chains,
    jordan_pair,
    matrix_signature,
    partition_from_ranks,
    rank_sequence,
    stable_defect,
    stratify,
)
from polystab.spectral import companion_matrix, spectrum_at


def _jordan_matrix(blocks):
    N = sum(k for _, k in blocks)
    J = np.zeros((N, N), dtype=complex)
    p = 0
    for lam, k in blocks:
        J[p:p + k, p:p + k] = lam * np.eye(k) + np.eye(k, k=1)
        p += k
    return J


def test_rank_sequence_examples():
    assert rank_sequence(np.array([[0.0, 1.0], [0.0, 0.0]]), 0.0, 2).ranks == (1, 0)
    assert rank_sequence(np.zeros((2, 2)), 0.0, 2).ranks == (0,)
    rng = np.random.default_rng(0)
    S = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    C = S @ _jordan_matrix([(3.0, 2), (3.0, 1)]) @ np.linalg.inv(S)
    rs = rank_sequence(C, 3.0, 3)
    assert rs.ranks == (1, 0)
    assert partition_from_ranks(rs) == (2, 1)


def test_rank_sequence_inconsistent():
    with pytest.raises(RankInconsistencyError):
        rank_sequence(np.diag([0.0, 1.0]), 0.0, 2)


def test_partition_examples():
    assert partition_from_ranks(RankSequence(0j, (3, 2, 1, 0), 4, 4)) == (4,)
    assert partition_from_ranks(RankSequence(0j, (2, 0), 4, 4)) == (2, 2)
    assert partition_from_ranks(RankSequence(0j, (0,), 3, 3)) == (1, 1, 1)
    with pytest.raises(PartitionError):
        partition_from_ranks(RankSequence(0j, (3, 1, 0), 4, 4))


def test_stable_defect_counts_cluster():
    C = _jordan_matrix([(1.0, 3), (2.0, 1)])
    assert stable_defect(C, 1.0)[0] == 3
    assert stable_defect(C, 2.0)[0] == 1
    assert stable_defect(C, 5.0)[0] == 0


def test_contour_moments():
    C = np.diag([1.0, 1.001, 3.0]).astype(complex)
    count, mean = contour_moments(C, 1.0, 0.5)
    assert count == pytest.approx(2.0, abs=1e-10)
    assert mean == pytest.approx(1.0005, abs=1e-12)


def test_chains_examples():
    J = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    Phi, lengths = jordan_chains(J, 0.0, (2,))
    assert lengths == [2]
    np.testing.assert_allclose(J @ Phi[:, 0], 0, atol=1e-12)
    np.testing.assert_allclose(J @ Phi[:, 1], Phi[:, 0], atol=1e-12)
    Phi, lengths = jordan_chains(np.eye(2, dtype=complex), 1.0, (1, 1))
    assert lengths == [1, 1] and np.linalg.matrix_rank(Phi) == 2


def test_chains_reject_wrong_partition():
    with pytest.raises(JordanChainError, match="dependent"):
        jordan_chains(np.eye(2, dtype=complex), 1.0, (2,))


def test_signature_similar_matrices():
    rng = np.random.default_rng(11)
    J = _jordan_matrix([(1.0, 2), (1.0, 1), (-0.5 + 1j, 3)])
    S = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    sig = matrix_signature(S @ J @ np.linalg.inv(S))
    parts = {round(lam.real, 6) + 1j * round(lam.imag, 6): p for lam, p in sig.blocks}
    assert parts == {1 + 0j: (2, 1), -0.5 + 1j: (3,)}
    assert sig.confident
    assert sig.key() == "(3) (2,1)"


def test_jordan_pair_scalar_double_root(sqrt_family):
    jp = jordan_pair(sqrt_family, [0.0])
    assert jp.signature.key() == "(2)"
    np.testing.assert_allclose(jp.J, [[0, 1], [0, 0]], atol=1e-12)
    assert jp.X.shape == (2, 2)
    assert jp.residual <= 1e-6


def test_jordan_pair_identity_relation(rng):
    f = random_family(rng, 2, 2, 2)
    u = rng.uniform(-1, 1, 2)
    jp = jordan_pair(f, u)
    C = companion_matrix(evaluate_coeffs(f, u))
    # C Phi = Phi J for the full chain matrix
    np.testing.assert_allclose(C @ jp.chains, jp.chains @ jp.J, atol=1e-6 * (1 + np.linalg.norm(C, 2)))
    # top block: X J^k stacked gives Phi
    X = jp.X
    stack = np.vstack([X @ np.linalg.matrix_power(jp.J, k) for k in range(f.d)])
    np.testing.assert_allclose(stack, jp.chains, atol=1e-8)
    assert jp.signature.size == f.n * f.d
    # distinct eigenvalues agree with the spectrum
    s = spectrum_at(f, u)
    assert sorted(m for _, m in s.eigenvalues) == sorted(sum(p) for _, p in jp.signature.blocks)


def test_chain_relation_residuals_exact():
    # P(lam) = lam^2: chain x0 = 1, x1 = 0 at lam0 = 0
    coeffs = np.array([[[0.0]], [[0.0]], [[1.0]]], dtype=complex)
    X = np.array([[1.0, 0.0]], dtype=complex)
    np.testing.assert_allclose(chain_relation_residuals(coeffs, 0.0, X, [2]), 0.0)


def test_stratify_constant_family():
    f = family([[["-1", "0"], ["0", "-2"]], [["1", "0"], ["0", "1"]]], 1)
    sm = stratify(f, [np.linspace(-1, 1, 11)])
    assert sm.classes == ["(1) (1)"]
    assert np.all(sm.regions == 1)


def test_stratify_triangular_diagonal():
    # lam I - [[t1, 1], [0, t2]]: a 2-block exactly on t1 = t2
    f = family([[["-t1", "-1"], ["0", "-t2"]], [["1", "0"], ["0", "1"]]], 2)
    ax = np.linspace(-1, 1, 21)
    sm = stratify(f, [ax, ax])
    assert set(sm.classes) == {"(1) (1)", "(2)"}
    diag = np.eye(21, dtype=bool)
    assert np.all((sm.keys == "(2)") == diag)


def test_stratify_sqrt_segment():
    f = family([[["0", "-1"], ["-t1", "0"]], [["1", "0"], ["0", "1"]]], 1)
    ax = np.linspace(-1, 1, 201)
    sm = stratify(f, [ax])
    assert sm.classes == ["(1) (1)", "(2)"]
    where = np.flatnonzero(sm.keys == "(2)")
    assert where.size >= 1 and np.all(np.abs(where - 100) <= 2)
    assert np.all((sm.keys == "(1) (1)") | (sm.keys == "(2)") | (sm.keys == UNDETERMINED))


def test_stratify_validation(linear):
    with pytest.raises(ValueError):
        stratify(linear, [])
    with pytest.raises(ValueError):
        stratify(linear, [np.zeros(3)], dims=[1])
