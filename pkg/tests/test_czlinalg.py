import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from plateau.czlinalg import (
    levi_normalize,
    takagi_factorize,
    transform_hermitian,
    transform_quadratic,
)
from plateau.errors import DomainError, NotStrictlyPSHError
from oracles import levi_inverse_sqrt, random_psd_hermitian, random_symmetric, random_unitary


def test_takagi_zero():
    tk = takagi_factorize(np.zeros((3, 3)))
    assert_allclose(tk.U, np.eye(3))
    assert_allclose(tk.d, [0, 0, 0])


def test_takagi_diagonal():
    tk = takagi_factorize(np.diag([3.0, 1.0]))
    assert_allclose(tk.d, [3, 1])
    assert_allclose(np.abs(tk.U), np.eye(2), atol=1e-14)
    assert_allclose(tk.reconstruct(), np.diag([3.0, 1.0]), atol=1e-14)


def test_takagi_antidiagonal():
    Q = np.array([[0, 1], [1, 0]], dtype=complex)
    tk = takagi_factorize(Q)
    assert_allclose(tk.d, np.linalg.svd(Q, compute_uv=False), atol=1e-14)
    assert_allclose(tk.reconstruct(), Q, atol=1e-14)


def test_takagi_rejects_nonsymmetric():
    with pytest.raises(DomainError, match="symmetric"):
        takagi_factorize(np.array([[1, 2], [0, 1]]))


def test_takagi_rank_deficient_and_ties():
    rng = np.random.default_rng(4)
    for n in range(2, 7):
        V = random_unitary(rng, n)
        for d in ([1.0] * (n - 1) + [0.0], [2.0, 2.0] + [0.0] * (n - 2), [0.0] * (n - 1) + [5.0]):
            Q = (V * np.array(d)) @ V.T
            tk = takagi_factorize(Q)
            assert_allclose(tk.reconstruct(), Q, atol=1e-12)
            assert_allclose(tk.U.conj().T @ tk.U, np.eye(n), atol=1e-12)
            assert_allclose(tk.d, sorted(d, reverse=True), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 8), seed=st.integers(0, 2**32 - 1), scale=st.floats(1e-6, 1e6))
def test_takagi_property(n, seed, scale):
    Q = random_symmetric(np.random.default_rng(seed), n, scale)
    tk = takagi_factorize(Q)
    tol = 1e-11 * scale
    assert_allclose(tk.reconstruct(), Q, atol=tol)
    assert_allclose(tk.U.conj().T @ tk.U, np.eye(n), atol=1e-11)
    assert np.all(np.diff(tk.d) <= 0) and np.all(tk.d >= 0)
    assert_allclose(tk.d, np.linalg.svd(Q, compute_uv=False), atol=tol)


def test_levi_identity():
    assert_allclose(levi_normalize(np.eye(3)).C, np.eye(3))


def test_levi_diagonal():
    assert_allclose(levi_normalize(np.diag([4.0, 1.0])).C, np.diag([0.5, 1.0]))


def test_levi_random_against_eigen_oracle():
    rng = np.random.default_rng(11)
    for n in range(1, 7):
        H = random_psd_hermitian(rng, n)
        C = levi_normalize(H).C
        assert_allclose(C.conj().T @ H @ C, np.eye(n), atol=1e-12)
        # any two normalizers differ by a unitary: C = H^{-1/2} V
        V = np.linalg.inv(levi_inverse_sqrt(H)) @ C
        assert_allclose(V.conj().T @ V, np.eye(n), atol=1e-12)


def test_levi_rejects_non_psh():
    with pytest.raises(NotStrictlyPSHError, match="not strictly plurisubharmonic") as e:
        levi_normalize(np.diag([1.0, -0.5]))
    assert e.value.min_eigenvalue == pytest.approx(-0.5)
    with pytest.raises(NotStrictlyPSHError):
        levi_normalize(np.diag([1.0, 0.0]))


def test_transform_quadratic_examples():
    Q = np.array([[1, 2j], [2j, 3]])
    assert_allclose(transform_quadratic(Q, np.eye(2)), Q)
    assert_allclose(transform_quadratic(np.diag([1, 0]), np.diag([0.5, 1])), np.diag([0.25, 0]))


def test_transform_random_pair():
    rng = np.random.default_rng(2)
    for n in range(1, 6):
        Q = random_symmetric(rng, n)
        C = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        out = transform_quadratic(Q, C)
        assert_allclose(out, out.T, atol=1e-12)
        assert_allclose(out, C.T @ Q @ C, atol=1e-12)
        H = random_psd_hermitian(rng, n)
        Hn = transform_hermitian(H, C)
        assert_allclose(Hn, C.conj().T @ H @ C, atol=1e-12)


def test_transform_dimension_mismatch():
    with pytest.raises(DomainError, match="dimension"):
        transform_quadratic(np.eye(2), np.eye(3))
