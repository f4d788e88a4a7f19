"""Complex matrix decompositions used by the Morse normal-form reduction.

Takagi factorization writes a complex symmetric ``Q`` as ``U diag(d) U^T``
with ``U`` unitary and ``d >= 0``; Levi normalization finds ``C`` with
``C^H H C = I`` for a positive definite Hermitian ``H``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NotStrictlyPSHError

SYMMETRY_TOL = 1e-12
PD_THRESHOLD = 1e-12


def _square(M, name):
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"{name} must be a square matrix, got shape {M.shape}")
    return M


def _scale(M):
    return max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0


def as_symmetric(Q):
    """Validate ``Q = Q^T`` entrywise and return it as a complex array."""
    Q = _square(Q, "Q")
    err = float(np.max(np.abs(Q - Q.T))) if Q.size else 0.0
    if err > SYMMETRY_TOL * _scale(Q):
        raise DomainError(f"matrix is not complex symmetric (max |Q - Q^T| = {err:.3e})")
    return Q


def as_hermitian(H):
    H = _square(H, "H")
    err = float(np.max(np.abs(H - H.conj().T))) if H.size else 0.0
    if err > SYMMETRY_TOL * _scale(H):
        raise DomainError(f"matrix is not Hermitian (max |H - H^H| = {err:.3e})")
    return H


@dataclass(frozen=True)
class TakagiFactorization:
    U: np.ndarray
    d: np.ndarray

    def reconstruct(self):
        return (self.U * self.d) @ self.U.T


@dataclass(frozen=True)
class LeviNormalization:
    C: np.ndarray


def takagi_factorize(Q):
    """Takagi factorization ``Q = U diag(d) U^T``, ``d`` descending.

    Works through the real symmetric embedding

        K = [[Re Q,  Im Q],
             [Im Q, -Re Q]]

    whose spectrum is ``{+d_j, -d_j}``: an eigenvector ``(x, y)`` for ``+d_j``
    gives a Takagi vector ``u = x + i y`` with ``Q conj(u) = d_j u``.
    Eigenvectors of distinct nonnegative eigenvalues are automatically
    orthonormal as complex vectors; the kernel (a complex subspace) is
    re-orthonormalized over C.
    """
    Q = as_symmetric(Q)
    n = Q.shape[0]
    if n == 0:
        return TakagiFactorization(np.zeros((0, 0), complex), np.zeros(0))

    A, B = Q.real, Q.imag
    K = np.block([[A, B], [B, -A]])
    evals, evecs = np.linalg.eigh(K)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]

    tol = 2 * n * np.finfo(float).eps * max(float(np.abs(evals).max()), 1e-300)
    d = np.clip(evals[:n], 0.0, None)
    positive = int(np.count_nonzero(evals[:n] > tol))

    if positive == 0:
        return TakagiFactorization(np.eye(n, dtype=complex), np.zeros(n))

    U = np.empty((n, n), dtype=complex)
    U[:, :positive] = evecs[:n, :positive] + 1j * evecs[n:, :positive]
    if positive < n:
        # Kernel of K is J-invariant (J = multiplication by i); pick an
        # orthonormal complex basis of its complex span.
        near_zero = np.abs(evals) <= tol
        kernel = evecs[:n, near_zero] + 1j * evecs[n:, near_zero]
        W, _, _ = np.linalg.svd(kernel, full_matrices=False)
        basis = W[:, : n - positive]
        if positive:
            head = U[:, :positive]
            basis = basis - head @ (head.conj().T @ basis)
            basis, _ = np.linalg.qr(basis)
        U[:, positive:] = basis
        d[positive:] = np.where(d[positive:] > tol, d[positive:], 0.0)
    return TakagiFactorization(U, d)


def levi_normalize(H):
    """Return ``C`` with ``C^H H C = I`` (Cholesky: ``C = L^{-H}``)."""
    H = as_hermitian(H)
    n = H.shape[0]
    if n == 0:
        return LeviNormalization(np.zeros((0, 0), complex))
    lam_min = float(np.linalg.eigvalsh(H)[0])
    if lam_min <= PD_THRESHOLD:
        raise NotStrictlyPSHError(lam_min)
    H = 0.5 * (H + H.conj().T)
    L = np.linalg.cholesky(H)
    C = np.linalg.solve(L.conj().T, np.eye(n, dtype=complex))
    return LeviNormalization(C)


def transform_quadratic(Q, C):
    """Holomorphic quadratic form after the substitution ``z = C z'``: ``C^T Q C``."""
    Q = as_symmetric(Q)
    C = np.asarray(C, dtype=complex)
    if C.ndim != 2 or C.shape[0] != Q.shape[0]:
        raise DomainError(f"dimension mismatch: Q is {Q.shape}, C is {C.shape}")
    out = C.T @ Q @ C
    return 0.5 * (out + out.T)


def transform_hermitian(H, C):
    """Hermitian form after ``z = C z'``: ``C^H H C``."""
    H = as_hermitian(H)
    C = np.asarray(C, dtype=complex)
    if C.ndim != 2 or C.shape[0] != H.shape[0]:
        raise DomainError(f"dimension mismatch: H is {H.shape}, C is {C.shape}")
    out = C.conj().T @ H @ C
    return 0.5 * (out + out.conj().T)
