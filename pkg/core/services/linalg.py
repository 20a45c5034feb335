"""
Complex-to-real transforms and the real QR kernel.

Everything downstream works on the real-valued model: complex vectors are
interleaved as Re, Im, Re, Im, ... and complex matrices are expanded entry by
entry into 2x2 rotation-scaling blocks. Internally indices are 0-based.
"""
import logging

import numpy as np

from core.exceptions import DimensionMismatch, NonFiniteInput, RankDeficient

logger = logging.getLogger(__name__)

# ||r_i|| <= RANK_TOLERANCE * ||h_i|| means column i adds no new direction
RANK_TOLERANCE = 1e-12

_REAL_BLOCK = np.eye(2)
_IMAG_BLOCK = np.array([[0.0, -1.0], [1.0, 0.0]])


def _require_finite(x):
    arr = np.asarray(x)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput("Input contains NaN or infinite entries")
    return arr


def tilde_vec(x):
    """
    Real view of a complex scalar or vector: [Re, Im] per entry, interleaved.

    Args:
        x: complex scalar or 1-d array

    Returns:
        numpy.ndarray: real vector of length 2 * len(x)
    """
    arr = np.atleast_1d(_require_finite(x)).astype(complex).ravel()
    return np.column_stack([arr.real, arr.imag]).ravel()


def barbar(x):
    """[-Im, Re] per entry, i.e. ``tilde_vec(1j * x)``."""
    arr = np.atleast_1d(_require_finite(x)).astype(complex).ravel()
    return np.column_stack([-arr.imag, arr.real]).ravel()


def check_realify(A):
    """
    Replace every complex entry x of A by [[Re x, -Im x], [Im x, Re x]].

    The map is a ring homomorphism: check(A @ B) == check(A) @ check(B).
    """
    arr = np.atleast_2d(_require_finite(A)).astype(complex)
    return np.kron(arr.real, _REAL_BLOCK) + np.kron(arr.imag, _IMAG_BLOCK)


def trace_form(x):
    """Trace of x over Q(i)/Q, which is 2 Re(x). Works elementwise on arrays."""
    arr = _require_finite(x)
    result = 2.0 * np.real(arr)
    return float(result) if np.ndim(result) == 0 else result


def vec(A):
    """Column-major vectorisation."""
    return np.asarray(A).ravel(order='F')


def gram_schmidt_qr(H):
    """
    Thin QR of a real tall matrix by modified Gram-Schmidt.

    R carries ||r_i|| on its diagonal, so it is strictly positive and the
    factorisation is unique.

    Args:
        H: real m x n matrix with m >= n

    Returns:
        tuple: (Q, R) with Q m x n orthonormal columns and R n x n upper
        triangular

    Raises:
        RankDeficient: when some residual column vanishes
    """
    H = np.asarray(_require_finite(H), dtype=float)
    m, n = H.shape
    if m < n:
        raise DimensionMismatch(f"QR needs a tall matrix, got {m}x{n}")

    Q = H.copy()
    R = np.zeros((n, n))
    column_norms = np.linalg.norm(H, axis=0)
    for j in range(n):
        v = Q[:, j]
        norm = np.linalg.norm(v)
        if norm <= RANK_TOLERANCE * column_norms[j]:
            raise RankDeficient(j, norm, column_norms[j])
        q = v / norm
        Q[:, j] = q
        R[j, j] = norm
        for k in range(j + 1, n):
            r = q @ Q[:, k]
            R[j, k] = r
            Q[:, k] -= r * q
    return Q, R


def numerical_rank(G, tol=1e-10):
    """
    Column rank by Gram-Schmidt: a column counts when its residual after
    projecting out the accepted columns exceeds ``tol`` relative to its norm.
    """
    G = np.asarray(_require_finite(G), dtype=float)
    basis = []
    for j in range(G.shape[1]):
        h = G[:, j]
        reference = np.linalg.norm(h)
        if reference == 0.0:
            continue
        v = h.copy()
        for q in basis:
            v -= (q @ v) * q
        norm = np.linalg.norm(v)
        if norm > tol * reference:
            basis.append(v / norm)
    return len(basis)


def gram_matrix_M(H):
    """
    M = check(H)^t check(H) for a complex channel H (nr x nt).

    Built as check(H^H H) from the Hermitian-symmetrised Gram matrix so the
    structural relations hold exactly: M[2i,2i+1] == 0,
    M[2i,2i] == M[2i+1,2i+1], M[2i,2j] == M[2i+1,2j+1] and
    M[2i+1,2j] == -M[2i,2j+1] (0-based).
    """
    H = np.atleast_2d(_require_finite(H)).astype(complex)
    K = H.conj().T @ H
    K = 0.5 * (K + K.conj().T)
    K[np.diag_indices_from(K)] = K.diagonal().real
    return check_realify(K)
