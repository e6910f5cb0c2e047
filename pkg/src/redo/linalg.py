"""Dense complex matrix helpers and reference matrix-exponential routines.

Operators are plain numpy arrays of complex128 in C (row-major) order,
shape (d, d); the same layout is shared by every routine in this package
so that timing comparisons between methods are layout-fair.

Three exponential routines with genuinely different algorithms are kept
side by side so they can cross-check each other:

* :func:`expm_pade`   -- degree-13 diagonal Pade approximant with scaling
  and squaring (delegated to ``scipy.linalg.expm``, which scales so the
  reduced norm stays below ~5.4),
* :func:`expm_herm`   -- Hermitian eigendecomposition, exact up to the
  eigensolver,
* :func:`expm_taylor` -- plain truncated series, plus an adaptive
  scaled-and-squared variant usable at large norms.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg


def as_matrix(a) -> np.ndarray:
    """Coerce to a square complex128 matrix, rejecting anything else."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def matmul(a, b) -> np.ndarray:
    """Matrix product of two equal-dimension square matrices."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b


def adjoint(a) -> np.ndarray:
    """Conjugate transpose."""
    return as_matrix(a).conj().T


def trace(a) -> complex:
    return complex(np.trace(as_matrix(a)))


def kron(a, b) -> np.ndarray:
    """Kronecker product; result dimension is the product of the inputs'."""
    return np.kron(as_matrix(a), as_matrix(b))


def frob_dist(a, b) -> float:
    """Frobenius distance ||a - b||_F."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def hermitian_defect(a) -> float:
    """Largest entrywise deviation max |A - A^dagger|."""
    a = as_matrix(a)
    return float(np.max(np.abs(a - a.conj().T)))


def require_hermitian(a, atol: float = 1e-12) -> np.ndarray:
    """Return ``a`` symmetrized, rejecting it if visibly non-Hermitian.

    The tolerance is absolute for O(1) entries and relative for larger
    ones: ``atol * max(1, max|a|)``.
    """
    a = as_matrix(a)
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
    if hermitian_defect(a) > atol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    return (a + a.conj().T) / 2


def unitarity_defect(u) -> float:
    """||U^dagger U - I||_F, zero for an exactly unitary U."""
    u = as_matrix(u)
    d = u.shape[0]
    return float(np.linalg.norm(u.conj().T @ u - np.eye(d)))


def expm_pade(a) -> np.ndarray:
    """Matrix exponential by diagonal Pade approximant with scaling/squaring."""
    a = as_matrix(a)
    if not np.all(np.isfinite(a.view(np.float64))):
        raise ValueError("non-finite entries")
    return np.ascontiguousarray(scipy.linalg.expm(a))


def expm_herm(minus_i_times_h, atol: float = 1e-10) -> np.ndarray:
    """exp(-iH) for Hermitian H, given -iH, via eigendecomposition.

    The input must be skew-Hermitian (i.e. iA Hermitian) within ``atol``
    relative to its largest entry; the result is unitary up to the
    eigensolver's accuracy.
    """
    a = as_matrix(minus_i_times_h)
    h = 1j * a
    scale = max(1.0, float(np.max(np.abs(h))) if h.size else 1.0)
    if hermitian_defect(h) > atol * scale:
        raise ValueError("input is not -i times a Hermitian matrix")
    h = (h + h.conj().T) / 2
    w, p = np.linalg.eigh(h)
    return (p * np.exp(-1j * w)) @ p.conj().T


def expm_taylor(a, terms: int) -> np.ndarray:
    """Truncated series sum_{k<terms} A^k / k!.

    Accuracy is entirely the caller's concern; see
    :func:`expm_taylor_adaptive` for a variant that is safe at large
    norms.
    """
    a = as_matrix(a)
    if terms < 1:
        raise ValueError("terms must be >= 1")
    d = a.shape[0]
    total = np.eye(d, dtype=np.complex128)
    term = np.eye(d, dtype=np.complex128)
    for k in range(1, terms):
        term = term @ a / k
        total = total + term
    return total


def expm_taylor_adaptive(a, tol: float = 1e-12, return_info: bool = False):
    """Taylor exponential with scaling and squaring and an adaptive term count.

    A raw truncated series loses ~exp(||A||) * eps to cancellation, so the
    input is halved ``s`` times until its 1-norm is <= 1, summed until the
    next term falls below ``tol``, then squared back ``s`` times.  With
    ``return_info=True`` the tuple ``(E, squarings, terms)`` is returned
    instead of just ``E``.
    """
    a = as_matrix(a)
    d = a.shape[0]
    norm = float(np.linalg.norm(a, 1))
    squarings = 0
    if norm > 1.0:
        squarings = int(np.ceil(np.log2(norm)))
    b = a / (2.0 ** squarings)
    total = np.eye(d, dtype=np.complex128)
    term = np.eye(d, dtype=np.complex128)
    terms = 1
    for k in range(1, 60):
        term = term @ b / k
        total = total + term
        terms += 1
        if np.linalg.norm(term, 1) <= tol:
            break
    for _ in range(squarings):
        total = total @ total
    if return_info:
        return total, squarings, terms
    return total


def gate_fidelity(u, u_target) -> float:
    """Phase-invariant gate overlap |Tr(Uf^dag U) / Tr(Uf^dag Uf)|^2."""
    u = as_matrix(u)
    uf = as_matrix(u_target)
    if u.shape != uf.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {uf.shape}")
    denom = np.trace(uf.conj().T @ uf)
    if abs(denom) == 0.0:
        raise ValueError("target matrix is zero")
    return float(abs(np.trace(uf.conj().T @ u) / denom) ** 2)


def state_fidelity(psi, psi_target, atol: float = 1e-10) -> float:
    """Squared inner product of two unit-normalized state vectors."""
    v = np.asarray(psi, dtype=np.complex128).ravel()
    w = np.asarray(psi_target, dtype=np.complex128).ravel()
    if v.shape != w.shape:
        raise ValueError(f"dimension mismatch: {v.shape} vs {w.shape}")
    for x in (v, w):
        if abs(np.linalg.norm(x) - 1.0) > atol:
            raise ValueError("state vector is not unit-normalized")
    return float(abs(np.vdot(w, v)) ** 2)
