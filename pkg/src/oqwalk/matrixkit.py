"""Dense complex-matrix kernels shared by every other module.

All operators and density matrices are plain ``numpy`` arrays of complex
numbers in row-major order. Functions here are pure: they never mutate
their inputs and are safe to call from multiple threads.
"""

from __future__ import annotations

import numpy as np

# Pauli matrices, used all over the test suite and the channel builders.
I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)

DEFAULT_TOL = 1e-10


def asmatrix(a) -> np.ndarray:
    """Coerce to a 2-D complex ndarray without copying when possible."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def dagger(a) -> np.ndarray:
    """Conjugate transpose."""
    return asmatrix(a).conj().T


def kron(a, b) -> np.ndarray:
    """Kronecker product of two matrices; dimensions multiply."""
    return np.kron(asmatrix(a), asmatrix(b))


def is_hermitian(a, tol: float = 1e-8) -> bool:
    a = asmatrix(a)
    return a.shape[0] == a.shape[1] and np.abs(a - a.conj().T).max() <= tol


def is_unitary(u, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``max |u†u - I|`` is at most ``tol``. Rejects non-square input."""
    u = asmatrix(u)
    n, m = u.shape
    if n != m:
        raise ValueError(f"unitarity is only defined for square matrices, got {u.shape}")
    return np.abs(u.conj().T @ u - np.eye(n)).max() <= tol


def psd_sqrt(a, herm_tol: float = 1e-8, eig_floor: float = -1e-10) -> np.ndarray:
    """Hermitian PSD square root via eigendecomposition.

    Eigenvalues in ``[eig_floor, 0)`` are clamped to zero; anything below
    ``eig_floor`` means the input is not PSD and is rejected. Needed for the
    defect operators sqrt(I - K K†), whose spectra dip slightly below zero
    when ``norm(K)`` is close to 1.
    """
    a = asmatrix(a)
    dev = np.abs(a - a.conj().T).max()
    if dev > herm_tol:
        raise ValueError(f"psd_sqrt requires a Hermitian matrix (deviation {dev:.3e})")
    vals, vecs = np.linalg.eigh((a + a.conj().T) / 2)
    if vals.min() < eig_floor:
        raise ValueError(f"matrix is not PSD: min eigenvalue {vals.min():.3e}")
    root = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T
    return (root + root.conj().T) / 2


def partial_trace(rho, dims, keep) -> np.ndarray:
    """Reduced matrix over the kept tensor factors.

    ``dims`` lists the dimension of each factor (their product must equal
    the matrix dimension); ``keep`` is an iterable of factor indices to
    retain, in their original order. Trace is preserved.
    """
    rho = asmatrix(rho)
    dims = list(dims)
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise ValueError(f"dims {dims} do not match matrix shape {rho.shape}")
    keep = sorted(set(keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {len(dims)} factors")
    traced = [i for i in range(len(dims)) if i not in keep]
    tensor = rho.reshape(dims + dims)
    for i in reversed(traced):
        n = tensor.ndim // 2
        tensor = np.trace(tensor, axis1=i, axis2=i + n)
    kept_dim = int(np.prod([dims[k] for k in keep])) if keep else 1
    return tensor.reshape(kept_dim, kept_dim)


def trace_distance(a, b) -> float:
    """Half the trace norm of (a - b), via eigenvalues of the difference."""
    a, b = asmatrix(a), asmatrix(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    diff = a - b
    if not is_hermitian(diff):
        raise ValueError("trace_distance requires Hermitian operands")
    return 0.5 * float(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2)).sum())


def complete_isometry(v, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Extend an isometry to a square unitary.

    The leading columns of the result are ``v`` itself, copied verbatim.
    The remaining columns come from Gram-Schmidt over the canonical basis
    vectors taken in index order; candidates whose residual drops below
    1e-8 are skipped. The completion is deterministic.
    """
    v = asmatrix(v)
    rows, cols = v.shape
    if cols > rows:
        raise ValueError(f"isometry cannot have more columns ({cols}) than rows ({rows})")
    dev = np.abs(v.conj().T @ v - np.eye(cols)).max()
    if dev > tol:
        raise ValueError(f"columns are not orthonormal: max |v†v - I| = {dev:.3e}")
    u = np.zeros((rows, rows), dtype=complex)
    u[:, :cols] = v
    have = cols
    for k in range(rows):
        if have == rows:
            break
        cand = np.zeros(rows, dtype=complex)
        cand[k] = 1.0
        # two rounds of classical Gram-Schmidt for numerical stability
        for _ in range(2):
            cand = cand - u[:, :have] @ (u[:, :have].conj().T @ cand)
        norm = np.linalg.norm(cand)
        if norm < 1e-8:
            continue
        u[:, have] = cand / norm
        have += 1
    if have != rows:
        raise ValueError("failed to complete isometry to a unitary basis")
    return u


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR of a complex Gaussian matrix.

    The R factor's diagonal phases are normalized away so the output is a
    deterministic function of the generator state.
    """
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix: normalized G G† for complex Gaussian G."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random pure-state vector, uniform on the sphere."""
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


def projector(psi) -> np.ndarray:
    """|psi><psi| for a state vector."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())
