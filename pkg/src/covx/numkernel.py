"""Dense complex linear algebra with tolerance-aware rank decisions.

Matrices are plain ``numpy`` complex arrays. Nothing here mutates its
arguments; every function returns a fresh array.

Conventions
-----------
* Tensor factors are ordered as declared (``dims[0]`` is the slowest index).
* ``op_to_vec`` is the row-major flattening, which equals ``(X (x) I)|I>``
  with ``|I> = sum_l |l>|l>`` in the computational basis.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .config import DEFAULT_TOL
from .errors import ContractViolation, DimensionError


def as_matrix(M) -> np.ndarray:
    A = np.array(M, dtype=complex)
    if A.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {A.shape}")
    return A


def _check_shape(n: int, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d <= 0 for d in dims):
        raise DimensionError(f"factor dimensions must be positive, got {dims}")
    if int(np.prod(dims)) != n:
        raise DimensionError(f"factor dims {dims} do not multiply to {n}")
    return dims


def dagger(M) -> np.ndarray:
    return np.conj(np.asarray(M)).T


def hs_inner(X, Y) -> complex:
    """Hilbert-Schmidt inner product Tr[X^dagger Y]."""
    return complex(np.vdot(np.asarray(X), np.asarray(Y)))


def _scale(M) -> float:
    return max(1.0, float(np.linalg.norm(M, 2))) if M.size else 1.0


def is_hermitian(M, tol: float = DEFAULT_TOL) -> bool:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    return float(np.linalg.norm(M - dagger(M))) <= tol * _scale(M)


def is_psd(M, tol: float = DEFAULT_TOL) -> bool:
    M = np.asarray(M)
    if not is_hermitian(M, tol):
        return False
    lam = np.linalg.eigvalsh(0.5 * (M + dagger(M)))
    return bool(lam[0] >= -tol * _scale(M)) if lam.size else True


def is_unitary(M, tol: float = DEFAULT_TOL) -> bool:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    return float(np.linalg.norm(dagger(M) @ M - np.eye(M.shape[0]))) <= tol * max(1, M.shape[0])


def partial_trace(M, dims: Sequence[int], traced: Iterable[int]) -> np.ndarray:
    """Trace out the factors listed in ``traced`` from a square operator on
    ``dims[0] (x) dims[1] (x) ...``; the kept factors retain their order."""
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"partial trace needs a square matrix, got {M.shape}")
    dims = _check_shape(M.shape[0], dims)
    traced = sorted(set(int(t) for t in traced))
    if any(t < 0 or t >= len(dims) for t in traced):
        raise DimensionError(f"traced factors {traced} out of range for {len(dims)} factors")
    n = len(dims)
    T = M.reshape(dims + dims)
    for t in reversed(traced):
        T = np.trace(T, axis1=t, axis2=t + n)
        n -= 1
    kept = [d for i, d in enumerate(dims) if i not in traced]
    k = int(np.prod(kept)) if kept else 1
    return np.asarray(T).reshape(k, k)


def op_to_vec(X) -> np.ndarray:
    """|X> = (X (x) I)|I>; a linear isometry for the Hilbert-Schmidt product."""
    return as_matrix(X).reshape(-1)


def vec_to_op(v, dims: Sequence[int]) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    rows, cols = (int(d) for d in dims)
    if rows * cols != v.size:
        raise DimensionError(f"vector of length {v.size} cannot be shaped {rows}x{cols}")
    return v.reshape(rows, cols).copy()


def singular_values(ops: Sequence) -> np.ndarray:
    """Singular values of the matrix whose columns are the vectorized ops."""
    if len(ops) == 0:
        return np.zeros(0)
    shapes = {np.shape(o) for o in ops}
    if len(shapes) != 1:
        raise DimensionError(f"all operators must share a shape, got {sorted(shapes)}")
    A = np.stack([op_to_vec(o) for o in ops], axis=1)
    return np.linalg.svd(A, compute_uv=False)


def numerical_rank(sv: np.ndarray, tol: float = DEFAULT_TOL) -> int:
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.count_nonzero(sv > tol * sv[0]))


def rank_gap(sv: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """(smallest kept, largest dropped) singular values relative to the largest.

    A wide gap means the rank decision is crisp; values near ``tol`` on both
    sides mean the verdict is marginal.
    """
    if sv.size == 0 or sv[0] == 0:
        return 0.0, 0.0
    rel = sv / sv[0]
    r = numerical_rank(sv, tol)
    kept = float(rel[r - 1]) if r else 0.0
    dropped = float(rel[r]) if r < rel.size else 0.0
    return kept, dropped


def span_dimension(ops: Sequence, tol: float = DEFAULT_TOL) -> int:
    """Dimension of the complex linear span of equally-shaped matrices."""
    return numerical_rank(singular_values(ops), tol)


def hermitian_eig(M, tol: float = DEFAULT_TOL):
    """Eigenvalues (ascending) and unitary eigenvector columns of a Hermitian matrix."""
    M = as_matrix(M)
    if not is_hermitian(M, tol=max(tol, 1e-12)):
        raise ContractViolation("hermitian_eig requires a Hermitian matrix")
    return np.linalg.eigh(0.5 * (M + dagger(M)))


def svd(M):
    return np.linalg.svd(as_matrix(M))


def psd_factor(M, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Return X with M = X^dagger X and as many rows as the numerical rank.

    Eigenvalues at or below ``tol * lambda_max`` are discarded, so the rows
    of X span the (conjugated) support of M.
    """
    M = as_matrix(M)
    lam, V = hermitian_eig(M, tol)
    top = lam[-1] if lam.size else 0.0
    if lam.size and lam[0] < -max(tol, 1e-12) * max(abs(top), 1.0) * 10:
        raise ContractViolation(f"psd_factor requires a PSD matrix (min eigenvalue {lam[0]:.3e})")
    if top <= 0:
        return np.zeros((0, M.shape[0]), dtype=complex)
    keep = lam > tol * top
    return np.sqrt(lam[keep])[::-1, None] * dagger(V[:, keep][:, ::-1])


def psd_rank(M, tol: float = DEFAULT_TOL) -> int:
    lam = np.linalg.eigvalsh(0.5 * (as_matrix(M) + dagger(as_matrix(M))))
    if lam.size == 0 or lam[-1] <= 0:
        return 0
    return int(np.count_nonzero(lam > tol * lam[-1]))


def hermitian_basis(n: int) -> list[np.ndarray]:
    """Orthonormal (Hilbert-Schmidt) basis of n x n Hermitian matrices."""
    basis = []
    for i in range(n):
        E = np.zeros((n, n), dtype=complex)
        E[i, i] = 1.0
        basis.append(E)
    s = 1 / np.sqrt(2)
    for i in range(n):
        for j in range(i + 1, n):
            E = np.zeros((n, n), dtype=complex)
            E[i, j] = E[j, i] = s
            basis.append(E)
            F = np.zeros((n, n), dtype=complex)
            F[i, j], F[j, i] = -1j * s, 1j * s
            basis.append(F)
    return basis


@lru_cache(maxsize=64)
def _triu(n: int):
    iu = np.triu_indices(n, 1)
    return iu, (iu[1], iu[0])


def herm_to_real(H) -> np.ndarray:
    """Coordinates of a Hermitian matrix in ``hermitian_basis``."""
    H = np.asarray(H)
    n = H.shape[0]
    upper = H[_triu(n)[0]]
    out = np.empty(n * n)
    out[:n] = np.real(np.diag(H))
    s = np.sqrt(2)
    out[n::2] = s * upper.real
    out[n + 1::2] = -s * upper.imag
    return out


def real_to_herm(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    H = np.zeros((n, n), dtype=complex)
    H[np.diag_indices(n)] = x[:n]
    iu, il = _triu(n)
    vals = (x[n::2] - 1j * x[n + 1::2]) / np.sqrt(2)
    H[iu] = vals
    H[il] = np.conj(vals)
    return H


def real_nullspace(A: np.ndarray, tol: float = DEFAULT_TOL):
    """Right null space of a real matrix plus its singular values."""
    if A.size == 0:
        return np.eye(A.shape[1]), np.zeros(0)
    _, s, Vt = np.linalg.svd(A)
    r = numerical_rank(s, tol)
    return Vt[r:].T, s
