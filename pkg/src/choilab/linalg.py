"""Dense complex linear algebra with declared tolerances.

Matrices are plain ``numpy`` ``complex128`` arrays in row-major (C) order.
Spectra are always returned in descending order with a canonical phase on
every eigen/singular vector so that repeated runs give identical output.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import DimensionOverflow, NotHermitian, NumericalFailure, ShapeMismatch

HERM_TOL = 1e-9
KRON_CAP = 4096


class HermEig(NamedTuple):
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # columns, unitary


class SVDResult(NamedTuple):
    singular_values: np.ndarray  # descending, >= 0
    left: np.ndarray  # U, columns
    right: np.ndarray  # W, columns; A = U diag(s) W*


def as_cmatrix(a, *, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex128 array."""
    arr = np.array(a, dtype=np.complex128, order="C")
    if arr.ndim != 2 or 0 in arr.shape:
        raise ShapeMismatch(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def opnorm(a: np.ndarray) -> float:
    """Spectral norm; 0 for the zero matrix."""
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def hermiticity_defect(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - a.conj().T))


def check_hermitian(a: np.ndarray, tol: float = HERM_TOL) -> np.ndarray:
    """Return the Hermitian part of ``a`` after verifying ``||a - a*|| <= tol ||a||`` (Frobenius)."""
    a = as_cmatrix(a)
    if a.shape[0] != a.shape[1]:
        raise NotHermitian(f"matrix is not square: {a.shape}")
    scale = float(np.linalg.norm(a))
    if hermiticity_defect(a) > tol * max(scale, 1e-300):
        raise NotHermitian(f"||A - A*|| = {hermiticity_defect(a):.3e} exceeds {tol:g} * ||A||")
    return (a + a.conj().T) / 2


def _canonical_phase(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column so its first entry of non-negligible modulus is real positive."""
    vecs = vecs.copy()
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        mags = np.abs(col)
        if mags.max() == 0:
            continue
        idx = int(np.argmax(mags > 1e-12 * mags.max()))
        vecs[:, j] = col * (abs(col[idx]) / col[idx])
    return vecs


def _sort_key(vec: np.ndarray) -> tuple:
    mags = np.abs(vec)
    idx = int(np.argmax(mags > 1e-12 * max(mags.max(), 1e-300)))
    return (idx, -round(float(mags[idx]), 12))


def _canonical_order(values: np.ndarray, vecs: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(-values, kind="stable")
    values, vecs = values[order], _canonical_phase(vecs[:, order])
    # within numerically tied clusters, order by the leading entries of the vectors
    scale = max(float(np.max(np.abs(values))) if values.size else 0.0, 1.0)
    start = 0
    perm = list(range(len(values)))
    while start < len(values):
        stop = start + 1
        while stop < len(values) and values[start] - values[stop] <= tol * scale:
            stop += 1
        if stop - start > 1:
            block = sorted(range(start, stop), key=lambda j: _sort_key(vecs[:, j]))
            perm[start:stop] = block
        start = stop
    return values[perm], vecs[:, perm]


def herm_eig(a, tol: float = HERM_TOL) -> HermEig:
    """Full spectral decomposition of a Hermitian matrix, eigenvalues descending.

    Raises:
        NotHermitian: if ``||A - A*|| > tol * ||A||``.
        NumericalFailure: if LAPACK does not converge.
    """
    h = check_hermitian(a, tol)
    try:
        w, v = scipy.linalg.eigh(h)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NumericalFailure(f"eigensolver failed: {exc}") from exc
    w, v = _canonical_order(w, v, 1e-12)
    return HermEig(w, v)


def eigvalsh_desc(a) -> np.ndarray:
    """Eigenvalues of the Hermitian part of ``a``, descending; no checks."""
    a = np.asarray(a)
    return np.linalg.eigvalsh((a + a.conj().T) / 2)[::-1]


def svd(a) -> SVDResult:
    """Full SVD with singular values descending and canonical vector phases."""
    a = as_cmatrix(a)
    try:
        u, s, wh = scipy.linalg.svd(a, full_matrices=True, lapack_driver="gesdd")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
        try:
            u, s, wh = scipy.linalg.svd(a, full_matrices=True, lapack_driver="gesvd")
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
            raise NumericalFailure(f"SVD failed: {exc}") from exc
    w = wh.conj().T
    # A = sum s_i u_i w_i*: a common phase on (u_i, w_i) leaves A unchanged
    r = len(s)
    for i in range(r):
        col = u[:, i]
        mags = np.abs(col)
        idx = int(np.argmax(mags > 1e-12 * mags.max()))
        c = abs(col[idx]) / col[idx]
        u[:, i] *= c
        w[:, i] *= c
    return SVDResult(s, u, w)


def singular_values(a) -> np.ndarray:
    return np.linalg.svd(np.asarray(a, dtype=np.complex128), compute_uv=False)


def kron(a, b, cap: int = KRON_CAP) -> np.ndarray:
    """Kronecker product with ``(A (x) B)[i*rB + k, j*cB + l] = A[i, j] B[k, l]``.

    Raises:
        DimensionOverflow: if either dimension of the product exceeds ``cap``.
    """
    a, b = np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128)
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if max(rows, cols) > cap:
        raise DimensionOverflow(f"kron result {rows}x{cols} exceeds cap {cap}")
    return np.kron(a, b)


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product ``Tr(A B*) = sum_ij A_ij conj(B_ij)``."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    return complex(np.vdot(b, a))


def hs_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a)))


def is_projection(e, tol: float = 1e-9) -> bool:
    e = np.asarray(e)
    if e.ndim != 2 or e.shape[0] != e.shape[1]:
        return False
    scale = max(1.0, float(np.linalg.norm(e)))
    return (np.linalg.norm(e - e.conj().T) <= tol * scale
            and np.linalg.norm(e @ e - e) <= tol * scale)


def projection_onto(vectors) -> np.ndarray:
    """Orthogonal projection onto the column span of ``vectors``."""
    vectors = np.asarray(vectors, dtype=np.complex128)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    q = scipy.linalg.orth(vectors)
    return q @ q.conj().T


def matrix_unit(i: int, j: int, rows: int, cols: int | None = None) -> np.ndarray:
    e = np.zeros((rows, rows if cols is None else cols), dtype=np.complex128)
    e[i, j] = 1.0
    return e
