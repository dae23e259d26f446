"""Choi matrices of linear maps ``B(K) -> B(H)`` and the basic map constructors.

Conventions (fixed throughout the package):

* ``C_phi = sum_ij e_ij (x) phi(e_ij)``; the first tensor factor is the input
  space K (dimension ``m``), the second the output space H (dimension ``n``),
  so ``C[i*n + r, j*n + s] = phi(e_ij)[r, s]``.
* A bipartite vector ``psi`` in ``K (x) H`` has coordinate matrix
  ``psi.reshape(m, n)``.
* For ``V: K -> H`` (an ``n x m`` array) the vector ``v = sum V_ij e_j (x) e_i``
  is ``V.T.reshape(-1)`` and ``C_{Ad_V} = v v*``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import linalg
from .errors import NegativeLambda, NonLinearInput, NotHermitian, ShapeMismatch


@dataclass(frozen=True, eq=False)
class LinearMap:
    """A linear map ``B(C^m) -> B(C^n)`` stored as its ``(m n) x (m n)`` Choi matrix."""

    m: int
    n: int
    choi: np.ndarray

    def __post_init__(self):
        choi = linalg.as_cmatrix(self.choi, name="choi")
        size = self.m * self.n
        if self.m < 1 or self.n < 1 or choi.shape != (size, size):
            raise ShapeMismatch(f"choi must be {size}x{size} for m={self.m}, n={self.n}; got {choi.shape}")
        choi.setflags(write=False)
        object.__setattr__(self, "choi", choi)

    def __call__(self, x) -> np.ndarray:
        return apply_map(self, x)

    def blocks(self) -> np.ndarray:
        """The Choi matrix as a 4-index array ``[i, r, j, s] = phi(e_ij)[r, s]``."""
        return self.choi.reshape(self.m, self.n, self.m, self.n)

    def is_hermitian(self, tol: float = linalg.HERM_TOL) -> bool:
        scale = max(float(np.linalg.norm(self.choi)), 1e-300)
        return linalg.hermiticity_defect(self.choi) <= tol * scale

    def allclose(self, other: "LinearMap", atol: float = 1e-12) -> bool:
        return (self.m, self.n) == (other.m, other.n) and np.allclose(self.choi, other.choi, rtol=0, atol=atol)

    def __add__(self, other: "LinearMap") -> "LinearMap":
        if (self.m, self.n) != (other.m, other.n):
            raise ShapeMismatch("maps act between different spaces")
        return LinearMap(self.m, self.n, self.choi + other.choi)

    def __sub__(self, other: "LinearMap") -> "LinearMap":
        return self + other.scaled(-1.0)

    def scaled(self, c: complex) -> "LinearMap":
        return LinearMap(self.m, self.n, c * self.choi)


@dataclass(frozen=True, eq=False)
class ChoiSplit:
    """Orthogonal decomposition ``C = C_plus - C_minus`` of a Hermitian Choi matrix."""

    positive_part: np.ndarray
    negative_part: np.ndarray
    support_neg: np.ndarray
    rank_neg: int
    eigenvalues: np.ndarray


def coordinate_vector(v) -> np.ndarray:
    """Vector ``sum V_ij e_j (x) e_i`` of an ``n x m`` operator ``V`` (input factor first)."""
    return np.asarray(v, dtype=np.complex128).T.reshape(-1)


def operator_from_vector(vec, m: int, n: int) -> np.ndarray:
    """Inverse of :func:`coordinate_vector`: an ``n x m`` operator."""
    return np.asarray(vec, dtype=np.complex128).reshape(m, n).T


def choi_of_map(apply: Callable[[np.ndarray], np.ndarray], m: int, n: int,
                check_linear: bool = True, tol: float = 1e-9) -> LinearMap:
    """Choi matrix ``sum_ij e_ij (x) apply(e_ij)`` of a map given as a callable.

    Args:
        apply: function taking an ``m x m`` array to an ``n x n`` array.
        m: input dimension.
        n: output dimension.
        check_linear: probe ``apply`` on random combinations of matrix units.
        tol: relative tolerance of the linearity probe.

    Raises:
        NonLinearInput: when ``apply`` is not linear on the probes.
        ShapeMismatch: when ``apply`` returns the wrong shape.
    """
    images = np.empty((m, m, n, n), dtype=np.complex128)
    for i in range(m):
        for j in range(m):
            out = np.asarray(apply(linalg.matrix_unit(i, j, m)), dtype=np.complex128)
            if out.shape != (n, n):
                raise ShapeMismatch(f"map returned shape {out.shape}, expected {(n, n)}")
            images[i, j] = out
    if check_linear:
        rng = np.random.default_rng(1234)
        scale = max(1.0, float(np.abs(images).max()))
        for _ in range(3):
            x = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
            expected = np.einsum("ij,ijrs->rs", x, images)
            got = np.asarray(apply(x), dtype=np.complex128)
            if got.shape != (n, n) or np.abs(got - expected).max() > tol * scale * np.abs(x).sum():
                raise NonLinearInput("map is not linear on random probes")
    choi = images.transpose(0, 2, 1, 3).reshape(m * n, m * n)
    return LinearMap(m, n, choi)


def apply_map(phi: LinearMap, x) -> np.ndarray:
    """``phi(x) = sum_ij x_ij * block_ij(C_phi)``."""
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != (phi.m, phi.m):
        raise ShapeMismatch(f"input must be {phi.m}x{phi.m}, got {x.shape}")
    return np.einsum("ij,irjs->rs", x, phi.blocks())


def ad_v_choi(v) -> LinearMap:
    """``Ad_V: x -> V x V*`` for an ``n x m`` operator ``V``; its Choi matrix is rank one."""
    v = linalg.as_cmatrix(v, name="V")
    n, m = v.shape
    vec = coordinate_vector(v)
    return LinearMap(m, n, np.outer(vec, vec.conj()))


def kraus_map(ops: Iterable) -> LinearMap:
    """Completely positive map ``sum_k Ad_{V_k}``; Kraus input is a convenience only."""
    ops = [linalg.as_cmatrix(v, name="Kraus operator") for v in ops]
    if not ops:
        raise ShapeMismatch("need at least one Kraus operator")
    shape = ops[0].shape
    if any(v.shape != shape for v in ops):
        raise ShapeMismatch("Kraus operators must share a shape")
    total = sum(ad_v_choi(v).choi for v in ops)
    return LinearMap(shape[1], shape[0], total)


def trace_map(m: int, n: int | None = None) -> LinearMap:
    """``a -> Tr(a) 1_n``; its Choi matrix is the identity."""
    n = m if n is None else n
    return LinearMap(m, n, np.eye(m * n, dtype=np.complex128))


def identity_map(d: int) -> LinearMap:
    """``id`` on ``B(C^d)``; Choi matrix ``sum e_ij (x) e_ij``."""
    vec = np.eye(d, dtype=np.complex128).reshape(-1)
    return LinearMap(d, d, np.outer(vec, vec))


def transpose_map(d: int) -> LinearMap:
    """The transpose ``x -> x^T``; Choi matrix is the flip operator."""
    flip = np.eye(d * d, dtype=np.complex128).reshape(d, d, d, d).transpose(0, 1, 3, 2)
    return LinearMap(d, d, flip.reshape(d * d, d * d))


def phi_lambda(phi: LinearMap, lam: float) -> LinearMap:
    """``Tr - lam * phi``, Choi matrix ``1 - lam * C_phi``.

    Raises:
        NegativeLambda: for ``lam < 0``.
    """
    if lam < 0:
        raise NegativeLambda(f"lambda must be >= 0, got {lam}")
    size = phi.m * phi.n
    return LinearMap(phi.m, phi.n, np.eye(size) - lam * phi.choi)


def swap_factors(c: np.ndarray, a: int, b: int) -> np.ndarray:
    """Conjugate an operator on ``C^a (x) C^b`` by the flip onto ``C^b (x) C^a``."""
    return np.asarray(c).reshape(a, b, a, b).transpose(1, 0, 3, 2).reshape(a * b, a * b)


def adjoint_map(phi: LinearMap) -> LinearMap:
    """The map ``phi*: B(H) -> B(K)`` with ``Tr(phi(a) b) = Tr(a phi*(b))``.

    ``C_{phi*}[(r, i), (s, j)] = C_phi[(j, s), (i, r)]``: transpose, then flip the factors.
    """
    return LinearMap(phi.n, phi.m, swap_factors(phi.choi.T, phi.m, phi.n))


def transpose_conjugate(phi: LinearMap) -> LinearMap:
    """``t o phi o t``, i.e. ``x -> phi(x^T)^T``; its Choi matrix is ``C_phi^T``."""
    return LinearMap(phi.m, phi.n, phi.choi.T.copy())


def compose_ad_after(f, phi: LinearMap) -> LinearMap:
    """``Ad_F o phi`` for ``F`` acting on the output space."""
    f = np.asarray(f, dtype=np.complex128)
    big = np.kron(np.eye(phi.m), f)
    return LinearMap(phi.m, f.shape[0], big @ phi.choi @ big.conj().T)


def compose_ad_before(phi: LinearMap, e) -> LinearMap:
    """``phi o Ad_E`` for ``E`` acting on the input space.

    ``sum_ij e_ij (x) phi(E e_ij E*) = (E^T (x) 1) C_phi (E^T (x) 1)*``.
    """
    e = np.asarray(e, dtype=np.complex128)
    big = np.kron(e.T, np.eye(phi.n))
    return LinearMap(e.shape[1], phi.n, big @ phi.choi @ big.conj().T)


def split_choi(phi: LinearMap | np.ndarray, tol: float = linalg.HERM_TOL) -> ChoiSplit:
    """Positive and negative parts of a Hermitian Choi matrix.

    Eigenvalues inside the dead zone ``[-tol, tol] * ||C||`` count as zero, so
    float noise never inflates the rank of the negative part.

    Raises:
        NotHermitian: when the Choi matrix is not Hermitian within ``tol``.
    """
    c = phi.choi if isinstance(phi, LinearMap) else linalg.as_cmatrix(phi)
    eig = linalg.herm_eig(c, tol)
    w, v = eig.eigenvalues, eig.eigenvectors
    band = tol * max(float(np.max(np.abs(w))), 0.0)
    pos, neg = w > band, w < -band
    vp, vn = v[:, pos], v[:, neg]
    c_plus = (vp * w[pos]) @ vp.conj().T
    c_minus = (vn * -w[neg]) @ vn.conj().T
    support = vn @ vn.conj().T
    return ChoiSplit(c_plus, c_minus, support, int(neg.sum()), w)


def positive_part(phi: LinearMap, tol: float = linalg.HERM_TOL) -> LinearMap:
    return LinearMap(phi.m, phi.n, split_choi(phi, tol).positive_part)


def negative_part(phi: LinearMap, tol: float = linalg.HERM_TOL) -> LinearMap:
    return LinearMap(phi.m, phi.n, split_choi(phi, tol).negative_part)


def max_entangled_vector(d: int) -> np.ndarray:
    """``psi_+ = d^{-1/2} sum_i e_i (x) e_i``."""
    return np.eye(d, dtype=np.complex128).reshape(-1) / np.sqrt(d)


def max_entangled_projection(d: int) -> np.ndarray:
    v = max_entangled_vector(d)
    return np.outer(v, v.conj())


def ensure_hermitian_choi(phi: LinearMap, tol: float = linalg.HERM_TOL) -> np.ndarray:
    if not phi.is_hermitian(tol):
        raise NotHermitian("Choi matrix is not Hermitian")
    return (phi.choi + phi.choi.conj().T) / 2
