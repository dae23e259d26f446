"""Certificates of complete positivity and k-positivity.

Verdicts are one of ``certified_yes``, ``certified_no`` or ``heuristic_yes``.
A ``certified_no`` always carries a witness vector of Schmidt rank at most
``k`` whose expectation on the Choi matrix has been recomputed and found
negative.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .choi import (LinearMap, ad_v_choi, compose_ad_after, compose_ad_before, coordinate_vector,
                   phi_lambda)
from .config import DEFAULT, RunConfig
from .errors import BadK, NegativeLambda, NumericalFailure, ShapeMismatch
from .norms import _check_k, ky_fan_sq, sampling_oracle, schmidt_info, seesaw_max

CERTIFIED_YES = "certified_yes"
CERTIFIED_NO = "certified_no"
HEURISTIC_YES = "heuristic_yes"

CP_TOL = 1e-9
KYFAN_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class PositivityCertificate:
    verdict: str
    margin: float
    k: int
    witness: np.ndarray | None = None
    tolerances: dict = field(default_factory=dict)
    method: str = ""

    @property
    def positive(self) -> bool:
        return self.verdict != CERTIFIED_NO


def expectation(c: np.ndarray, psi: np.ndarray) -> float:
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    return float(np.real(np.vdot(psi, c @ psi)) / np.real(np.vdot(psi, psi)))


def verify_witness(c, psi, m: int, n: int, k: int, tol: float = 0.0, rank_tol: float = 1e-8) -> bool:
    """Independent recheck: Schmidt rank of ``psi`` at most ``k`` and ``<psi|C|psi> < -tol``."""
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    return schmidt_info(psi, m, n, rank_tol).schmidt_rank <= k and expectation(np.asarray(c), psi) < -tol


def _truncate_schmidt(psi: np.ndarray, m: int, n: int, k: int) -> np.ndarray:
    u, s, wh = np.linalg.svd(psi.reshape(m, n))
    out = (u[:, :k] * s[:k]) @ wh[:k]
    return out.reshape(-1) / np.linalg.norm(out)


def is_cp(phi: LinearMap, tol: float = CP_TOL) -> PositivityCertificate:
    """Complete positivity: the Choi matrix is positive semidefinite.

    ``margin`` is the smallest eigenvalue; it is compared against ``-tol * ||C||``.
    """
    eig = linalg.herm_eig(phi.choi, tol)
    w = eig.eigenvalues
    scale = max(float(np.abs(w).max()), 1e-300)
    margin = float(w[-1])
    tols = {"tol": tol, "threshold": -tol * scale}
    if margin >= -tol * scale:
        return PositivityCertificate(CERTIFIED_YES, margin, min(phi.m, phi.n), tolerances=tols, method="eigen")
    return PositivityCertificate(CERTIFIED_NO, margin, min(phi.m, phi.n), witness=eig.eigenvectors[:, -1],
                                 tolerances=tols, method="eigen")


def top_singular_projections(v, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Projections onto the top-``k`` left and right singular subspaces of ``V``."""
    res = linalg.svd(v)
    u, w = res.left[:, :k], res.right[:, :k]
    return u @ u.conj().T, w @ w.conj().T


def phi_lambda_witness(v, k: int) -> np.ndarray:
    """Schmidt-rank-``k`` unit vector maximizing the overlap with ``C_{Ad_V}``.

    It is the coordinate vector of ``W = E V / ||V||_(k)`` with ``E`` the top-``k``
    left singular projection of ``V``.
    """
    v = linalg.as_cmatrix(v, name="V")
    e, _ = top_singular_projections(v, k)
    w = e @ v
    w = w / np.linalg.norm(w)
    return coordinate_vector(w)


def is_k_positive_phi_lambda(v, lam: float, k: int) -> PositivityCertificate:
    """Exact k-positivity of ``Tr - lam * Ad_V``: yes iff ``lam * ||V||_(k)^2 <= 1``.

    ``margin`` is ``1/lam - ||V||_(k)^2`` (``inf`` for ``lam = 0``). On a no
    verdict the rank-``k`` witness from the top singular subspace is attached
    and rechecked against the Choi matrix.
    """
    v = linalg.as_cmatrix(v, name="V")
    if lam < 0:
        raise NegativeLambda(f"lambda must be >= 0, got {lam}")
    n, m = v.shape
    _check_k(k, min(m, n))
    kf = ky_fan_sq(v, k).value
    margin = np.inf if lam == 0 else 1.0 / lam - kf
    tols = {"slack": KYFAN_SLACK}
    if lam * kf <= 1 + KYFAN_SLACK:
        return PositivityCertificate(CERTIFIED_YES, float(margin), k, tolerances=tols, method="ky-fan")
    psi = phi_lambda_witness(v, k)
    c = phi_lambda(ad_v_choi(v), lam).choi
    if not verify_witness(c, psi, m, n, k):
        raise NumericalFailure("Ky Fan witness failed independent verification")
    return PositivityCertificate(CERTIFIED_NO, float(margin), k, witness=psi, tolerances=tols, method="ky-fan")


def block_minimum(c, m: int, n: int, k: int, cfg: RunConfig = DEFAULT, init=None):
    """See-saw estimate of ``min <psi|C|psi>`` over Schmidt-rank-``<= k`` unit vectors."""
    res = seesaw_max(-np.asarray(c), m, n, k, cfg, init)
    return -res.value, res.psi, res


def is_k_block_positive(c, m: int, n: int, k: int, cfg: RunConfig = DEFAULT, init=None,
                        use_oracle: bool | None = None) -> PositivityCertificate:
    """k-block positivity of a Hermitian ``C`` on ``C^m (x) C^n``.

    A minimum below ``-cfg.tol * max(1, ||C||)`` yields ``certified_no`` with a
    verified witness. Otherwise the answer is ``certified_yes`` when ``C`` is
    PSD, when ``k = min(m, n)`` (plain eigenvalue problem), or when the
    small-dimension sampling oracle agrees with the see-saw; else
    ``heuristic_yes``.

    Args:
        init: optional warm-start vectors for the minimization.
        use_oracle: force the oracle on/off (default: ``m n <= cfg.oracle_cap``).
    """
    c = linalg.check_hermitian(c, cfg.herm_tol)
    if c.shape != (m * n, m * n):
        raise ShapeMismatch(f"operator must be {m * n}x{m * n}, got {c.shape}")
    _check_k(k, min(m, n))
    eig = linalg.herm_eig(c, cfg.herm_tol)
    scale = max(1.0, float(np.abs(eig.eigenvalues).max()))
    threshold = -cfg.tol * scale
    tols = {"tol": cfg.tol, "threshold": threshold, "oracle_tol": cfg.oracle_tol}
    lam_min = float(eig.eigenvalues[-1])
    if lam_min >= threshold:
        return PositivityCertificate(CERTIFIED_YES, lam_min, k, tolerances=tols, method="psd")
    if k == min(m, n):
        return PositivityCertificate(CERTIFIED_NO, lam_min, k, witness=eig.eigenvectors[:, -1],
                                     tolerances=tols, method="eigen")
    value, psi, _ = block_minimum(c, m, n, k, cfg, init)
    if value < threshold:
        psi = _truncate_schmidt(psi, m, n, k)
        value = expectation(c, psi)
        if not verify_witness(c, psi, m, n, k, -threshold):
            raise NumericalFailure("see-saw witness failed independent verification")
        return PositivityCertificate(CERTIFIED_NO, value, k, witness=psi, tolerances=tols, method="see-saw")
    if use_oracle is None:
        use_oracle = m * n <= cfg.oracle_cap
    if use_oracle:
        oracle_max, opsi = sampling_oracle(-c, m, n, k, seed=cfg.seed)
        oracle_min = -oracle_max
        if oracle_min < threshold:
            opsi = _truncate_schmidt(opsi, m, n, k)
            if verify_witness(c, opsi, m, n, k, -threshold):
                return PositivityCertificate(CERTIFIED_NO, expectation(c, opsi), k, witness=opsi,
                                             tolerances=tols, method="oracle")
        if abs(oracle_min - value) <= cfg.oracle_tol:
            return PositivityCertificate(CERTIFIED_YES, min(value, oracle_min), k, tolerances=tols,
                                         method="see-saw+oracle")
    return PositivityCertificate(HEURISTIC_YES, value, k, tolerances=tols, method="see-saw")


def haar_projection(d: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random rank-``k`` projection on ``C^d`` (QR of a Gaussian matrix)."""
    z = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return q @ q.conj().T


@dataclass(frozen=True, eq=False)
class CompressionReport:
    k: int
    samples: int
    failures: dict  # condition -> number of non-CP compressions
    first_failure: dict  # condition -> (F, E) projections of the first failure
    block_positive: PositivityCertificate | None
    agrees: bool | None  # sampled verdict vs. block-positivity verdict

    @property
    def any_failure(self) -> bool:
        return any(self.failures.values())


def theorem4_check(phi: LinearMap, k: int, samples: int = 64, cfg: RunConfig = DEFAULT,
                   hint_v=None, extra_projections=(), block_check: bool = True) -> CompressionReport:
    """Compress ``phi`` by ``k``-dimensional projections and test complete positivity.

    Checks ``Ad_F o phi``, ``phi o Ad_F`` and ``Ad_F o phi o Ad_E`` for Haar-random
    ``F, E``. A single non-CP compression proves ``phi`` is not k-positive;
    passing every sample is only evidence. For ``phi = Tr - lam Ad_V`` pass
    ``hint_v=V`` to include the top singular projections of ``V``, which fail
    whenever ``phi`` is not k-positive.
    """
    if phi.m != phi.n:
        raise ShapeMismatch("compression check needs m = n")
    d = phi.m
    _check_k(k, d)
    rng = np.random.default_rng([cfg.seed, 4])
    pairs = []
    if hint_v is not None:
        left, right = top_singular_projections(hint_v, k)
        pairs.append((left, right))
    pairs.extend((f, f) for f in extra_projections)
    pairs.extend((haar_projection(d, k, rng), haar_projection(d, k, rng)) for _ in range(samples))
    failures = {"Ad_F.phi": 0, "phi.Ad_F": 0, "Ad_F.phi.Ad_E": 0}
    first: dict = {}
    for f, e in pairs:
        checks = {
            "Ad_F.phi": (compose_ad_after(f, phi), (f, None)),
            "phi.Ad_F": (compose_ad_before(phi, e), (None, e)),
            "Ad_F.phi.Ad_E": (compose_ad_after(f, compose_ad_before(phi, e)), (f, e)),
        }
        for name, (mapped, proj) in checks.items():
            if is_cp(mapped).verdict == CERTIFIED_NO:
                failures[name] += 1
                first.setdefault(name, proj)
    block = agrees = None
    if block_check:
        block = is_k_block_positive(phi.choi, d, d, k, cfg)
        agrees = (block.verdict == CERTIFIED_NO) == any(failures.values())
    return CompressionReport(k, len(pairs), failures, first, block, agrees)
