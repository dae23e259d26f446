"""Witness maps built from entangled subspaces.

Given a projection ``e`` on ``C^m (x) C^n`` and a cone ``P`` or ``Pk(k)``, let
``mu`` be the largest overlap ``<psi|e|psi>`` of a Schmidt-rank-``<= k`` unit
vector with ``e``. When ``mu < 1`` the operator ``1 - e/mu`` is the Choi
matrix of a k-positive map whose negative part is supported exactly on ``e``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .choi import LinearMap, split_choi
from .config import DEFAULT, RunConfig
from .errors import ConeContainsCP, Degenerate, NotProjection, UnsupportedCone
from .norms import Cone, NormResult, _check_k, schmidt_op_norm
from .positivity import PositivityCertificate, is_k_block_positive

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class WitnessReport:
    e: np.ndarray
    m: int
    n: int
    cone: Cone
    mu: float
    lam: float
    witness_choi: np.ndarray
    certificates: list  # one record per sampled state supported in e
    bound_ok: bool
    mu_result: NormResult
    block_check: PositivityCertificate | None = None
    support_matches: bool = False
    rank_e: int = 0
    notes: list = field(default_factory=list)

    @property
    def witness_map(self) -> LinearMap:
        return LinearMap(self.m, self.n, self.witness_choi)

    @property
    def max_violation_expectation(self) -> float:
        return max(c["expectation"] for c in self.certificates) if self.certificates else float("nan")


def _check_projection(e, m: int, n: int, tol: float = 1e-9) -> np.ndarray:
    e = linalg.as_cmatrix(e, name="projection")
    if e.shape != (m * n, m * n):
        raise NotProjection(f"projection must be {m * n}x{m * n}, got {e.shape}")
    if not linalg.is_projection(e, tol):
        raise NotProjection("matrix is not an orthogonal projection (e^2 = e = e*)")
    return (e + e.conj().T) / 2


def projection_rank(e) -> int:
    return int(round(float(np.real(np.trace(e)))))


def _cone_k(cone: Cone, m: int, n: int) -> int:
    if cone.kind == "P":
        k = 1
    elif cone.kind == "Pk":
        k = cone.k
    elif cone.kind == "CP":
        raise ConeContainsCP("CP-entanglement is trivial; the construction needs a cone not inside CP")
    else:
        raise UnsupportedCone(f"cone {cone} is not supported for witnesses")
    _check_k(k, min(m, n))
    if k >= min(m, n):
        raise ConeContainsCP(f"k = {k} = min(m, n): the cone equals CP and mu = 1 identically")
    return k


def mu_of_projection(e, m: int, n: int, cone: Cone, cfg: RunConfig = DEFAULT) -> NormResult:
    """``mu = sup <psi|e|psi>`` over unit vectors of Schmidt rank ``<= k`` (``k = 1`` for ``P``).

    The maximizer is the closest Schmidt-rank-``k`` vector to ``range(e)``.

    Raises:
        NotProjection: if ``e`` is not an orthogonal projection.
        ConeContainsCP: if the cone is CP (or ``k = min(m, n)``).
    """
    e = _check_projection(e, m, n)
    k = _cone_k(cone, m, n)
    if projection_rank(e) == 0:
        return NormResult(0.0, certified="exact", method="zero")
    return schmidt_op_norm(e, m, n, k, cfg)


def haar_states_in_range(e, count: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Random density matrices supported in ``range(e)`` (Hilbert-Schmidt measure, full rank in range)."""
    eig = linalg.herm_eig(e)
    r = projection_rank(e)
    basis = eig.eigenvectors[:, :r]
    states = []
    for _ in range(count):
        g = rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r))
        rho = g @ g.conj().T
        rho /= np.trace(rho).real
        states.append(basis @ rho @ basis.conj().T)
    return states


def build_witness(e, m: int, n: int, cone: Cone, cfg: RunConfig = DEFAULT,
                  samples: int | None = None, block_check: bool = True) -> WitnessReport:
    """Witness map with Choi matrix ``1 - e / mu``.

    The report records the expectation of the witness on ``samples`` random
    states supported in ``e`` (each equals ``1 - 1/mu < 0``), whether the
    negative part of the witness is supported exactly on ``e``, a heuristic
    k-block-positivity check of the witness and the dimension bound
    ``rank(e) <= (m - k)(n - k)``.

    Raises:
        Degenerate: if ``mu >= 1 - cfg.degeneracy_tol``; then some Schmidt-rank-``k``
            vector lies (numerically) in ``range(e)``.
    """
    e = _check_projection(e, m, n)
    k = _cone_k(cone, m, n)
    mu_res = mu_of_projection(e, m, n, cone, cfg)
    mu = mu_res.value
    if mu >= 1 - cfg.degeneracy_tol:
        raise Degenerate(f"mu = {mu:.12g} is within {cfg.degeneracy_tol:g} of 1; "
                         "the range of e contains a vector of Schmidt rank <= k")
    if mu <= 0:
        raise Degenerate("e = 0 has no states to witness")
    lam = 1.0 / mu
    size = m * n
    witness = np.eye(size, dtype=np.complex128) - lam * e
    rank_e = projection_rank(e)

    samples = cfg.witness_samples if samples is None else samples
    rng = np.random.default_rng([cfg.seed, 3])
    certificates = []
    for rho in haar_states_in_range(e, samples, rng):
        val = float(np.real(np.trace(rho @ witness)))
        certificates.append({"expectation": val, "violates": val < 0})

    split = split_choi(witness, cfg.herm_tol)
    support_matches = (split.rank_neg == rank_e
                       and float(np.abs(split.support_neg - e).max()) <= 1e-8)
    notes = []
    block = None
    if block_check:
        block = is_k_block_positive(witness, m, n, k, cfg)
        if block.verdict == "certified_no":
            # mu underestimated by the see-saw: log rather than hide it
            notes.append(f"witness not k-block positive (min {block.margin:.3e}); mu is only a lower bound")
            log.warning(notes[-1])
    return WitnessReport(e, m, n, cone, mu, lam, witness, certificates,
                         bound_ok=rank_e <= (m - k) * (n - k), mu_result=mu_res, block_check=block,
                         support_matches=support_matches, rank_e=rank_e, notes=notes)


@dataclass(frozen=True, eq=False)
class EntangledEvidence:
    completely_entangled: bool
    mu: float
    best_product_vector: np.ndarray | None
    overlap: float
    rank_e: int
    reason: str


def is_completely_entangled(e, m: int, n: int, cfg: RunConfig = DEFAULT) -> EntangledEvidence:
    """Whether ``range(e)`` contains no product vector.

    Decided by ``mu`` for the cone ``P``; a subspace of dimension above
    ``(m - 1)(n - 1)`` always contains a product vector, so those are reported
    as not completely entangled even if the search missed the vector.
    """
    e = _check_projection(e, m, n)
    rank_e = projection_rank(e)
    res = mu_of_projection(e, m, n, Cone("P"), cfg)
    entangled = res.value < 1 - cfg.degeneracy_tol
    reason = "mu < 1" if entangled else "product vector found in range"
    if entangled and rank_e > (m - 1) * (n - 1):
        log.warning("search missed a product vector in a %d-dimensional range", rank_e)
        entangled, reason = False, "dimension exceeds (m-1)(n-1)"
    return EntangledEvidence(entangled, res.value, res.maximizer, res.value, rank_e, reason)


def check_support_bound(phi: LinearMap, k: int, tol: float = 1e-9) -> tuple[bool, int, int]:
    """``rank(C_phi^-) <= (m - k)(n - k)``; returns ``(holds, rank_neg, bound)``."""
    _check_k(k, min(phi.m, phi.n))
    rank_neg = split_choi(phi, tol).rank_neg
    bound = (phi.m - k) * (phi.n - k)
    return rank_neg <= bound, rank_neg, bound


def hankel_complement_projection(m: int, n: int) -> np.ndarray:
    """Projection onto a completely entangled subspace of dimension ``(m - 1)(n - 1)``.

    It is the orthogonal complement of the vectors ``sum_{i + j = s} e_i (x) e_j``:
    a product vector ``x (x) y`` orthogonal to all of them has
    ``x(z) y(z) = 0`` as polynomials, forcing ``x = 0`` or ``y = 0``.
    """
    anti = np.zeros((m * n, m + n - 1), dtype=np.complex128)
    for i in range(m):
        for j in range(n):
            anti[i * n + j, i + j] = 1.0
    return np.eye(m * n) - linalg.projection_onto(anti)
