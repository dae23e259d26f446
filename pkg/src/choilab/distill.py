"""Two-copy analysis of ``Tr - lam * Ad_V``: tensor powers and 2-positivity criteria.

The Choi matrix of ``phi (x) phi`` lives on ``(K (x) K) (x) (H (x) H)``, whereas
``kron(C_phi, C_phi)`` is ordered ``(K (x) H) (x) (K (x) H)``. Every two-copy
object is regrouped to the former ordering so that Schmidt ranks refer to the
``K (x) K : H (x) H`` cut.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .choi import LinearMap, ad_v_choi, coordinate_vector, phi_lambda
from .config import DEFAULT, RunConfig
from .errors import DimensionOverflow, NegativeLambda, NotNormalized, NumericalFailure, ShapeMismatch
from .norms import SchmidtInfo, ky_fan_sq, schmidt_info, schmidt_op_norm
from .positivity import (CERTIFIED_NO, CERTIFIED_YES, HEURISTIC_YES, PositivityCertificate,
                         is_k_block_positive, is_k_positive_phi_lambda, phi_lambda_witness)

log = logging.getLogger(__name__)

NORM_TOL = 1e-9
BOUNDARY_SLACK = 1e-12

TWO_POS_CERTIFIED = "2-positive-certified"
TWO_POS_HEURISTIC = "2-positive-heuristic"
NOT_TWO_POS = "not-2-positive"
INCONCLUSIVE = "inconclusive"


def regroup_operator(c, m: int, n: int) -> np.ndarray:
    """``(K H)(K H)`` ordering of a two-copy operator to ``(K K)(H H)``."""
    c = np.asarray(c)
    t = c.reshape(m, n, m, n, m, n, m, n).transpose(0, 2, 1, 3, 4, 6, 5, 7)
    return t.reshape(m * m * n * n, m * m * n * n)


def regroup_vector(vec, m: int, n: int, m2: int | None = None, n2: int | None = None) -> np.ndarray:
    """Vector on ``(C^m (x) C^n) (x) (C^m2 (x) C^n2)`` reordered to ``(C^m C^m2) (x) (C^n C^n2)``."""
    m2 = m if m2 is None else m2
    n2 = n if n2 is None else n2
    return np.asarray(vec).reshape(m, n, m2, n2).transpose(0, 2, 1, 3).reshape(-1)


def tensor_power_map(phi: LinearMap, n_copies: int, cap: int = linalg.KRON_CAP) -> LinearMap:
    """``phi^{(x) n}`` for ``n in {1, 2}`` as a map ``B(K (x) K) -> B(H (x) H)``.

    Raises:
        DimensionOverflow: if the two-copy Choi matrix exceeds ``cap``.
    """
    if n_copies == 1:
        return phi
    if n_copies != 2:
        raise ValueError("only 1 or 2 copies are supported")
    big = linalg.kron(phi.choi, phi.choi, cap=cap)
    return LinearMap(phi.m ** 2, phi.n ** 2, regroup_operator(big, phi.m, phi.n))


def product_vector_singular_values(a, b, dims_a: tuple[int, int], dims_b: tuple[int, int] | None = None,
                                   tol: float = 1e-10) -> SchmidtInfo:
    """Singular values of ``a (x) b`` across the regrouped cut ``(K K) : (H H)``.

    They equal all products ``sigma_i(a) sigma_j(b)``; this is asserted.

    Raises:
        ShapeMismatch: if a vector does not match its declared dimensions.
        NumericalFailure: if the product rule fails beyond ``tol``.
    """
    dims_b = dims_a if dims_b is None else dims_b
    (m1, n1), (m2, n2) = dims_a, dims_b
    a, b = np.asarray(a, dtype=np.complex128).reshape(-1), np.asarray(b, dtype=np.complex128).reshape(-1)
    if a.size != m1 * n1 or b.size != m2 * n2:
        raise ShapeMismatch("vector lengths do not match the declared dimensions")
    joint = regroup_vector(np.kron(a, b), m1, n1, m2, n2)
    info = schmidt_info(joint, m1 * m2, n1 * n2)
    sa, sb = schmidt_info(a, m1, n1).singular_values, schmidt_info(b, m2, n2).singular_values
    products = np.sort(np.outer(sa, sb).reshape(-1))[::-1][: info.singular_values.size]
    scale = max(1.0, float(products[0]) if products.size else 1.0)
    if np.abs(products - info.singular_values).max(initial=0.0) > tol * scale:
        raise NumericalFailure("singular values of the product do not factor")
    return info


@dataclass(frozen=True)
class Criterion:
    """One sufficient 2-positivity test: fires when ``threshold >= value``."""

    name: str
    threshold: float
    value: float
    fires: bool
    certified: bool
    details: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        if not self.fires:
            return "not-fired"
        return "fired-certified" if self.certified else "fired-heuristic"


def _normalized(v) -> np.ndarray:
    v = linalg.as_cmatrix(v, name="V")
    if abs(linalg.hs_norm(v) - 1.0) > NORM_TOL:
        raise NotNormalized(f"||V||_HS = {linalg.hs_norm(v):.12g}, expected 1")
    return v


def _check_lambda(lam: float):
    if lam < 0:
        raise NegativeLambda(f"lambda must be >= 0, got {lam}")


def prop6_check(v, lam: float) -> Criterion:
    """Fires iff ``4 lam ||V||_(1)^2 <= 1``; ``||p||_{S(1)} = ||V||_(1)^2`` is exact."""
    v = _normalized(v)
    _check_lambda(lam)
    value = 4.0 * ky_fan_sq(v, 1).value
    fires = lam * value <= 1 + BOUNDARY_SLACK
    return Criterion("prop6", np.inf if lam == 0 else 1.0 / lam, value, fires, fires)


def cor7_check(v, lam: float) -> Criterion:
    """Fires iff ``Tr - 4 lam Ad_V`` is 1-positive (exact Ky Fan test)."""
    v = _normalized(v)
    _check_lambda(lam)
    cert = is_k_positive_phi_lambda(v, 4 * lam, 1)
    fires = cert.verdict == CERTIFIED_YES
    return Criterion("cor7", np.inf if lam == 0 else 1.0 / (4 * lam), ky_fan_sq(v, 1).value, fires, fires,
                     details={"margin": cert.margin})


def two_copy_sum_operator(v) -> np.ndarray:
    """``1 (x) p + p (x) 1`` with ``p = C_{Ad_V}``, regrouped."""
    p = ad_v_choi(v)
    size = p.m * p.n
    eye = np.eye(size)
    return regroup_operator(np.kron(eye, p.choi) + np.kron(p.choi, eye), p.m, p.n)


def prop5_check(v, lam: float, cfg: RunConfig = DEFAULT) -> Criterion:
    """Fires when ``1/lam >= ||1 (x) p + p (x) 1||_{S(2)}``.

    The norm comes from the see-saw and is a lower bound, so a fired verdict is
    certified only when ``1/lam`` also clears either a rigorous upper bound
    (``min(4 ||V||_(1)^2, lambda_max)``) or the lower bound plus ``cfg.safety_margin``.
    """
    v = _normalized(v)
    _check_lambda(lam)
    n, m = v.shape
    a = two_copy_sum_operator(v)
    res = schmidt_op_norm(a, m * m, n * n, 2, cfg)
    lower = res.value
    upper = min(4.0 * ky_fan_sq(v, 1).value, float(linalg.eigvalsh_desc(a)[0]))
    threshold = np.inf if lam == 0 else 1.0 / lam
    fires = threshold >= lower
    certified = fires and (threshold >= upper - BOUNDARY_SLACK or threshold >= lower + cfg.safety_margin
                           or res.certified == "exact")
    return Criterion("prop5", threshold, lower, fires, certified,
                     details={"upper_bound": upper, "norm_certified": res.certified})


@dataclass(frozen=True, eq=False)
class DistillReport:
    v: np.ndarray
    lam: float
    n_copies: int
    criteria: list
    overall: str
    block_check: PositivityCertificate | None = None

    def criterion(self, name: str) -> Criterion | None:
        return next((c for c in self.criteria if c.name == name), None)


def two_copy_warm_starts(v, lam: float) -> list[np.ndarray]:
    """Two-copy vectors of Schmidt rank <= 2 likely to be negative on ``(1 - lam p)^{(x)2}``."""
    n, m = v.shape
    ups = coordinate_vector(v).reshape(m, n)
    i, j = np.unravel_index(int(np.argmin(np.abs(ups))), ups.shape)
    partner = np.zeros(m * n, dtype=np.complex128)
    partner[i * n + j] = 1.0
    starts = []
    for k in (1, 2):
        if k > min(m, n):
            continue
        w = phi_lambda_witness(v, k)
        starts.append(regroup_vector(np.kron(w, partner), m, n))
        starts.append(regroup_vector(np.kron(partner, w), m, n))
    return starts


def distill_report(v, lam: float, n_copies: int = 2, cfg: RunConfig = DEFAULT,
                   run_prop5: bool = True, search: bool = True) -> DistillReport:
    """2-positivity of ``(Tr - lam Ad_V)^{(x) n}`` for ``n in {1, 2}``.

    ``n = 1`` is decided exactly by the Ky Fan criterion with ``k = 2``. For
    ``n = 2`` the sufficient criteria are evaluated (when ``||V||_HS = 1``) and
    a see-saw search for a Schmidt-rank-2 negative direction runs on the
    regrouped two-copy Choi matrix.

    Raises:
        DimensionOverflow: for ``n = 2`` and ``max(m, n) > cfg.max_d``.
        NumericalFailure: if a certified criterion and a verified witness contradict.
    """
    v = linalg.as_cmatrix(v, name="V")
    _check_lambda(lam)
    rows, cols = v.shape
    if n_copies == 1:
        cert = is_k_positive_phi_lambda(v, lam, min(2, rows, cols))
        overall = TWO_POS_CERTIFIED if cert.verdict == CERTIFIED_YES else NOT_TWO_POS
        kf = ky_fan_sq(v, min(2, rows, cols)).value
        crit = Criterion("kyfan-k2", np.inf if lam == 0 else 1.0 / lam, kf, cert.positive, True,
                         details={"margin": cert.margin})
        return DistillReport(v, lam, 1, [crit], overall, cert)
    if n_copies != 2:
        raise ValueError("only 1 or 2 copies are supported")
    if max(rows, cols) > cfg.max_d:
        raise DimensionOverflow(f"d = {max(rows, cols)} exceeds max_d = {cfg.max_d} for two copies")

    criteria = []
    if abs(linalg.hs_norm(v) - 1.0) <= NORM_TOL:
        criteria += [prop6_check(v, lam), cor7_check(v, lam)]
        if run_prop5:
            criteria.append(prop5_check(v, lam, cfg))
        p6, c7 = criteria[0], criteria[1]
        if p6.fires != c7.fires:
            raise NumericalFailure("prop6 and cor7 verdicts differ")
    else:
        log.info("||V||_HS != 1: sufficient criteria skipped")
    certified_fire = any(c.fires and c.certified for c in criteria)

    block = None
    if search:
        two = tensor_power_map(phi_lambda(ad_v_choi(v), lam), 2)
        k = min(2, two.m, two.n)
        block = is_k_block_positive(two.choi, two.m, two.n, k, cfg, init=two_copy_warm_starts(v, lam))
    if block is not None and block.verdict == CERTIFIED_NO:
        if certified_fire:
            raise NumericalFailure("a certified 2-positivity criterion fired but a negative witness exists")
        overall = NOT_TWO_POS
    elif certified_fire or (block is not None and block.verdict == CERTIFIED_YES):
        overall = TWO_POS_CERTIFIED
    elif block is not None and block.verdict == HEURISTIC_YES:
        overall = TWO_POS_HEURISTIC
    else:
        overall = INCONCLUSIVE
    return DistillReport(v, lam, 2, criteria, overall, block)


def max_entangled_family(d: int) -> np.ndarray:
    """``V = 1/sqrt(d)``, whose Choi matrix is the maximally entangled projection."""
    return np.eye(d, dtype=np.complex128) / np.sqrt(d)


def sweep_distill(v, lambdas, n_copies: int = 2, cfg: RunConfig = DEFAULT, run_prop5: bool = False) -> list[dict]:
    """One row per ``lam``: criterion values/verdicts and the overall verdict."""
    rows = []
    for lam in lambdas:
        rep = distill_report(v, float(lam), n_copies, cfg, run_prop5=run_prop5)
        row = {"lambda": float(lam), "copies": n_copies, "overall": rep.overall}
        for c in rep.criteria:
            row[f"{c.name}_value"] = c.value
            row[f"{c.name}_verdict"] = c.verdict
        if rep.block_check is not None:
            row["block_verdict"] = rep.block_check.verdict
            row["block_margin"] = rep.block_check.margin
        rows.append(row)
    return rows
