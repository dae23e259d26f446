"""Ky Fan norms, Schmidt vector norms and Schmidt operator norms.

The Schmidt operator norm ``sup <psi|A|psi>`` over unit vectors of Schmidt
rank at most ``k`` is computed by a see-saw: writing the coordinate matrix as
``X Y^T`` (``X`` is ``m x k``, ``Y`` is ``n x k``), fixing one factor with
orthonormal columns turns the problem in the other factor into a Hermitian
eigenproblem, so each half-step is solved exactly and the value never
decreases. Restarts are run as one batched computation.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.optimize

from . import linalg
from .choi import LinearMap
from .config import DEFAULT, RunConfig
from .errors import BadK, NotHermitian, ShapeMismatch, UnsupportedCone

log = logging.getLogger(__name__)

EXACT = "exact"
HEURISTIC = "heuristic-lower-bound"

ORACLE_SAMPLES = 1024
ORACLE_POLISH = 6


@dataclass(frozen=True, eq=False)
class SchmidtInfo:
    m: int
    n: int
    singular_values: np.ndarray
    schmidt_rank: int


@dataclass(frozen=True, eq=False)
class NormResult:
    """Value of a norm together with how it was obtained.

    ``certified`` is ``"exact"`` or ``"heuristic-lower-bound"``. For Schmidt
    operator norms ``signed_sup`` is the supremum of ``<psi|A|psi>`` without
    absolute value and ``method`` records which route produced ``value``.
    """

    value: float
    maximizer: np.ndarray | None = None
    certified: str = EXACT
    restarts_used: int = 0
    signed_sup: float | None = None
    method: str = ""
    oracle_value: float | None = None
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Cone:
    """Concrete mapping cones: ``P``, ``Pk(k)``, ``CP``, ``SPk(k)``, ``SP``."""

    kind: str
    k: int | None = None

    KINDS = ("P", "Pk", "CP", "SPk", "SP")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise UnsupportedCone(f"unknown cone {self.kind!r}")
        if self.kind in ("Pk", "SPk") and (self.k is None or self.k < 1):
            raise UnsupportedCone(f"cone {self.kind} needs k >= 1")

    @classmethod
    def parse(cls, text: str, k: int | None = None) -> "Cone":
        text = text.strip()
        if "(" in text:
            name, arg = text.rstrip(")").split("(", 1)
            return cls(name, int(arg))
        return cls(text, k if text in ("Pk", "SPk") else None)

    def schmidt_k(self, m: int, n: int) -> int:
        if self.kind == "P":
            return 1
        if self.kind == "Pk":
            return self.k
        if self.kind == "CP":
            return min(m, n)
        raise UnsupportedCone(f"cone {self} is not a norm target")

    def __str__(self):
        return self.kind if self.k is None else f"{self.kind}({self.k})"


def _check_k(k: int, limit: int):
    if not (isinstance(k, (int, np.integer)) and 1 <= k <= limit):
        raise BadK(f"k must be an integer in [1, {limit}], got {k!r}")


# ---------------------------------------------------------------------------
# Ky Fan and Schmidt vector norms
# ---------------------------------------------------------------------------

def ky_fan_sq(v, k: int) -> NormResult:
    """Squared Ky Fan norm ``sum_{i<=k} sigma_i(V)^2``."""
    v = linalg.as_cmatrix(v, name="V")
    _check_k(k, min(v.shape))
    s = linalg.singular_values(v)
    return NormResult(float(np.sum(s[:k] ** 2)), certified=EXACT, method="svd")


def ky_fan_proj(v, k: int) -> NormResult:
    """``Tr(E V V*)`` with ``E`` the projection onto the top-``k`` eigenspace of ``V V*``.

    The maximizer returned is ``E``; ``Tr(F V V*)`` over rank-``k`` projections
    ``F`` never exceeds this value.
    """
    v = linalg.as_cmatrix(v, name="V")
    if v.shape[0] != v.shape[1]:
        raise ShapeMismatch("ky_fan_proj expects a square operator")
    _check_k(k, v.shape[0])
    vvs = v @ v.conj().T
    eig = linalg.herm_eig(vvs)
    top = eig.eigenvectors[:, :k]
    e = top @ top.conj().T
    return NormResult(float(np.trace(e @ vvs).real), maximizer=e, certified=EXACT, method="eigen")


def coordinate_matrix(psi, m: int, n: int) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    if psi.size != m * n:
        raise ShapeMismatch(f"vector of length {psi.size} does not live in C^{m} (x) C^{n}")
    return psi.reshape(m, n)


def schmidt_info(psi, m: int, n: int, rank_tol: float = 1e-10) -> SchmidtInfo:
    """Singular values of the ``m x n`` coordinate matrix of ``psi``.

    The Schmidt rank counts singular values above ``rank_tol * max(1, sigma_1)``.
    """
    s = linalg.singular_values(coordinate_matrix(psi, m, n))
    rank = int(np.sum(s > rank_tol * max(1.0, s[0] if s.size else 0.0)))
    return SchmidtInfo(m, n, s, rank)


def schmidt_vector_norm(psi, m: int, n: int, k: int) -> NormResult:
    """``||psi||_{s(k)}``: the Ky Fan norm of the coordinate matrix (value, not squared)."""
    _check_k(k, min(m, n))
    s = schmidt_info(psi, m, n).singular_values
    return NormResult(float(np.sqrt(np.sum(s[:k] ** 2))), certified=EXACT, method="svd")


# ---------------------------------------------------------------------------
# See-saw
# ---------------------------------------------------------------------------

@dataclass
class SeesawResult:
    value: float
    psi: np.ndarray
    values: np.ndarray  # best value per restart
    sweeps: np.ndarray
    history: list  # best-restart value after each sweep


def _orthonormal(z: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(z)
    return q


def _contract_right(a4: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Operator on the left factor: ``B[r](i a, i' b) = sum_{j j'} conj(q[r, j, a]) A[i j, i' j'] q[r, j', b]``."""
    m, n = a4.shape[0], a4.shape[1]
    r, _, k = q.shape
    t = np.matmul(a4.reshape(m * n * m, n), q)  # (R, m n m, k)
    t = t.reshape(r, m, n, m, k)
    b = np.einsum("rja,rijkb->riakb", q.conj(), t, optimize=True)
    return b.reshape(r, m * k, m * k)


def _contract_left(a4: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Operator on the right factor: ``B[r](j a, j' b) = sum_{i i'} conj(q[r, i, a]) A[i j, i' j'] q[r, i', b]``."""
    return _contract_right(a4.transpose(1, 0, 3, 2), q)


def _top_eig(b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    b = (b + np.conj(np.swapaxes(b, -1, -2))) / 2
    w, v = np.linalg.eigh(b)
    return w[:, -1], v[:, :, -1]


def _initial_factors(m: int, n: int, k: int, cfg: RunConfig, init: Sequence | None) -> np.ndarray:
    """Right factors ``Y`` (R, n, k) for warm starts followed by seeded random restarts."""
    ys = []
    for psi in init or ():
        mat = np.asarray(psi, dtype=np.complex128).reshape(m, n)
        _, _, wh = np.linalg.svd(mat)
        ys.append(wh[:k].T)  # mat = (U S) (Wh[:k]^T)^T up to truncation
    for r in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, r])
        ys.append(rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k)))
    return np.stack(ys)


def seesaw_max(a, m: int, n: int, k: int, cfg: RunConfig = DEFAULT,
               init: Sequence | None = None) -> SeesawResult:
    """Maximize ``<psi|A|psi>`` over unit vectors of Schmidt rank at most ``k``.

    Args:
        a: Hermitian ``(m n) x (m n)`` matrix (not checked here).
        init: optional warm-start vectors (length ``m n``, Schmidt rank ``<= k``).

    Returns:
        The best value found, its maximizer, and per-restart diagnostics.
    """
    a = np.asarray(a, dtype=np.complex128)
    a4 = a.reshape(m, n, m, n)
    ys = _orthonormal(_initial_factors(m, n, k, cfg, init))
    total = ys.shape[0]
    best = np.full(total, -np.inf)
    stall = np.zeros(total, dtype=int)
    sweeps = np.zeros(total, dtype=int)
    psis = np.zeros((total, m * n), dtype=np.complex128)
    active = np.arange(total)
    history = []
    for _ in range(cfg.max_sweeps):
        if active.size == 0:
            break
        _, xvec = _top_eig(_contract_right(a4, ys[active]))
        qx = _orthonormal(xvec.reshape(-1, m, k))
        val, yvec = _top_eig(_contract_left(a4, qx))
        ycoef = yvec.reshape(-1, n, k)
        psis[active] = np.matmul(qx, np.swapaxes(ycoef, 1, 2)).reshape(-1, m * n)
        ys[active] = _orthonormal(ycoef)
        stall[active] = np.where(val - best[active] < cfg.improve_tol, stall[active] + 1, 0)
        best[active] = np.maximum(best[active], val)
        sweeps[active] += 1
        history.append(float(best.max()))
        active = active[stall[active] < 3]
    idx = int(np.argmax(best))
    psi = psis[idx] / np.linalg.norm(psis[idx])
    value = float(np.real(np.vdot(psi, a @ psi)))
    return SeesawResult(value, psi, best, sweeps, history)


# ---------------------------------------------------------------------------
# Independent oracle: random sampling + quasi-Newton polish in (X, Y)
# ---------------------------------------------------------------------------

def _rayleigh_and_grad(params: np.ndarray, a: np.ndarray, m: int, n: int, k: int):
    z = params[: params.size // 2] + 1j * params[params.size // 2:]
    x, y = z[: m * k].reshape(m, k), z[m * k:].reshape(n, k)
    psi = (x @ y.T).reshape(-1)
    norm2 = float(np.real(np.vdot(psi, psi)))
    if norm2 < 1e-300:
        return 0.0, np.zeros_like(params)
    apsi = a @ psi
    f = float(np.real(np.vdot(psi, apsi))) / norm2
    g = ((apsi - f * psi) / norm2).reshape(m, n)
    hx, hy = g @ y.conj(), g.T @ x.conj()
    grad = 2 * np.concatenate([hx.reshape(-1), hy.reshape(-1)])
    # minimize -f
    return -f, -np.concatenate([grad.real, grad.imag])


def sampling_oracle(a, m: int, n: int, k: int, seed: int = 0,
                    samples: int = ORACLE_SAMPLES, polish: int = ORACLE_POLISH) -> tuple[float, np.ndarray]:
    """Best ``<psi|A|psi>`` over Schmidt-rank-``<= k`` unit vectors by dense sampling and BFGS polish.

    This route shares nothing with the see-saw (no eigen-steps), so agreement of
    the two is meaningful evidence.
    """
    a = np.asarray(a, dtype=np.complex128)
    rng = np.random.default_rng([seed, 0x5EED])
    x = rng.normal(size=(samples, m, k)) + 1j * rng.normal(size=(samples, m, k))
    y = rng.normal(size=(samples, n, k)) + 1j * rng.normal(size=(samples, n, k))
    psi = np.matmul(x, np.swapaxes(y, 1, 2)).reshape(samples, -1)
    psi /= np.linalg.norm(psi, axis=1, keepdims=True)
    vals = np.real(np.einsum("si,ij,sj->s", psi.conj(), a, psi))
    best_val, best_psi = -np.inf, None
    for s in np.argsort(-vals)[:polish]:
        z = np.concatenate([x[s].reshape(-1), y[s].reshape(-1)])
        z0 = np.concatenate([z.real, z.imag])
        res = scipy.optimize.minimize(_rayleigh_and_grad, z0, args=(a, m, n, k), jac=True,
                                      method="BFGS", options={"gtol": 1e-12, "maxiter": 2000})
        zz = res.x[: res.x.size // 2] + 1j * res.x[res.x.size // 2:]
        cand = (zz[: m * k].reshape(m, k) @ zz[m * k:].reshape(n, k).T).reshape(-1)
        cand = cand / np.linalg.norm(cand)
        val = float(np.real(np.vdot(cand, a @ cand)))
        if val > best_val:
            best_val, best_psi = val, cand
    return best_val, best_psi


# ---------------------------------------------------------------------------
# Schmidt operator norm and cone norms
# ---------------------------------------------------------------------------

def schmidt_sup(a, m: int, n: int, k: int, cfg: RunConfig = DEFAULT, init: Sequence | None = None,
                use_oracle: bool | None = None) -> NormResult:
    """Signed supremum ``sup <psi|A|psi>`` over unit vectors of Schmidt rank ``<= k``.

    Exact (eigenvalue) when ``k = min(m, n)``; otherwise see-saw, certified
    when ``m n <= cfg.oracle_cap`` and the sampling oracle agrees within
    ``cfg.oracle_tol``. If the oracle finds a larger value it is kept.
    """
    a = np.asarray(a, dtype=np.complex128)
    if k == min(m, n):
        eig = linalg.herm_eig(a, 1e-6)
        return NormResult(float(eig.eigenvalues[0]), maximizer=eig.eigenvectors[:, 0],
                          certified=EXACT, method="eigen")
    res = seesaw_max(a, m, n, k, cfg, init)
    value, psi, method = res.value, res.psi, "see-saw"
    certified, oracle_value = HEURISTIC, None
    if use_oracle is None:
        use_oracle = m * n <= cfg.oracle_cap
    if use_oracle:
        oracle_value, opsi = sampling_oracle(a, m, n, k, seed=cfg.seed)
        if abs(oracle_value - value) <= cfg.oracle_tol:
            certified, method = EXACT, "see-saw+oracle"
        else:
            log.warning("see-saw %.12g and oracle %.12g disagree", value, oracle_value)
            if oracle_value > value:
                value, psi, method = oracle_value, opsi, "oracle"
    return NormResult(value, maximizer=psi, certified=certified, restarts_used=len(res.values),
                      signed_sup=value, method=method, oracle_value=oracle_value,
                      details={"sweeps_max": int(res.sweeps.max()), "history": res.history})


def schmidt_op_norm(a, m: int, n: int, k: int, cfg: RunConfig = DEFAULT,
                    init: Sequence | None = None) -> NormResult:
    """``||A||_{S(k)}`` for Hermitian ``A`` on ``C^m (x) C^n``.

    Returns ``max(sup <psi|A|psi>, sup <psi|-A|psi>)`` so that the absolute
    value of the state-norm definition is honoured; ``signed_sup`` holds the
    supremum without absolute value.

    Raises:
        NotHermitian: if ``A`` is not Hermitian.
        BadK: if ``k`` is outside ``[1, min(m, n)]``.
    """
    a = linalg.check_hermitian(a, cfg.herm_tol)
    if a.shape != (m * n, m * n):
        raise ShapeMismatch(f"operator must be {m * n}x{m * n}, got {a.shape}")
    _check_k(k, min(m, n))
    ev = linalg.eigvalsh_desc(a)
    plus = schmidt_sup(a, m, n, k, cfg, init)
    candidates = [plus]
    # sup <psi|-A|psi> <= -lambda_min, so the negative side only matters when that bound can win
    if ev[-1] < 0 and -ev[-1] > plus.value:
        candidates.append(schmidt_sup(-a, m, n, k, cfg))
    best = max(candidates, key=lambda r: r.value)
    certified = EXACT if all(r.certified == EXACT for r in candidates) else HEURISTIC
    return NormResult(best.value, maximizer=best.maximizer, certified=certified,
                      restarts_used=sum(r.restarts_used for r in candidates), signed_sup=plus.value,
                      method=best.method, oracle_value=best.oracle_value, details=best.details)


def map_cone_norm(phi: LinearMap, cone: Cone, cfg: RunConfig = DEFAULT) -> NormResult:
    """``||phi||_C = ||C_phi||_{S_k(C)}`` for the concrete cones ``P``, ``Pk(k)`` and ``CP``.

    Raises:
        UnsupportedCone: for ``SP``/``SPk`` (duality roles only).
    """
    if cone.kind not in ("P", "Pk", "CP"):
        raise UnsupportedCone(f"no norm implemented for cone {cone}")
    if cone.kind == "CP":
        c = linalg.check_hermitian(phi.choi, cfg.herm_tol)
        ev = linalg.eigvalsh_desc(c)
        return NormResult(float(max(abs(ev[0]), abs(ev[-1]))), certified=EXACT, method="eigen",
                          signed_sup=float(ev[0]))
    k = cone.schmidt_k(phi.m, phi.n)
    _check_k(k, min(phi.m, phi.n))
    return schmidt_op_norm(phi.choi, phi.m, phi.n, k, cfg)
