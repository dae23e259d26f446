"""JSON encoding of matrices, maps and reports (schema ``choi-lab/1``).

Complex numbers are ``[re, im]`` pairs, matrices are row-major. Floats are
written with Python's shortest round-trip repr, so every value re-parses to
the identical 64-bit float.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .choi import LinearMap
from .errors import ShapeMismatch

SCHEMA = "choi-lab/1"


def _num(x: float):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


def parse_num(x) -> float:
    return float(x)


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 1:
        a = a[:, None]
    return {"rows": int(a.shape[0]), "cols": int(a.shape[1]),
            "data": [[_num(z.real), _num(z.imag)] for z in a.reshape(-1)]}


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError) as exc:
        raise ShapeMismatch(f"matrix JSON needs rows, cols and data: {exc}") from exc
    if len(data) != rows * cols:
        raise ShapeMismatch(f"data has {len(data)} entries, expected {rows * cols}")
    flat = np.array([complex(float(re), float(im)) for re, im in data], dtype=np.complex128)
    return flat.reshape(rows, cols)


def vector_to_json(v) -> dict:
    return matrix_to_json(np.asarray(v).reshape(-1, 1))


def vector_from_json(obj: dict) -> np.ndarray:
    return matrix_from_json(obj).reshape(-1)


def map_to_json(phi: LinearMap) -> dict:
    return {"m": phi.m, "n": phi.n, "choi": matrix_to_json(phi.choi)}


def map_from_json(obj: dict) -> LinearMap:
    return LinearMap(int(obj["m"]), int(obj["n"]), matrix_from_json(obj["choi"]))


def load_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


def load_matrix(path: str | Path) -> np.ndarray:
    obj = load_json(path)
    if "choi" in obj and "m" in obj:
        return map_from_json(obj).choi
    return matrix_from_json(obj)


def load_map(path: str | Path) -> LinearMap:
    return map_from_json(load_json(path))


def save_json(path: str | Path, obj: dict) -> None:
    Path(path).write_text(dumps(obj))


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False)


def with_schema(kind: str, body: dict) -> dict:
    return {"schema": SCHEMA, "kind": kind, **body}


# reports -------------------------------------------------------------------

def norm_result_to_json(res) -> dict:
    out = {"value": _num(res.value), "certified": res.certified, "restarts_used": res.restarts_used,
           "method": res.method}
    if res.signed_sup is not None:
        out["signed_sup"] = _num(res.signed_sup)
    if res.oracle_value is not None:
        out["oracle_value"] = _num(res.oracle_value)
    if res.maximizer is not None:
        out["maximizer"] = matrix_to_json(res.maximizer)
    return out


def certificate_to_json(cert) -> dict:
    out = {"verdict": cert.verdict, "margin": _num(cert.margin), "k": cert.k, "method": cert.method,
           "tolerances": {key: _num(val) for key, val in cert.tolerances.items()}}
    out["witness"] = None if cert.witness is None else vector_to_json(cert.witness)
    return out


def certificate_from_json(obj: dict):
    from .positivity import PositivityCertificate

    witness = None if obj.get("witness") is None else vector_from_json(obj["witness"])
    return PositivityCertificate(obj["verdict"], parse_num(obj["margin"]), int(obj["k"]), witness,
                                 {k: parse_num(v) for k, v in obj.get("tolerances", {}).items()},
                                 obj.get("method", ""))


def witness_report_to_json(rep) -> dict:
    exps = [c["expectation"] for c in rep.certificates]
    return {
        "m": rep.m, "n": rep.n, "cone": str(rep.cone),
        "mu": _num(rep.mu), "lambda": _num(rep.lam),
        "mu_certified": rep.mu_result.certified,
        "rank_e": rep.rank_e,
        "bound_ok": rep.bound_ok,
        "support_matches": rep.support_matches,
        "samples": len(exps),
        "all_violate": all(c["violates"] for c in rep.certificates),
        "max_expectation": _num(max(exps)) if exps else None,
        "min_expectation": _num(min(exps)) if exps else None,
        "block_check": None if rep.block_check is None else certificate_to_json(rep.block_check),
        "notes": list(rep.notes),
        "witness_choi": matrix_to_json(rep.witness_choi),
        "closest_vector": None if rep.mu_result.maximizer is None else vector_to_json(rep.mu_result.maximizer),
    }


def criterion_to_json(c) -> dict:
    return {"name": c.name, "threshold": _num(c.threshold), "value": _num(c.value), "verdict": c.verdict,
            "details": {k: (_num(v) if isinstance(v, (int, float)) else v) for k, v in c.details.items()}}


def distill_report_to_json(rep) -> dict:
    return {
        "V": matrix_to_json(rep.v), "lambda": _num(rep.lam), "copies": rep.n_copies,
        "criteria": [criterion_to_json(c) for c in rep.criteria],
        "overall": rep.overall,
        "block_check": None if rep.block_check is None else certificate_to_json(rep.block_check),
    }
