"""``choi-lab`` command line.

Exit codes: 0 positive/certified verdict, 1 usage or input error,
2 certified-negative verdict, 3 heuristic verdict, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import io as _io
import logging
import sys

import numpy as np

from . import io
from .choi import ad_v_choi, apply_map, identity_map, kraus_map, phi_lambda, trace_map
from .config import RunConfig
from .distill import distill_report, max_entangled_family, sweep_distill
from .entanglement import build_witness, check_support_bound, is_completely_entangled
from .errors import ChoiLabError, Degenerate, NumericalFailure
from .norms import Cone, ky_fan_sq, map_cone_norm, schmidt_op_norm
from .positivity import (CERTIFIED_NO, CERTIFIED_YES, is_cp, is_k_block_positive,
                         is_k_positive_phi_lambda)

EXIT_OK, EXIT_USAGE, EXIT_NO, EXIT_HEURISTIC, EXIT_NUMERIC = 0, 1, 2, 3, 4

COMMANDS = ("choi", "apply", "kyfan", "schmidt-norm", "kpos", "blockpos", "witness", "centangled",
            "supportbound", "distill", "sweep-distill")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _verdict_exit(verdict: str) -> int:
    return {CERTIFIED_YES: EXIT_OK, CERTIFIED_NO: EXIT_NO}.get(verdict, EXIT_HEURISTIC)


def _square_dims(size: int) -> tuple[int, int]:
    d = int(round(np.sqrt(size)))
    if d * d != size:
        raise UsageError(f"cannot infer --m/--n for an operator of size {size}; pass them explicitly")
    return d, d


def _operator_args(args) -> tuple[np.ndarray, int, int]:
    if getattr(args, "map", None):
        phi = io.load_map(args.map)
        return phi.choi, phi.m, phi.n
    if not getattr(args, "A", None):
        raise UsageError("pass --map or --A")
    a = io.load_matrix(args.A)
    m, n = (args.m, args.n) if args.m and args.n else _square_dims(a.shape[0])
    return a, m, n


# commands -------------------------------------------------------------------

def cmd_choi(args, cfg):
    if args.V:
        phi = ad_v_choi(io.load_matrix(args.V))
    elif args.kraus:
        phi = kraus_map([io.load_matrix(p) for p in args.kraus])
    elif args.trace:
        phi = trace_map(*args.trace)
    elif args.identity:
        phi = identity_map(args.identity)
    else:
        raise UsageError("choi needs one of --V, --kraus, --trace, --identity")
    if args.lam is not None:
        phi = phi_lambda(phi, args.lam)
    return io.with_schema("map", io.map_to_json(phi)), EXIT_OK


def cmd_apply(args, cfg):
    phi = io.load_map(args.map)
    return io.with_schema("matrix", io.matrix_to_json(apply_map(phi, io.load_matrix(args.x)))), EXIT_OK


def cmd_kyfan(args, cfg):
    res = ky_fan_sq(io.load_matrix(args.V), args.k)
    return io.with_schema("norm", {"k": args.k, **io.norm_result_to_json(res)}), EXIT_OK


def cmd_schmidt_norm(args, cfg):
    if args.cone:
        if not args.map:
            raise UsageError("--cone needs --map")
        res = map_cone_norm(io.load_map(args.map), Cone.parse(args.cone, args.k), cfg)
        body = {"cone": args.cone, **io.norm_result_to_json(res)}
    else:
        a, m, n = _operator_args(args)
        if args.k is None:
            raise UsageError("--k is required")
        res = schmidt_op_norm(a, m, n, args.k, cfg)
        body = {"m": m, "n": n, "k": args.k, **io.norm_result_to_json(res)}
    code = EXIT_OK if res.certified == "exact" else EXIT_HEURISTIC
    return io.with_schema("norm", body), code


def cmd_kpos(args, cfg):
    if args.lambda_family:
        if args.lam is None:
            raise UsageError("--lambda-family needs --lambda")
        cert = is_k_positive_phi_lambda(io.load_matrix(args.lambda_family), args.lam, args.k)
    else:
        if not args.map:
            raise UsageError("kpos needs --map or --lambda-family")
        phi = io.load_map(args.map)
        if args.k == min(phi.m, phi.n):
            cert = is_cp(phi, cfg.herm_tol)
        else:
            cert = is_k_block_positive(phi.choi, phi.m, phi.n, args.k, cfg)
    return io.with_schema("certificate", io.certificate_to_json(cert)), _verdict_exit(cert.verdict)


def cmd_blockpos(args, cfg):
    a, m, n = _operator_args(args)
    cert = is_k_block_positive(a, m, n, args.k, cfg)
    return io.with_schema("certificate", io.certificate_to_json(cert)), _verdict_exit(cert.verdict)


def cmd_witness(args, cfg):
    e = io.load_matrix(args.proj)
    m, n = (args.m, args.n) if args.m and args.n else _square_dims(e.shape[0])
    cone = Cone.parse(args.cone, args.k)
    try:
        rep = build_witness(e, m, n, cone, cfg)
    except Degenerate as exc:
        return io.with_schema("witness", {"degenerate": True, "reason": str(exc)}), EXIT_NO
    body = {"degenerate": False, **io.witness_report_to_json(rep)}
    return io.with_schema("witness", body), EXIT_OK


def cmd_centangled(args, cfg):
    e = io.load_matrix(args.proj)
    m, n = (args.m, args.n) if args.m and args.n else _square_dims(e.shape[0])
    ev = is_completely_entangled(e, m, n, cfg)
    body = {"completely_entangled": ev.completely_entangled, "mu": ev.mu, "rank_e": ev.rank_e,
            "reason": ev.reason,
            "best_product_vector": None if ev.best_product_vector is None
            else io.vector_to_json(ev.best_product_vector)}
    return io.with_schema("centangled", body), EXIT_OK if ev.completely_entangled else EXIT_NO


def cmd_supportbound(args, cfg):
    holds, rank_neg, bound = check_support_bound(io.load_map(args.map), args.k, cfg.herm_tol)
    body = {"k": args.k, "holds": holds, "rank_neg": rank_neg, "bound": bound}
    return io.with_schema("supportbound", body), EXIT_OK if holds else EXIT_NO


_DISTILL_EXIT = {"2-positive-certified": EXIT_OK, "not-2-positive": EXIT_NO}


def cmd_distill(args, cfg):
    rep = distill_report(io.load_matrix(args.V), args.lam, args.copies, cfg, run_prop5=not args.no_prop5)
    return io.with_schema("distill", io.distill_report_to_json(rep)), _DISTILL_EXIT.get(rep.overall, EXIT_HEURISTIC)


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` inclusive of ``stop`` (up to rounding)."""
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"bad --lambda-grid {text!r}; expected start:stop:step") from exc
    if step <= 0 or stop < start:
        raise UsageError("--lambda-grid needs step > 0 and stop >= start")
    count = int(np.floor((stop - start) / step + 1e-9))
    return [round(start + i * step, 12) for i in range(count + 1)]


def cmd_sweep_distill(args, cfg):
    if args.V:
        v = io.load_matrix(args.V)
    elif args.family == "max-entangled":
        if not args.d:
            raise UsageError("--family max-entangled needs --d")
        v = max_entangled_family(args.d)
    else:
        raise UsageError("sweep-distill needs --family or --V")
    rows = sweep_distill(v, parse_grid(args.lambda_grid), args.copies, cfg, run_prop5=args.prop5)
    buf = _io.StringIO()
    fieldnames = list(dict.fromkeys(key for row in rows for key in row))
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue(), EXIT_OK


HANDLERS = {
    "choi": cmd_choi, "apply": cmd_apply, "kyfan": cmd_kyfan, "schmidt-norm": cmd_schmidt_norm,
    "kpos": cmd_kpos, "blockpos": cmd_blockpos, "witness": cmd_witness, "centangled": cmd_centangled,
    "supportbound": cmd_supportbound, "distill": cmd_distill, "sweep-distill": cmd_sweep_distill,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="choi-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file overriding RunConfig fields")
    parser.add_argument("--seed", type=int, help="overrides config and $CHOI_LAB_SEED")
    parser.add_argument("--restarts", type=int)
    parser.add_argument("--threads", type=int, help="cap BLAS worker threads")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("choi", help="build a map and print its Choi matrix")
    p.add_argument("--V")
    p.add_argument("--kraus", nargs="+")
    p.add_argument("--trace", nargs="+", type=int, metavar="DIM")
    p.add_argument("--identity", type=int, metavar="D")
    p.add_argument("--lambda", dest="lam", type=float, help="return Tr - lambda * phi")

    p = sub.add_parser("apply", help="apply a map to a matrix")
    p.add_argument("--map", required=True)
    p.add_argument("--x", required=True)

    p = sub.add_parser("kyfan", help="squared Ky Fan norm")
    p.add_argument("--V", required=True)
    p.add_argument("--k", type=int, required=True)

    def operator_opts(q):
        q.add_argument("--map")
        q.add_argument("--A")
        q.add_argument("--m", type=int)
        q.add_argument("--n", type=int)

    p = sub.add_parser("schmidt-norm", help="Schmidt operator norm / cone norm")
    operator_opts(p)
    p.add_argument("--k", type=int)
    p.add_argument("--cone", help="P, CP, Pk (with --k) or Pk(2)")

    p = sub.add_parser("kpos", help="k-positivity certificate")
    p.add_argument("--map")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--lambda-family", dest="lambda_family", help="V.json: test Tr - lambda Ad_V exactly")
    p.add_argument("--lambda", dest="lam", type=float)

    p = sub.add_parser("blockpos", help="k-block positivity of an operator")
    operator_opts(p)
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("witness", help="witness map from a projection")
    p.add_argument("--proj", required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--cone", default="P")
    p.add_argument("--k", type=int)

    p = sub.add_parser("centangled", help="is the range of a projection completely entangled")
    p.add_argument("--proj", required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)

    p = sub.add_parser("supportbound", help="rank of the negative part vs (m-k)(n-k)")
    p.add_argument("--map", required=True)
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("distill", help="2-positivity of (Tr - lambda Ad_V)^{x n}")
    p.add_argument("--V", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--copies", type=int, default=2, choices=(1, 2))
    p.add_argument("--no-prop5", action="store_true", help="skip the see-saw norm criterion")

    p = sub.add_parser("sweep-distill", help="CSV of distillability verdicts over a lambda grid")
    p.add_argument("--family", choices=("max-entangled",))
    p.add_argument("--V")
    p.add_argument("--d", type=int)
    p.add_argument("--lambda-grid", required=True)
    p.add_argument("--copies", type=int, default=2, choices=(1, 2))
    p.add_argument("--prop5", action="store_true", help="also evaluate the see-saw norm criterion")
    return parser


def _thread_limit(threads):
    if not threads:
        return contextlib.nullcontext()
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        logging.getLogger(__name__).warning("threadpoolctl not installed; --threads ignored")
        return contextlib.nullcontext()
    return threadpool_limits(limits=threads)


def run(argv=None, stdout=None, stderr=None) -> int:
    """Parse ``argv``, run one command, write its output, return the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(argv)
        cfg = RunConfig.load(args.config)
        if args.seed is not None:
            cfg = cfg.replace(seed=args.seed)
        if args.restarts is not None:
            cfg = cfg.replace(restarts=args.restarts)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, stream=stderr)
        with _thread_limit(args.threads):
            out, code = HANDLERS[args.command](args, cfg)
    except UsageError as exc:
        print(str(exc), file=stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=stderr)
        return EXIT_NUMERIC
    except (ChoiLabError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    stdout.write(out if isinstance(out, str) else io.dumps(out) + "\n")
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
