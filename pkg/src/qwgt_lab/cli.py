"""``qwgt-lab`` command line interface.

Exit codes: 0 success, 1 verification failure, 2 malformed input,
3 enumeration cap or oracle guard exceeded, 4 domain error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from . import __version__
from .errors import DimensionError, DomainError, InputError, InstanceTooLarge
from .gf2 import Gf2Vector, default_cap, kernel_basis
from .graph import Graph, graph_from_json, graph_to_json, incidence_matrix, load_json, parse_bits
from .knots import crossing_from_json, kauffman_couplings, potts_q2_direct, q_of_A, kauffman_q2_via_qwgt
from .qwgt import ORACLE_GUARD, matrix_from_json, qwgt_bound_check, qwgt_bruteforce, qwgt_from_json, qwgt_kernel, kl_sign
from .report import MethodResult, RunReport
from .scalars import Scalar, format_scalar, log_scalar, parse_scalar
from .spinglass import (
    DOUBLE_TRANSFORM_VERTEX_GUARD,
    SpinGlassInstance,
    evaluate_kernel,
    partition_direct,
    partition_double_transform,
    partition_series,
    qwgt_bridge,
)

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_CAP, EXIT_DOMAIN = 0, 1, 2, 3, 4
Z_METHODS = ("direct", "fourier", "kernel", "series", "qwgt")


def _timed(fn: Callable[[], Any]) -> tuple[Any, float]:
    t0 = time.perf_counter()
    out = fn()
    return out, round((time.perf_counter() - t0) * 1000, 3)


def _scalar_arg(text: str, name: str) -> Scalar:
    s = text.strip()
    if s.startswith("{"):
        try:
            raw = json.loads(s)
        except json.JSONDecodeError as exc:
            raise InputError(f"--{name}: {exc.msg} at column {exc.colno}") from exc
        return parse_scalar(raw, f"--{name}")
    return parse_scalar(s, f"--{name}")


def _instance(args: argparse.Namespace, G: Graph, w: Gf2Vector) -> SpinGlassInstance:
    if args.w is not None:
        w = parse_bits(args.w, "--w")
        if w.length != G.num_edges:
            raise InputError(f"--w has {w.length} bits, graph has {G.num_edges} edges")
    if args.betaJ is not None:
        return SpinGlassInstance(G, w, beta_j=_scalar_arg(args.betaJ, "betaJ"))
    return SpinGlassInstance(G, w, lam=_scalar_arg(args.lam, "lambda"))


def _emit(args: argparse.Namespace, payload: dict[str, Any]) -> None:
    text = json.dumps(payload, indent=2)
    print(text)
    if getattr(args, "json_out", None):
        Path(args.json_out).write_text(text + "\n")


def _ms(args: argparse.Namespace, value: float) -> float | None:
    return None if args.no_timing else value


# --- commands --------------------------------------------------------------------


def _z_value(inst: SpinGlassInstance, method: str, args: argparse.Namespace) -> tuple[Scalar, int]:
    """Evaluate Z with one method; returns (value, terms evaluated)."""
    V, E = inst.num_vertices, inst.num_edges
    if method == "direct":
        return partition_direct(inst), 1 << V
    if method == "fourier":
        return partition_double_transform(inst), 1 << (V + E)
    if method == "kernel":
        ev = evaluate_kernel(inst, cap=args.cap, threads=args.threads)
        return ev.Z, ev.terms
    if method == "series":
        order = getattr(args, "order", None)
        order = E if order is None else order
        res = partition_series(inst, order, cap=args.cap)
        return res.partial_sums[-1], res.terms_evaluated
    if method == "qwgt":
        br = qwgt_bridge(inst, cap=args.cap)
        dim = kernel_basis(incidence_matrix(inst.graph)).dim
        return inst.prefactor() * br.rhs, 1 << dim
    raise InputError(f"unknown method {method!r}")


def cmd_z_eval(args: argparse.Namespace) -> int:
    G, w = graph_from_json(load_json(args.graph), str(args.graph))
    inst = _instance(args, G, w)
    dim = kernel_basis(incidence_matrix(G)).dim
    (Z, terms), ms = _timed(lambda: _z_value(inst, args.method, args))
    logz = log_scalar(Z) if Z != 0 else None
    _emit(
        args,
        {
            "Z": format_scalar(Z),
            "logZ": None if logz is None else format_scalar(logz),
            "method": args.method,
            "kernel_dim": dim,
            "terms_evaluated": terms,
            "elapsed_ms": _ms(args, ms),
        },
    )
    return EXIT_OK


def cmd_qwgt_eval(args: argparse.Namespace) -> int:
    inst = qwgt_from_json(load_json(args.instance), str(args.instance))
    report = RunReport("qwgt-eval", kernel_dim=kernel_basis(inst.A).dim)
    value, ms = _timed(lambda: qwgt_kernel(inst, cap=args.cap, threads=args.threads))
    report.add(MethodResult("kernel", value, 1 << report.kernel_dim, _ms(args, ms)))
    if args.method in ("both", "bruteforce") and inst.n <= ORACLE_GUARD:
        brute, ms = _timed(lambda: qwgt_bruteforce(inst))
        report.add(MethodResult("bruteforce", brute, 1 << inst.n, _ms(args, ms)))
    report.extra.update({"n": inst.n, "value": format_scalar(value), "bound_holds": qwgt_bound_check(inst, value)})
    _emit(args, report.to_json(timing=not args.no_timing))
    return EXIT_OK


def cmd_kl_sign(args: argparse.Namespace) -> int:
    obj = load_json(args.matrix)
    raw = obj.get("A") if isinstance(obj, dict) else obj
    A = matrix_from_json(raw, f"{args.matrix}.A")
    res, ms = _timed(lambda: kl_sign(A, args.k, args.l))
    report = RunReport("kl-sign", kernel_dim=kernel_basis(A).dim)
    report.add(MethodResult("bruteforce", Fraction(res.value), 1 << A.ncols, _ms(args, ms)))
    report.extra.update(
        {
            "sign": res.sign_symbol,
            "value": str(res.value),
            "promise_holds": res.promise_holds,
            "promise_bound": repr(res.promise_bound),
            "n": res.n,
            "k": res.k,
            "l": res.l,
        }
    )
    _emit(args, report.to_json(timing=not args.no_timing))
    return EXIT_OK


def cmd_kauffman(args: argparse.Namespace) -> int:
    cfg, A = crossing_from_json(load_json(args.crossing), str(args.crossing))
    res, ms = _timed(lambda: kauffman_q2_via_qwgt(A, cfg, cap=args.cap, threads=args.threads))
    report = RunReport("kauffman", kernel_dim=res.kernel_dim)
    report.add(MethodResult("qwgt", res.value, 1 << res.kernel_dim, _ms(args, ms)))
    if cfg.lattice.num_vertices <= ORACLE_GUARD:
        direct, ms = _timed(lambda: potts_q2_direct(cfg.lattice, kauffman_couplings(A, cfg)))
        report.add(MethodResult("potts_direct", direct, 1 << cfg.lattice.num_vertices, _ms(args, ms)))
    report.extra.update(
        {
            "value": format_scalar(res.value),
            "q": format_scalar(q_of_A(A)),
            "lambda": format_scalar(res.lam),
            "prefactor": format_scalar(res.prefactor),
            "w": res.w.to_list(),
            "bracket_up_to_constant": res.bracket_up_to_constant,
        }
    )
    _emit(args, report.to_json(timing=not args.no_timing))
    return EXIT_OK


def cmd_kernel_basis(args: argparse.Namespace) -> int:
    obj = load_json(args.input)
    if isinstance(obj, dict) and "vertices" in obj:
        G, _ = graph_from_json(obj, str(args.input))
        M = incidence_matrix(G)
        source = "incidence"
    elif isinstance(obj, dict) and "A" in obj:
        ncols = len(obj["B"]) if not obj["A"] and isinstance(obj.get("B"), list) else None
        M = matrix_from_json(obj["A"], f"{args.input}.A", ncols=ncols)
        source = "A"
    else:
        raise InputError(f"{args.input}: expected a graph or a QWGT instance")
    basis = kernel_basis(M)
    _emit(args, {"source": source, "n": basis.length, "dim": basis.dim, "basis": [v.to_list() for v in basis]})
    return EXIT_OK


def cmd_series(args: argparse.Namespace) -> int:
    G, w = graph_from_json(load_json(args.graph), str(args.graph))
    inst = _instance(args, G, w)
    order = G.num_edges if args.order is None else args.order
    res, ms = _timed(lambda: partition_series(inst, order, cap=args.cap))
    _emit(
        args,
        {
            "order": order,
            "partial_sums": [format_scalar(z) for z in res.partial_sums],
            "coefficients": list(res.coefficients),
            "exact": None if res.exact is None else format_scalar(res.exact),
            "terms_evaluated": res.terms_evaluated,
            "elapsed_ms": _ms(args, ms),
        },
    )
    return EXIT_OK


def _feasible_methods(G: Graph, cap: int) -> list[str]:
    V, E = G.num_vertices, G.num_edges
    methods = []
    if V <= ORACLE_GUARD:
        methods.append("direct")
    if E <= ORACLE_GUARD and V <= DOUBLE_TRANSFORM_VERTEX_GUARD:
        methods.append("fourier")
    dim = kernel_basis(incidence_matrix(G)).dim
    if (1 << dim) <= cap:
        methods.append("kernel")
        methods.append("qwgt")
    if (1 << E) <= cap:
        methods.append("series")
    return methods


def cmd_verify(args: argparse.Namespace) -> int:
    G, _ = graph_from_json(load_json(args.graph), str(args.graph))
    cap = default_cap() if args.cap is None else args.cap
    methods = _feasible_methods(G, cap)
    if len(methods) < 2:
        raise InstanceTooLarge("verification (fewer than two feasible methods)", 2, len(methods))
    rng = random.Random(args.seed)
    trials = []
    worst = 0.0
    failure = None
    elapsed = {m: 0.0 for m in methods}
    for t in range(args.trials):
        w = Gf2Vector(rng.getrandbits(G.num_edges) if G.num_edges else 0, G.num_edges)
        beta_j = rng.uniform(0.1, 2.0)
        inst = SpinGlassInstance(G, w, beta_j=beta_j)
        report = RunReport("verify")
        for m in methods:
            (value, terms), ms = _timed(lambda: _z_value(inst, m, args))
            elapsed[m] += ms
            report.add(MethodResult(m, value, terms))
        rel = report.max_discrepancy()
        worst = max(worst, rel)
        trials.append({"trial": t, "w": w.to_list(), "betaJ": repr(beta_j), "max_rel": rel})
        if rel > args.tolerance and failure is None:
            failure = {
                "instance": graph_to_json(G, w),
                "betaJ": repr(beta_j),
                "values": {m.name: format_scalar(m.value) for m in report.methods},
                "max_rel": rel,
                "tolerance": args.tolerance,
            }
    passed = failure is None
    payload = {
        "command": "verify",
        "graph": str(args.graph),
        "methods": methods,
        "trials": args.trials,
        "seed": args.seed,
        "tolerance": args.tolerance,
        "max_discrepancy": worst,
        "passed": passed,
        "per_trial": trials,
        "elapsed_ms": None if args.no_timing else {m: round(v, 3) for m, v in elapsed.items()},
    }
    if failure is not None:
        Path(args.dump).write_text(json.dumps(failure, indent=2) + "\n")
        payload["failure_dump"] = str(args.dump)
    _emit(args, payload)
    return EXIT_OK if passed else EXIT_VERIFY


# --- parser ------------------------------------------------------------------------


def _positive_int(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cap", type=_positive_int, default=None, help="enumeration cap (default 2^28 or $QWGT_LAB_CAP)")
    common.add_argument("--threads", type=_positive_int, default=1, help="worker threads for kernel enumeration")
    common.add_argument("--json-out", dest="json_out", default=None, help="also write the JSON result here")
    common.add_argument("--no-timing", dest="no_timing", action="store_true", help="emit null timings (byte-stable output)")

    coupling = argparse.ArgumentParser(add_help=False)
    group = coupling.add_mutually_exclusive_group(required=True)
    group.add_argument("--betaJ", default=None, help="beta*J as decimal, p/q or {\"re\":..,\"im\":..}")
    group.add_argument("--lambda", dest="lam", default=None, help="tanh(beta*J); use p/q for exact arithmetic")
    coupling.add_argument("--w", default=None, help="override bond signs, e.g. 0110")

    p = argparse.ArgumentParser(prog="qwgt-lab", description="Exact QWGT and +-J spin-glass partition functions.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    z = sub.add_parser("z-eval", parents=[common, coupling], help="partition function of a graph")
    z.add_argument("graph")
    z.add_argument("--method", choices=Z_METHODS, default="kernel")
    z.add_argument("--order", type=int, default=None, help="series order (method=series)")
    z.set_defaults(func=cmd_z_eval)

    q = sub.add_parser("qwgt-eval", parents=[common], help="evaluate S(A, B, x, y) from a JSON instance")
    q.add_argument("instance")
    q.add_argument("--method", choices=("kernel", "bruteforce", "both"), default="both")
    q.set_defaults(func=cmd_qwgt_eval)

    k = sub.add_parser("kl-sign", parents=[common], help="sign and promise check of S(A, ltr(A), k, l)")
    k.add_argument("matrix")
    k.add_argument("k", type=int)
    k.add_argument("l", type=int)
    k.set_defaults(func=cmd_kl_sign)

    kf = sub.add_parser("kauffman", parents=[common], help="Potts q=2 / Kauffman bracket up to a constant")
    kf.add_argument("crossing")
    kf.set_defaults(func=cmd_kauffman)

    kb = sub.add_parser("kernel-basis", parents=[common], help="GF(2) kernel basis of an incidence or QWGT matrix")
    kb.add_argument("input")
    kb.set_defaults(func=cmd_kernel_basis)

    s = sub.add_parser("series", parents=[common, coupling], help="high-temperature series partial sums")
    s.add_argument("graph")
    s.add_argument("--order", type=int, default=None)
    s.set_defaults(func=cmd_series)

    v = sub.add_parser("verify", parents=[common], help="cross-check all feasible methods on random bonds")
    v.add_argument("graph")
    v.add_argument("--trials", type=_positive_int, default=50)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tolerance", type=float, default=1e-10)
    v.add_argument("--dump", default="verify-failure.json", help="where to write the first failing instance")
    v.set_defaults(func=cmd_verify)
    return p


def _fail(exc: Exception, code: int) -> int:
    print(f"qwgt-lab: error: {exc}", file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InstanceTooLarge as exc:
        return _fail(exc, EXIT_CAP)
    except DomainError as exc:
        return _fail(exc, EXIT_DOMAIN)
    except (InputError, DimensionError) as exc:
        return _fail(exc, EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
