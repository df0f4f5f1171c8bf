"""Command-line front end. Every subcommand prints one JSON report.

Reports share an envelope; everything except the ``runtime`` block is a pure
function of the command, its inputs and the seed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import secrets
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .approx import approx_count_parallel, approx_count_ratio, within_factor
from .am import MerlinStrategy, bound_audit, make_fixture, rounds_for, simulate
from .cnf import DEFAULT_VAR_BUDGET, conjoin, parse_dimacs
from .errors import ToolkitError
from .field import load_matrix
from .machine import boost, identity_reduction, run_reduction
from .oracles import (
    MAX_COUNT_VARS,
    FaultyOracle,
    PermanentOracle,
    SatOracle,
    count_exact,
    permanent_exact,
)
from .rsr import perm_rsr
from .util import derive_rng, split_seed

# flags that may change speed but never results
_RUNTIME_FLAGS = {"workers", "json", "func", "command"}


class UsageError(Exception):
    pass


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _fraction_arg(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _int_list(text: str) -> list[int]:
    """'4', '1,2,5' or '1..8'."""
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",")]


# --------------------------------------------------------------------------
# subcommands; each returns (outputs, inputs digest material)


def cmd_count_exact(args, seed):
    data = _read(args.file)
    f = parse_dimacs(data.decode())
    return {"value": count_exact(f), "queries": 1}, [data]


def cmd_perm_exact(args, seed):
    data = _read(args.file)
    a = load_matrix(args.file)
    return {"value": permanent_exact(a).value, "modulus": a.modulus, "queries": 1}, [data]


def cmd_count_approx(args, seed):
    data = _read(args.file)
    f = parse_dimacs(data.decode())
    oracle = SatOracle(workers=args.workers)
    rng = derive_rng(seed, "count-approx")
    inputs = [data]
    if args.ratio:
        hdata = _read(args.ratio)
        h = parse_dimacs(hdata.decode())
        inputs.append(hdata)
        res = approx_count_ratio(f, h, args.factor, args.delta, oracle, rng,
                                 shared_plan=args.shared_plan, budget=args.budget_vars)
        exact = None
        if f.var_count <= MAX_COUNT_VARS:
            exact = Fraction(count_exact(conjoin(f, h)), count_exact(h))
    else:
        res = approx_count_parallel(f, args.factor, args.delta, oracle, rng,
                                    budget=args.budget_vars)
        exact = count_exact(f) if f.var_count <= MAX_COUNT_VARS else None
    out = {
        "estimate": res.estimate,
        "estimate_float": float(res.estimate),
        "factor": res.target_factor,
        "delta": args.delta,
        "rounds": res.oracle_rounds,
        "repetitions": res.repetitions,
        "amplification": res.amplification,
        "queries": res.queries,
        "exact": exact,
        "within_factor": None if exact is None else within_factor(res.estimate, exact, res.target_factor),
    }
    if not args.ratio:
        out["probability"] = res.probability(f.var_count)
    return out, inputs


def _perm_reduction_run(args, seed, reduction: str, matrix_path: str):
    data = _read(matrix_path)
    a = load_matrix(matrix_path)
    if reduction == "perm-rsr":
        rr = perm_rsr(a.n, a.modulus)
    elif reduction == "identity":
        rr = identity_reduction(f"perm[{a.n},{a.modulus}]")
    else:
        raise UsageError(f"unknown reduction {reduction!r}; choose perm-rsr or identity")
    if args.boost:
        rr = boost(rr, args.boost)
    oracle = PermanentOracle(workers=args.workers)
    if args.fault:
        oracle = FaultyOracle(oracle, args.fault, split_seed(seed, "fault"))
    output = run_reduction(rr, a, oracle, derive_rng(seed, "reduction"))
    truth = permanent_exact(a).value
    return {
        "reduction": rr.name,
        "output": int(output),
        "queries": oracle.stats.total_queries,
        "rounds": oracle.stats.rounds,
        "truth": truth,
        "success": int(output) == truth,
    }, [data]


def cmd_rsr_perm(args, seed):
    return _perm_reduction_run(args, seed, "perm-rsr", args.matrix)


def cmd_rr_run(args, seed):
    return _perm_reduction_run(args, seed, args.reduction, args.input)


def cmd_am_sim(args, seed):
    try:
        fixture = make_fixture(args.fixture, args.k, args.n)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    k = fixture.rr.k
    if args.merlin == "honest":
        merlin = MerlinStrategy.honest()
    else:
        lies = rounds_for(k) if args.lies is None else args.lies
        merlin = MerlinStrategy.adversarial(args.target, lies, spread=args.spread,
                                            greedy=not args.blanket)
    planted = args.planted or ("yes" if args.merlin == "honest" else "no")
    rep = simulate(fixture, args.k, args.n, merlin, args.sessions, seed, planted)
    audit = bound_audit([k], [args.n])
    return {
        "fixture": fixture.name,
        "k": k,
        "n": args.n,
        "m": rep.m,
        "planted": planted,
        "merlin": args.merlin,
        "sessions": rep.sessions,
        "accept_rate": rep.accept_rate,
        "per_check_failures": rep.failures,
        "per_check_failures_any": rep.failures_any,
        "thresholds": rep.thresholds,
        "mean_z": rep.mean_z,
        "advice": list(rep.advice.probabilities),
        "audit": {"per_k": audit["per_k"][0], "pair": audit["pairs"][0]},
    }, []


def cmd_audit_bounds(args, seed):
    ks, ns = _int_list(args.k), _int_list(args.n)
    report = bound_audit(ks, ns)
    report["all_identities_hold"] = all(
        r["sqrt_exact"] and r["lying_gap_is_3k2"] and r["chernoff_exponent_is_2k"]
        and r["chebyshev_is_1_over_4k"] and r["chernoff_le_1_over_4k"]
        for r in report["per_k"]
    )
    return report, []


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=None, help="master seed (u64); drawn fresh if absent")
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                        help="processes used to answer a query batch")
    common.add_argument("--json", dest="json", action="store_true", default=True)
    common.add_argument("--no-json", dest="json", action="store_false",
                        help="print 'key: value' lines instead of JSON")
    common.add_argument("--budget-vars", type=int, default=DEFAULT_VAR_BUDGET)

    parser = argparse.ArgumentParser(prog="rrkit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rrkit {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("count-exact", parents=[common], help="exact model count of a DIMACS file")
    p.add_argument("file")
    p.set_defaults(func=cmd_count_exact)

    p = sub.add_parser("perm-exact", parents=[common], help="Ryser permanent of a matrix JSON")
    p.add_argument("file")
    p.set_defaults(func=cmd_perm_exact)

    p = sub.add_parser("count-approx", parents=[common], help="one-round approximate counting")
    p.add_argument("file")
    p.add_argument("--factor", type=_fraction_arg, default=Fraction(2))
    p.add_argument("--delta", type=_fraction_arg, default=Fraction(1, 10))
    p.add_argument("--ratio", metavar="H_CNF", help="estimate Pr[f | h] instead of #f")
    p.add_argument("--shared-plan", action="store_true")
    p.set_defaults(func=cmd_count_approx)

    p = sub.add_parser("rsr-perm", parents=[common], help="permanent via its random self-reduction")
    p.add_argument("--matrix", required=True)
    p.add_argument("--fault", type=float, default=0.0)
    p.add_argument("--boost", type=int, default=0)
    p.set_defaults(func=cmd_rsr_perm)

    p = sub.add_parser("rr-run", parents=[common], help="run a named random reduction once")
    p.add_argument("--reduction", required=True, choices=["perm-rsr", "identity"])
    p.add_argument("--input", required=True)
    p.add_argument("--fault", type=float, default=0.0)
    p.add_argument("--boost", type=int, default=0)
    p.set_defaults(func=cmd_rr_run)

    p = sub.add_parser("am-sim", parents=[common], help="simulate the Arthur-Merlin protocol")
    p.add_argument("--fixture", default="parity")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--n", type=int, default=14)
    p.add_argument("--merlin", choices=["honest", "adversarial"], default="honest")
    p.add_argument("--lies", type=int, default=None, help="per-index lie budget (default m)")
    p.add_argument("--target", type=int, default=0)
    p.add_argument("--spread", action="store_true", help="let the adversary lie on any index")
    p.add_argument("--blanket", action="store_true", help="deny every satisfiable target query")
    p.add_argument("--planted", choices=["yes", "no"], default=None)
    p.add_argument("--sessions", type=int, default=100)
    p.set_defaults(func=cmd_am_sim)

    p = sub.add_parser("audit-bounds", parents=[common], help="check the protocol's arithmetic")
    p.add_argument("--k", default="1..8", help="k values: '4', '1,2,5' or '1..8'")
    p.add_argument("--n", default="20", help="n values, same syntax")
    p.set_defaults(func=cmd_audit_bounds)
    return parser


def run(argv: list[str] | None = None) -> tuple[int, dict | None]:
    parser = build_parser()
    args = parser.parse_args(argv)
    seed = args.seed if args.seed is not None else secrets.randbits(64)
    start = time.perf_counter()
    try:
        outputs, inputs = args.func(args, seed)
    except UsageError as exc:
        parser.error(str(exc))
    except ToolkitError as exc:
        print(f"rrkit {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1, None
    elapsed = (time.perf_counter() - start) * 1000
    echo = {k: v for k, v in vars(args).items() if k not in _RUNTIME_FLAGS and k != "seed"}
    h = hashlib.sha256()
    for blob in inputs:
        h.update(hashlib.sha256(blob).digest())
    report = {
        "command": args.command,
        "args": echo,
        "seed": seed,
        "inputs_digest": h.hexdigest()[:16],
        "outputs": outputs,
        "version": __version__,
        "runtime": {"elapsed_ms": round(elapsed, 3), "workers": args.workers},
    }
    report = _jsonable(report)
    if args.json:
        print(json.dumps(report, sort_keys=True))
    else:
        for key, value in report["outputs"].items():
            print(f"{key}: {value}")
    return 0, report


def main(argv: list[str] | None = None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
