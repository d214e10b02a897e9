"""Command-line front end.

Exit status: 0 success (or "trivializable"), 1 negative verdict or failed
check, 2 usage, parse, dimension or evaluation error.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .connection import compute_connection, verify_residuals
from .errors import (
    DimensionTooSmall,
    DivisionByZeroExpr,
    DslSyntaxError,
    EvalSingular,
    IndexOutOfRange,
    NotSymmetric,
    StencilOutOfDomain,
)
from .invariants import compute_all, trivializability_report
from .jet import JetPoint, circles_system, random_jet_point
from .oracle import FdConfig, NumericRhs, compare_with_symbolic, fd_invariants
from .parser import parse_system, render_system

EXIT_OK, EXIT_NO, EXIT_ERROR = 0, 1, 2

_USER_ERRORS = (
    DslSyntaxError,
    IndexOutOfRange,
    DimensionTooSmall,
    DivisionByZeroExpr,
    EvalSingular,
    StencilOutOfDomain,
    NotSymmetric,
    ValueError,
    OSError,
)


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.buffer.read().decode("utf-8")
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _parse_at(text: str, m: int) -> JetPoint:
    try:
        nums = [float(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise UsageError(f"--at expects comma-separated numbers, got {text!r}") from None
    if len(nums) != 1 + 3 * m:
        raise UsageError(f"--at needs 1+3m = {1 + 3 * m} numbers for m = {m}, got {len(nums)}")
    return JetPoint.from_flat(m, nums)


def _clean(x):
    """ndarray -> nested lists, with -0.0 printed as 0.0."""
    if isinstance(x, np.ndarray):
        return (x + 0.0).tolist()
    return x + 0.0


def _emit(args, payload: dict, pretty: str):
    if args.json:
        print(json.dumps(payload, indent=2, ensure_ascii=False))
    else:
        print(pretty)


def _pretty_tensor(name, data, depth) -> list:
    lines = []

    def walk(x, idx):
        if len(idx) == depth:
            lines.append(f"  {name}[{']['.join(str(i + 1) for i in idx)}] = {x}")
            return
        for i, sub in enumerate(x):
            walk(sub, idx + [i])

    walk(data, [])
    return lines


# ---------------------------------------------------------------------------
# commands


def cmd_invariants(args) -> int:
    system = parse_system(_read(args.file))
    inv = compute_all(system, threads=args.threads)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        _, diags = trivializability_report(system, inv)
    payload = inv.to_json()
    if diags:
        payload["diagnostics"] = diags
    lines = [f"m = {inv.m}"]
    for key, depth in (("W2", 2), ("I2", 3), ("W3", 2), ("I4", 2)):
        lines.append(f"{key}:")
        lines += _pretty_tensor(key, payload[key], depth)
    lines.append(f"Hx = {payload['Hx']}")
    lines += [f"Hm1[{j + 1}] = {h}" for j, h in enumerate(payload["Hm1"])]
    lines.append(f"I4 symmetric: {'yes' if payload['I4_symmetric'] else 'no'}")
    lines.append("trivializable" if payload["trivializable"] else "not trivializable")
    lines += [f"note: {d}" for d in diags]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_trivializable(args) -> int:
    system = parse_system(_read(args.file))
    inv = compute_all(system, threads=args.threads)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        verdict, diags = trivializability_report(system, inv)
    nonzero = [name for name, t in inv.components().items() if not t.is_zero()]
    payload = {"trivializable": verdict, "nonzero": nonzero}
    if diags:
        payload["diagnostics"] = diags
    text = "trivializable" if verdict else f"not trivializable (nonzero: {', '.join(nonzero)})"
    if diags:
        text += "\n" + "\n".join(f"note: {d}" for d in diags)
    _emit(args, payload, text)
    return EXIT_OK if verdict else EXIT_NO


def cmd_connection(args) -> int:
    system = parse_system(_read(args.file))
    conn = compute_connection(system)
    payload = {"version": 1, "m": system.m, **conn.to_json()}
    lines = [f"m = {system.m}", "alpha = beta = identity; D = F-1 = G-1 = 0"]
    for key in ("A", "B", "C", "Gx"):
        lines += _pretty_tensor(key, payload[key], 2)
    for key in ("Gm2", "Gm3"):
        lines += _pretty_tensor(key, payload[key], 3)
    for key in ("E", "Fm2", "Fm3", "Hm1", "Hm2", "Hm3"):
        lines += _pretty_tensor(key, payload[key], 1)
    lines.append(f"  Hx = {payload['Hx']}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def _cfg(args) -> FdConfig:
    base = FdConfig()
    step = args.step if args.step is not None else base.step
    if args.tol is not None:
        return FdConfig(step=step, tolerance=args.tol, relaxed_tolerance=max(args.tol, base.relaxed_tolerance))
    return FdConfig(step=step)


def cmd_check(args) -> int:
    system = parse_system(_read(args.file))
    cfg = _cfg(args)
    report = verify_residuals(system)
    inv = compute_all(system, threads=args.threads)
    rhs = NumericRhs.from_system(system)
    if args.at:
        points = [_parse_at(a, system.m) for a in args.at]
    else:
        rng = random.Random(args.seed)
        points = [random_jet_point(rng, system.m) for _ in range(3)]

    def probe(pt):
        entry = {"point": pt.flat()}
        try:
            cmp = compare_with_symbolic(inv, rhs, pt, cfg)
            entry.update(passed=cmp.passed, deviations=cmp.deviations)
        except (EvalSingular, StencilOutOfDomain) as exc:
            entry.update(passed=False, deviations={}, error=str(exc))
        return entry

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            oracle = list(pool.map(probe, points))
    else:
        oracle = [probe(pt) for pt in points]

    passed = report.passed and all(o["passed"] for o in oracle)
    payload = {"passed": passed, "residuals": [vars(ch) for ch in report.checks], "oracle": oracle}
    lines = [str(report)]
    for o in oracle:
        pt = ",".join(f"{v:.6g}" for v in o["point"])
        if "error" in o:
            lines.append(f"FAIL  oracle at ({pt}): {o['error']}")
        else:
            devs = " ".join(f"{k}={v:.2e}" for k, v in o["deviations"].items())
            lines.append(f"{'PASS' if o['passed'] else 'FAIL'}  oracle at ({pt}): {devs}")
    lines.append("all checks passed" if passed else "some checks FAILED")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if passed else EXIT_NO


def cmd_circles(args) -> int:
    if args.m is None:
        raise UsageError("circles requires --m")
    system = circles_system(args.m)
    sys.stdout.write(render_system(system))
    return EXIT_OK


def cmd_eval(args) -> int:
    system = parse_system(_read(args.file))
    if not args.at:
        raise UsageError("eval requires --at")
    if len(args.at) != 1:
        raise UsageError("eval takes exactly one --at")
    pt = _parse_at(args.at[0], system.m)
    if args.oracle:
        num = fd_invariants(NumericRhs.from_system(system), pt, _cfg(args))
        data = {**num.components(), "Hx": num.Hx, "Hm1": num.Hm1}
    else:
        data = compute_all(system, threads=args.threads).numeric(pt)
    payload = {"point": pt.flat(), "source": "oracle" if args.oracle else "symbolic"}
    payload.update({k: _clean(v) for k, v in data.items()})
    with np.printoptions(precision=10, suppress=True):
        lines = [f"point = {pt.flat()}"]
        for key in ("W2", "I2", "W3", "I4", "Hm1"):
            lines.append(f"{key} =\n{np.array2string(np.asarray(data[key]) + 0.0)}")
        lines.append(f"Hx = {_clean(data['Hx'])}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit JSON instead of text")
    common.add_argument("--threads", type=int, default=1, help="worker threads (output is identical)")

    numeric = argparse.ArgumentParser(add_help=False)
    numeric.add_argument("--at", action="append", metavar="x,y1..ym,p1..pm,q1..qm", help="jet point")
    numeric.add_argument("--step", type=float, help="finite-difference step h (default 1e-4)")
    numeric.add_argument("--tol", type=float, help="relative tolerance for W2 and I2 (default 1e-6)")

    ap = argparse.ArgumentParser(
        prog="cartan-ode",
        description="Differential invariants of systems y_i''' = f_i(x, y, y', y'').",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, parents=(common,), file=True):
        p = sub.add_parser(name, parents=list(parents), help=help_)
        if file:
            p.add_argument("file", help="system file, or - for stdin")
        p.set_defaults(func=fn)
        return p

    add("invariants", cmd_invariants, "print W2, I2, W3, I4, Hx, H-1")
    add("trivializable", cmd_trivializable, "exit 0 if point-equivalent to y''' = 0, else 1")
    add("connection", cmd_connection, "print the connection coefficients")
    chk = add("check", cmd_check, "residual identities plus oracle comparison", parents=(common, numeric))
    chk.add_argument("--seed", type=int, default=0, help="seed for random points when --at is absent")
    circ = add("circles", cmd_circles, "write the circles system in the input format", file=False)
    circ.add_argument("--m", type=int, help="dimension (>= 2)")
    ev = add("eval", cmd_eval, "numeric invariants at a jet point", parents=(common, numeric))
    ev.add_argument("--oracle", action="store_true", help="use finite differences instead of the symbolic result")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except _USER_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
