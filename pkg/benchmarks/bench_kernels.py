"""Time the hot kernels compiled with numba against their plain-Python fallback.

Each mode runs in its own interpreter because the switch is read at import:

    python3 benchmarks/bench_kernels.py                 # both modes, default arities
    python3 benchmarks/bench_kernels.py --arity "(6;0,0,0,0,0,0)" --repeat 3

The compiled mode is warmed up on a small arity first so compilation time is
not counted.  The two modes must produce identical results; the script
checks this with a digest of the kernel outputs.
"""

import argparse
import hashlib
import json
import os
import subprocess
import sys
import time

import numpy as np

DEFAULT_ARITIES = ["(4;0,0,0,0)", "(3;1,1,0)", "(5;0,0,0,0,0)"]


def _measure(arity_text, repeat):
    from cloven import kernels
    from cloven.arity import Arity
    from cloven.chain_complex import build_cell_table, class_bit_table
    from cloven._enumerate import enumerate_codes

    arity = Arity.parse(arity_text)
    n = arity.n_leaves
    is_out = np.array([arity.is_output(p) for p in range(n)], dtype=np.bool_)
    bits = class_bit_table(n)
    table = build_cell_table(arity)
    m = len(table)
    times = {}
    digest = hashlib.sha256()

    def timed(name, fn):
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            out = fn()
            best = min(best, time.perf_counter() - t0)
        times[name] = best
        return out

    timed("enumerate", lambda: enumerate_codes(arity))
    nv, nb, cm = timed("census", lambda: kernels.census(table.hi, table.lo, table.ntok, is_out, bits))
    ptr, idx, sgn = timed(
        "coboundary",
        lambda: kernels.coboundary(table.hi, table.lo, table.ntok, table.nverts, kernels.SIGN_PREORDER),
    )
    tptr, tidx, tsgn = timed("transpose", lambda: kernels.transpose_csr(ptr, idx, sgn, m))
    member = np.ones(m, dtype=np.bool_)
    d2 = timed("d_squared", lambda: kernels.d_squared_defects(ptr, idx, sgn, member))
    degree = table.syzygy
    order = np.argsort(degree, kind="stable")

    def reduce():
        scratch = [np.zeros(m, dt) for dt in (np.bool_, np.int64, np.bool_, np.int8, np.int64, np.int64)]
        aces = kernels.morse_reduce(ptr, idx, tptr, tidx, order, degree, *scratch)
        return aces, scratch

    aces, scratch = timed("morse_reduce", reduce)
    for arr in (nv, nb, cm, ptr, idx, sgn, np.asarray(d2[:1]), aces):
        digest.update(np.ascontiguousarray(arr).tobytes())
    return {"arity": arity_text, "cells": m, "times": times, "digest": digest.hexdigest()}


def _child(args):
    from cloven._jit import JIT_ENABLED

    if JIT_ENABLED:
        _measure("(3;0,0,0)", 1)
    rows = [_measure(a, args.repeat) for a in args.arity]
    print(json.dumps({"jit": JIT_ENABLED, "rows": rows}))


def _run_mode(jit, args):
    env = dict(os.environ)
    if jit:
        env.pop("CLOVEN_DISABLE_JIT", None)
    else:
        env["CLOVEN_DISABLE_JIT"] = "1"
    cmd = [sys.executable, __file__, "--child", "--repeat", str(args.repeat)]
    for a in args.arity:
        cmd += ["--arity", a]
    out = subprocess.run(cmd, env=env, check=True, capture_output=True, text=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--arity", action="append", help="arity to time (repeatable)")
    p.add_argument("--repeat", type=int, default=1)
    p.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = p.parse_args(argv)
    args.arity = args.arity or DEFAULT_ARITIES
    if args.child:
        _child(args)
        return 0
    jit = _run_mode(True, args)
    pure = _run_mode(False, args)
    ok = True
    print(f"{'arity':<18}{'cells':>8}  {'kernel':<14}{'numba s':>10}{'python s':>11}{'speedup':>9}")
    for a, b in zip(jit["rows"], pure["rows"]):
        for name, t in a["times"].items():
            u = b["times"][name]
            print(f"{a['arity']:<18}{a['cells']:>8}  {name:<14}{t:>10.4f}{u:>11.4f}{u / max(t, 1e-9):>8.1f}x")
        same = a["digest"] == b["digest"]
        ok &= same
        print(f"{a['arity']:<18}{'':>8}  outputs {'identical' if same else 'DIFFER'}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
