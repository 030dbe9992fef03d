"""Compiled tape kernel vs the NumPy fallback.

    python3 benchmarks/bench_eval.py [--points 25 1000 10000] [--repeat 5]

Workload: every generator coefficient of every distribution in the VTOL
classification traces, i.e. the expressions the rank tests evaluate.
"""
import argparse
import time

import numpy as np

from flatd2 import corpus
from flatd2.decision import classify
from flatd2.symexpr import Sampler
from flatd2.symexpr.evaluate import BACKEND, Tape


def workload():
    sys = corpus.load("vtol")
    exprs = []
    for trace in classify(sys).traces:
        for D in trace.distributions.values():
            for g in D.basis:
                exprs.extend(c for c in g.coeffs if not c.is_zero_const)
    return sys, list(dict.fromkeys(exprs))


def best_of(fn, repeat):
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return min(out)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, nargs="+", default=[25, 1000, 10000])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    sys, exprs = workload()
    tape = Tape(exprs, sys.domain.columns)
    print(f"{len(exprs)} roots, {len(tape.nodes)} tape nodes; default backend: {BACKEND}")
    backends = ["numpy"] + (["compiled"] if BACKEND == "compiled" else [])
    print(f"{'points':>8} " + " ".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for npts in args.points:
        inputs = Sampler(sys.domain, 0).matrix(npts)
        times = [best_of(lambda b=b: tape.run(inputs, b), args.repeat) for b in backends]
        if len(backends) == 2:
            v0, _ = tape.run(inputs, "numpy")
            v1, _ = tape.run(inputs, "compiled")
            assert np.allclose(v0, v1, rtol=1e-12, atol=1e-12, equal_nan=True)
        row = f"{npts:>8} " + " ".join(f"{t * 1e3:>10.3f}ms" for t in times)
        if len(times) == 2:
            row += f"  {times[0] / times[1]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
