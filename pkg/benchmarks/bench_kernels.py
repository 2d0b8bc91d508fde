"""Compare the compiled and numpy recovery-sweep kernels.

Usage: python benchmarks/bench_kernels.py [--repeat R] [--nodes N] [--blocks 2x2 3x3 ...]
"""
import argparse
import sys
import timeit

import numpy as np

from mrlab import _kernels_py
from mrlab.algebra import InclusionSpec, random_state
from mrlab.recovery import PetzData, QuadratureSpec

try:
    from mrlab import _kernels as _compiled
except ImportError:
    _compiled = None


def bench(blocks, nodes, repeat):
    spec = InclusionSpec.parse(blocks)
    sigma = random_state(spec.n, seed=1)
    rho = random_state(spec.n, seed=2)
    data = PetzData(spec, sigma)
    inp = data.sweep_inputs(rho)
    quad = QuadratureSpec(nodes)
    args = [inp[k] for k in ("sqrt_rho", "s", "ut", "y", "lq", "b_index", "label")]
    args += [np.ascontiguousarray(quad.nodes), np.ascontiguousarray(quad.weights)]
    row = {"blocks": blocks, "n": spec.n}
    row["python"] = min(timeit.repeat(lambda: _kernels_py.recovery_sweep(*args), number=1, repeat=repeat))
    if _compiled is not None:
        row["cython"] = min(timeit.repeat(lambda: _compiled.recovery_sweep(*args), number=1, repeat=repeat))
        f1, r1 = _compiled.recovery_sweep(*args)
        f2, r2 = _kernels_py.recovery_sweep(*args)
        row["max_diff"] = float(max(np.abs(f1 - f2).max(), np.abs(r1 - r2).max()))
    return row


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--nodes", type=int, default=48)
    ap.add_argument("--blocks", nargs="+", default=["2x2", "2x3", "3x3", "2x2,1x3", "4x4"])
    args = ap.parse_args(argv)
    if _compiled is None:
        print("compiled kernels unavailable; timing numpy only", file=sys.stderr)
    print(f"{'blocks':>10} {'n':>3} {'python ms':>10} {'cython ms':>10} {'speedup':>8} {'max diff':>9}")
    rows = []
    for b in args.blocks:
        r = bench(b, args.nodes, args.repeat)
        rows.append(r)
        cy = r.get("cython")
        print(f"{r['blocks']:>10} {r['n']:>3} {1e3 * r['python']:>10.3f} "
              f"{(1e3 * cy if cy else float('nan')):>10.3f} "
              f"{(r['python'] / cy if cy else float('nan')):>8.2f} {r.get('max_diff', float('nan')):>9.1e}")
    return rows


if __name__ == "__main__":
    main()
