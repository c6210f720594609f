"""Compare the numba kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs once untimed (JIT compilation), then ``--repeat`` times.
Both paths must return identical point sets; the script exits non-zero
otherwise.  An end-to-end Vinberg run on the 5-dimensional cusp example is
timed last, in a subprocess per backend so ``REFLEKT_NO_JIT`` takes effect.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from reflekt import _kernels

OMEGA_RUN = (
    "import time; from reflekt.qspace import QuadraticSpace; from reflekt.vinberg import run_vinberg;"
    "M=[[25,9,0,-9,-9],[9,25,0,-9,-9],[0,0,12,-8,-4],[-9,-9,-8,9,1],[-9,-9,-4,1,5]];"
    "s=QuadraticSpace(M); run_vinberg(s,(1,1,1,1,1),max_roots=8,check_volume=False);"
    "t=time.perf_counter(); r=run_vinberg(s,(1,1,1,1,1),max_distance=9216,max_roots=100,check_volume=False);"
    "print(len(r.roots), round(time.perf_counter()-t,3))"
)


def _time(fn, repeat):
    fn()
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def bench_ellipsoid(repeat):
    rng = np.random.default_rng(7)
    b = rng.integers(-3, 4, size=(5, 5))
    a = (b @ b.T + 5 * np.eye(5)).astype(float)
    c = rng.normal(size=5)
    r2 = 60.0
    tj, pj = _time(lambda: _kernels.ellipsoid_points(a, c, r2, jit=True), repeat)
    tn, pn = _time(lambda: _kernels.ellipsoid_points(a, c, r2, jit=False), repeat)
    return "ellipsoid (dim 5)", len(pj), tj, tn, np.array_equal(pj, pn)


def bench_polytope(repeat):
    a = np.array([[2, 1, 0, 0], [1, 3, 1, 0], [0, 1, 2, 1], [0, 0, 1, 4]], dtype=np.int64)
    b = np.array([1, 0, -1, 2], dtype=np.int64)
    g = np.array([[1, 1, 0, 0], [0, -1, 1, 1], [-1, 0, 0, 1]], dtype=np.int64)
    h = np.array([20, 18, 16], dtype=np.int64)
    lo = np.full(4, -12, dtype=np.int64)
    hi = np.full(4, 12, dtype=np.int64)
    args = (lo, hi, g, h, a, b, 3, 2, 7)
    tj, pj = _time(lambda: _kernels.polytope_points(*args, jit=True), repeat)
    tn, pn = _time(lambda: _kernels.polytope_points(*args, jit=False), repeat)
    return "polytope (dim 4, box 25^4)", len(pj), tj, tn, np.array_equal(pj, pn)


def bench_end_to_end():
    rows = []
    for label, env in (("numba", {}), ("numpy", {"REFLEKT_NO_JIT": "1"})):
        e = dict(os.environ, **env)
        out = subprocess.run([sys.executable, "-c", OMEGA_RUN], env=e, capture_output=True, text=True, check=True)
        n, secs = out.stdout.split()
        rows.append((label, int(n), float(secs)))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-end-to-end", action="store_true")
    args = ap.parse_args()
    if not _kernels.JIT_ENABLED:
        print("numba unavailable or disabled; both columns measure the numpy path")
    ok = True
    print(f"{'kernel':<28}{'points':>8}{'numba s':>12}{'numpy s':>12}{'speedup':>10}  same")
    for name, n, tj, tn, same in (bench_ellipsoid(args.repeat), bench_polytope(args.repeat)):
        ok &= same
        print(f"{name:<28}{n:>8}{tj:>12.5f}{tn:>12.5f}{tn / tj:>10.1f}  {same}")
    if not args.skip_end_to_end:
        rows = bench_end_to_end()
        for label, n, secs in rows:
            print(f"vinberg cusp run [{label}]: {n} roots in {secs:.3f} s")
        ok &= rows[0][1] == rows[1][1]
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
