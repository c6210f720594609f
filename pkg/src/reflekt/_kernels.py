"""Lattice-point enumeration kernels used by the Vinberg root search.

Two hot loops dominate a Vinberg run:

* ``ellipsoid_points`` -- Fincke-Pohst enumeration of integer ``y`` with
  ``(y - c)^T A (y - c) <= r2`` (time-like basepoints);
* ``polytope_points`` -- integer ``y`` in a box, cut by integer linear
  inequalities ``G y <= h``, whose integer quadratic value
  ``y^T A y + 2 b.y + c0`` is congruent to ``target`` modulo ``modulus``
  (cusp basepoints).

Each has a numba ``@njit`` version and a pure numpy version.  Set
``REFLEKT_NO_JIT=1`` (or uninstall numba) to force the numpy path.  Both
paths return identical arrays, sorted lexicographically.
"""

from __future__ import annotations

import math
import os

import numpy as np

_DISABLE = os.environ.get("REFLEKT_NO_JIT", "").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLE:
        raise ImportError("disabled by REFLEKT_NO_JIT")
    from numba import njit
    JIT_ENABLED = True
except ImportError:  # pragma: no cover - depends on environment
    JIT_ENABLED = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


_EPS = 1e-9


def _fp_setup(a: np.ndarray):
    """Upper-triangular Fincke-Pohst coefficients from a positive definite matrix."""
    l = np.linalg.cholesky(a)
    r = l.T
    d = a.shape[0]
    q = np.zeros((d, d))
    for i in range(d):
        q[i, i] = r[i, i] ** 2
        for j in range(i + 1, d):
            q[i, j] = r[i, j] / r[i, i]
    return q


@njit(cache=True, nogil=True)
def _ellipsoid_jit(q, center, r2):
    d = q.shape[0]
    cap = 1024
    out = np.empty((cap, d), dtype=np.int64)
    count = 0
    x = np.zeros(d, dtype=np.int64)
    ub = np.zeros(d, dtype=np.int64)
    t = np.zeros(d)
    u = np.zeros(d)
    i = d - 1
    t[i] = r2
    u[i] = 0.0
    # initialise level i
    c = center[i] - u[i]
    z = math.sqrt(max(t[i], 0.0) / q[i, i]) + _EPS
    x[i] = math.ceil(c - z)
    ub[i] = math.floor(c + z)
    x[i] -= 1
    while True:
        x[i] += 1
        if x[i] > ub[i]:
            i += 1
            if i >= d:
                break
            continue
        if i == 0:
            if count == cap:
                cap *= 2
                grown = np.empty((cap, d), dtype=np.int64)
                grown[:count] = out[:count]
                out = grown
            out[count] = x
            count += 1
            continue
        diff = x[i] - center[i] + u[i]
        t[i - 1] = t[i] - q[i, i] * diff * diff
        i -= 1
        s = 0.0
        for j in range(i + 1, d):
            s += q[i, j] * (x[j] - center[j])
        u[i] = s
        c = center[i] - u[i]
        z = math.sqrt(max(t[i], 0.0) / q[i, i]) + _EPS
        x[i] = math.ceil(c - z) - 1
        ub[i] = math.floor(c + z)
    return out[:count]


def _ellipsoid_py(q, center, r2):
    d = q.shape[0]
    out = []
    x = [0] * d

    def rec(i, t):
        s = sum(q[i, j] * (x[j] - center[j]) for j in range(i + 1, d))
        c = center[i] - s
        z = math.sqrt(max(t, 0.0) / q[i, i]) + _EPS
        for xi in range(math.ceil(c - z), math.floor(c + z) + 1):
            x[i] = xi
            if i == 0:
                out.append(tuple(x))
            else:
                diff = xi - c
                rec(i - 1, t - q[i, i] * diff * diff)

    rec(d - 1, r2)
    if not out:
        return np.empty((0, d), dtype=np.int64)
    return np.array(out, dtype=np.int64)


def ellipsoid_points(a, center, r2, jit: bool | None = None) -> np.ndarray:
    """Integer points of ``{y : (y-c)^T a (y-c) <= r2}`` (with a float margin).

    Callers filter the result exactly; the margin only guarantees that no
    point on the boundary is lost to rounding.
    """
    a = np.asarray(a, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    d = a.shape[0]
    if d == 0:
        return np.zeros((1, 0), dtype=np.int64) if r2 >= -_EPS else np.zeros((0, 0), dtype=np.int64)
    if r2 < -_EPS * max(1.0, abs(r2)):
        return np.empty((0, d), dtype=np.int64)
    q = _fp_setup(a)
    r2 = float(r2) * (1 + 1e-12) + 1e-9
    use_jit = JIT_ENABLED if jit is None else (jit and JIT_ENABLED)
    pts = _ellipsoid_jit(q, center, r2) if use_jit else _ellipsoid_py(q, center, r2)
    return _sorted_rows(pts)


@njit(cache=True, nogil=True)
def _polytope_jit(lo, hi, g, h, a, b, c0, target, modulus):
    d = lo.shape[0]
    m = g.shape[0]
    cap = 1024
    out = np.empty((cap, d), dtype=np.int64)
    count = 0
    y = lo.copy()
    last = d - 1
    partial = np.zeros(m, dtype=np.int64)
    while True:
        # inequality slack with the last coordinate left free
        lo_l = lo[last]
        hi_l = hi[last]
        for r in range(m):
            s = 0
            for j in range(last):
                s += g[r, j] * y[j]
            partial[r] = s
            coef = g[r, last]
            rhs = h[r] - s
            if coef > 0:
                bound = rhs // coef
                if bound < hi_l:
                    hi_l = bound
            elif coef < 0:
                bound = -((rhs) // (-coef))  # ceil(rhs / coef) for coef < 0
                if bound > lo_l:
                    lo_l = bound
            elif rhs < 0:
                hi_l = lo_l - 1
        for v in range(lo_l, hi_l + 1):
            y[last] = v
            qv = c0
            for i in range(d):
                acc = 2 * b[i]
                for j in range(d):
                    acc += a[i, j] * y[j]
                qv += acc * y[i]
            if (qv - target) % modulus == 0:
                if count == cap:
                    cap *= 2
                    grown = np.empty((cap, d), dtype=np.int64)
                    grown[:count] = out[:count]
                    out = grown
                out[count] = y
                count += 1
        # odometer over the first d-1 coordinates
        k = last - 1
        while k >= 0:
            y[k] += 1
            if y[k] <= hi[k]:
                break
            y[k] = lo[k]
            k -= 1
        if k < 0:
            break
    return out[:count]


def _polytope_np(lo, hi, g, h, a, b, c0, target, modulus):
    d = lo.shape[0]
    if d == 0:
        return np.zeros((1, 0), dtype=np.int64)
    axes = [np.arange(lo[i], hi[i] + 1, dtype=np.int64) for i in range(d)]
    chunks = []
    # iterate over the first coordinate to bound memory
    rest = np.stack(np.meshgrid(*axes[1:], indexing="ij"), axis=-1).reshape(-1, d - 1) if d > 1 else np.zeros((1, 0), dtype=np.int64)
    for v in axes[0]:
        pts = np.concatenate([np.full((rest.shape[0], 1), v, dtype=np.int64), rest], axis=1)
        ok = np.all(pts @ g.T <= h, axis=1)
        pts = pts[ok]
        if not len(pts):
            continue
        qv = np.einsum("ni,ij,nj->n", pts, a, pts) + 2 * pts @ b + c0
        pts = pts[(qv - target) % modulus == 0]
        if len(pts):
            chunks.append(pts)
    if not chunks:
        return np.empty((0, d), dtype=np.int64)
    return np.concatenate(chunks)


def polytope_points(lo, hi, g, h, a, b, c0: int, target: int, modulus: int, jit: bool | None = None) -> np.ndarray:
    """Integer ``y`` with ``lo <= y <= hi``, ``g y <= h`` and
    ``y^T a y + 2 b.y + c0 == target (mod modulus)``.  All inputs integral."""
    lo = np.asarray(lo, dtype=np.int64)
    hi = np.asarray(hi, dtype=np.int64)
    g = np.asarray(g, dtype=np.int64).reshape(-1, lo.shape[0])
    h = np.asarray(h, dtype=np.int64)
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if np.any(lo > hi):
        return np.empty((0, lo.shape[0]), dtype=np.int64)
    use_jit = JIT_ENABLED if jit is None else (jit and JIT_ENABLED)
    if use_jit and lo.shape[0] > 0:
        pts = _polytope_jit(lo, hi, g, h, a, b, np.int64(c0), np.int64(target), np.int64(modulus))
    else:
        pts = _polytope_np(lo, hi, g, h, a, b, int(c0), int(target), int(modulus))
    return _sorted_rows(pts)


def _sorted_rows(pts: np.ndarray) -> np.ndarray:
    if len(pts) <= 1:
        return pts
    order = np.lexsort(pts.T[::-1])
    return pts[order]
