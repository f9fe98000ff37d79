"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

Set NETSTEER_NO_NUMBA=1 to force the numpy path (the benchmark in
benchmarks/bench_kernels.py compares the two).  Everything else in the
package is small dense linear algebra where jitting buys nothing.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("NETSTEER_NO_NUMBA", "0").lower() in ("1", "true", "yes")

if not _DISABLE:
    try:
        from numba import njit
        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False

if not NUMBA_ENABLED:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def fibonacci_sphere(n: int) -> np.ndarray:
    """Deterministic quasi-uniform unit vectors, shape (n, 3)."""
    i = np.arange(n, dtype=np.float64)
    phi = np.pi * (3.0 - np.sqrt(5.0)) * i
    z = 1.0 - 2.0 * (i + 0.5) / n
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def _criterion_values_numpy(a, t, eta, xs):
    ax = xs @ a
    tx = xs @ t.T
    return (
        (1.0 - 3.0 * eta) * np.abs(ax)
        + 1.5 * eta * (1.0 + ax * ax)
        + np.sqrt(np.sum(tx * tx, axis=1))
    )


@njit(cache=True)
def _criterion_values_numba(a, t, eta, xs):
    n = xs.shape[0]
    out = np.empty(n)
    for i in range(n):
        ax = a[0] * xs[i, 0] + a[1] * xs[i, 1] + a[2] * xs[i, 2]
        n2 = 0.0
        for r in range(3):
            tx = t[r, 0] * xs[i, 0] + t[r, 1] * xs[i, 1] + t[r, 2] * xs[i, 2]
            n2 += tx * tx
        out[i] = (
            (1.0 - 3.0 * eta) * abs(ax)
            + 1.5 * eta * (1.0 + ax * ax)
            + np.sqrt(n2)
        )
    return out


def criterion_values(a, t, eta, xs):
    """Erased-state unsteerability objective evaluated at unit vectors ``xs``."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    t = np.ascontiguousarray(t, dtype=np.float64)
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    if NUMBA_ENABLED:
        return _criterion_values_numba(a, t, float(eta), xs)
    return _criterion_values_numpy(a, t, float(eta), xs)


def _lhs_bound_numpy(axes, us):
    proj = us @ axes.T                     # (n_points, m)
    return np.max(np.sum(np.abs(proj), axis=1)) / axes.shape[0]


@njit(cache=True)
def _lhs_bound_numba(axes, us):
    m = axes.shape[0]
    best = 0.0
    for i in range(us.shape[0]):
        acc = 0.0
        for k in range(m):
            dot = (
                axes[k, 0] * us[i, 0]
                + axes[k, 1] * us[i, 1]
                + axes[k, 2] * us[i, 2]
            )
            acc += abs(dot)
        if acc > best:
            best = acc
    return best / m


def lhs_bound_brute_force(axes, n_points: int = 10000) -> float:
    """Brute-force LHS maximum of the linear witness over hidden qubit states.

    Hidden states are discretised over a Fibonacci lattice of Bloch vectors;
    deterministic sign responses reduce to the per-axis absolute value.
    """
    axes = np.ascontiguousarray(axes, dtype=np.float64)
    us = fibonacci_sphere(n_points)
    if NUMBA_ENABLED:
        return float(_lhs_bound_numba(axes, us))
    return float(_lhs_bound_numpy(axes, us))


def sphere_maximize(a, t, eta, n_points: int = 2000) -> tuple[float, np.ndarray]:
    """Maximise the unsteerability objective over unit 3-vectors.

    Fibonacci lattice scan followed by deterministic shrinking-cap
    refinement around the best point.  Ties break to the lowest index.
    """
    a = np.asarray(a, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    xs = fibonacci_sphere(n_points)
    vals = criterion_values(a, t, eta, xs)
    best_idx = int(np.argmax(vals))
    best_x = xs[best_idx]
    best_val = float(vals[best_idx])
    # local refinement: resample a shrinking cap around the incumbent
    radius = 2.0 * np.sqrt(4.0 / n_points)
    local = fibonacci_sphere(200)
    for _ in range(40):
        cand = best_x[None, :] + radius * local
        cand /= np.linalg.norm(cand, axis=1)[:, None]
        cvals = criterion_values(a, t, eta, cand)
        i = int(np.argmax(cvals))
        if cvals[i] > best_val:
            best_val = float(cvals[i])
            best_x = cand[i]
        radius *= 0.6
    return best_val, best_x
