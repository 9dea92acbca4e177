"""Small vectorized numerical helpers used across the package."""
from __future__ import annotations

import numpy as np


def frac(x):
    """Fractional part in [0, 1)."""
    return x - np.floor(x)


def circle_dist(a, b):
    """Distance on the unit circle between angles a and b (mod 1)."""
    d = frac(np.asarray(a, dtype=float) - b)
    return np.minimum(d, 1.0 - d)


def bisect_brackets(fn, lo, hi, xtol=1e-13, max_iter=200):
    """Bisect sign-changing brackets [lo, hi] in parallel.

    fn must be vectorized; each bracket must satisfy fn(lo)*fn(hi) <= 0.
    Returns the midpoints of the final brackets.
    """
    lo = np.asarray(lo, dtype=float).copy()
    hi = np.asarray(hi, dtype=float).copy()
    flo = np.asarray(fn(lo), dtype=float)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = np.asarray(fn(mid), dtype=float)
        same = (flo <= 0) == (fm <= 0)
        lo = np.where(same, mid, lo)
        flo = np.where(same, fm, flo)
        hi = np.where(same, hi, mid)
        if np.max(hi - lo) <= xtol:
            break
    return 0.5 * (lo + hi)


def solve_increasing(fn, targets, lo, hi, xtol=1e-13, max_iter=200):
    """Solve fn(y) = target for an increasing vectorized fn, per component.

    lo/hi must bracket every target (fn(lo) <= target <= fn(hi)).
    """
    targets = np.asarray(targets, dtype=float)
    return bisect_brackets(lambda y: fn(y) - targets, lo, hi, xtol, max_iter)


def max_circular_gap(values):
    """Largest gap left on the circle by the given angles (mod 1)."""
    v = np.sort(frac(np.asarray(values, dtype=float)))
    if v.size == 0:
        return 1.0
    gaps = np.diff(v)
    wrap = v[0] + 1.0 - v[-1]
    return float(max(gaps.max(initial=0.0), wrap))


def sign_changes(values):
    """Indices i where values[i] and values[i+1] straddle zero strictly."""
    v = np.asarray(values, dtype=float)
    return np.nonzero(v[:-1] * v[1:] < 0)[0]
