"""
Bessel functions of the first kind and their positive zeros.

Used as an independent oracle for Dirichlet eigenpairs of the disk, so it
deliberately does not touch the finite-difference machinery.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["bessel_j", "bessel_zero", "disk_eigenvalue"]

# below this argument the power series is accurate to ~1e-15
_SERIES_MAX_X = 5.0


def _series(m: int, x: np.ndarray) -> np.ndarray:
    half = 0.5 * x
    term = half**m / math.factorial(m)
    total = term.copy()
    q = -half * half
    for k in range(1, 200):
        term = term * q / (k * (k + m))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _miller(m: int, x: np.ndarray) -> np.ndarray:
    """Miller's backward recurrence, normalised by J0 + 2 sum J_2k = 1."""
    xmax = float(np.max(x))
    n_start = 2 * ((max(m, int(xmax)) + 20 + int(math.sqrt(60 * max(m, xmax, 1.0)))) // 2)
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    out = np.zeros_like(x)
    for n in range(n_start, 0, -1):
        j_prev = (2 * n / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        # j_cur now holds the unnormalised J_{n-1}
        if n - 1 == m:
            out = j_cur.copy()
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm += 2 * j_cur
        big = np.abs(j_cur) > 1e250
        if np.any(big):
            scale = np.where(big, 1e-250, 1.0)
            j_cur *= scale
            j_next *= scale
            norm *= scale
            out *= scale
    norm += j_cur  # J_0
    return out / norm


def bessel_j(m: int, x) -> np.ndarray | float:
    """J_m(x) for integer order ``m >= 0``; series for small x, recurrence beyond."""
    if m < 0 or int(m) != m:
        raise ValueError("order must be a non-negative integer")
    m = int(m)
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    sign = np.where((x < 0) & (m % 2 == 1), -1.0, 1.0)
    ax = np.abs(x)
    out = np.empty_like(ax)
    small = ax <= _SERIES_MAX_X
    if np.any(small):
        out[small] = _series(m, ax[small])
    if np.any(~small):
        out[~small] = _miller(m, ax[~small])
    out *= sign
    return float(out[0]) if scalar else out


def bessel_zero(m: int, k: int, xtol: float = 1e-13) -> float:
    """k-th positive zero of J_m, bracketed by a scan and refined by bisection."""
    if k < 1:
        raise ValueError("zero index k starts at 1")
    step = 0.05
    a = step
    fa = bessel_j(m, a)
    found = 0
    while True:
        b = a + step
        fb = bessel_j(m, b)
        if fa == 0.0:
            found += 1
            if found == k:
                return a
        elif fa * fb < 0:
            found += 1
            if found == k:
                break
        a, fa = b, fb
    lo, hi, flo = a, b, fa
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        fmid = bessel_j(m, mid)
        if fmid == 0.0:
            return mid
        if flo * fmid < 0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


def disk_eigenvalue(m: int, k: int, radius: float = 1.0) -> float:
    """Dirichlet eigenvalue ``(j_{m,k} / radius)^2`` of the disk."""
    return (bessel_zero(m, k) / radius) ** 2
