"""Compiled O(n) inertia kernels for symmetric tridiagonal matrices."""

from __future__ import annotations

import os
import warnings

import numba
import numpy as np

# old system TBB only disables one threading backend; numba falls back silently
warnings.filterwarnings("ignore", message=".*TBB threading layer.*")

_SCALE_HI = 2.0 ** 64
_SCALE_LO = 2.0 ** -64


def configure_threads() -> int:
    """Honour ``SPECDEN_THREADS`` as a cap on numba's worker pool."""
    cap = os.environ.get("SPECDEN_THREADS")
    n = numba.config.NUMBA_NUM_THREADS
    if cap:
        n = max(1, min(n, int(cap)))
    numba.set_num_threads(n)
    return n


@numba.njit(cache=True, nogil=True)
def count_below_kernel(diag, off, e):
    """Eigenvalues strictly below ``e`` of the tridiagonal (diag, off).

    Runs the three-term Sturm recurrence p_i = (a_i - e) p_{i-1} - b^2 p_{i-2}
    and counts sign changes. The pair (p_{i-1}, p_i) is rescaled by a power of
    two whenever its larger entry leaves [2^-64, 2^64]. The narrow window
    keeps e * p_i clear of underflow for |e| down to about 1e-300. A zero p_i takes the sign opposite to
    p_{i-1} (the zero pivot is read as a negative infinitesimal).
    """
    n = diag.shape[0]
    prev = 1.0
    cur = diag[0] - e
    count = 0
    if cur <= 0.0:
        count += 1
        scur = -1.0
    else:
        scur = 1.0
    for i in range(1, n):
        b = off[i - 1]
        nxt = (diag[i] - e) * cur - b * b * prev
        if nxt == 0.0:
            snext = -scur
        elif nxt < 0.0:
            snext = -1.0
        else:
            snext = 1.0
        if snext != scur:
            count += 1
        prev = cur
        cur = nxt
        scur = snext
        m = max(abs(prev), abs(cur))
        if m > _SCALE_HI:
            prev *= _SCALE_LO
            cur *= _SCALE_LO
        elif m < _SCALE_LO and m > 0.0:
            prev *= _SCALE_HI
            cur *= _SCALE_HI
    return count


@numba.njit(cache=True, nogil=True)
def count_below_pivot(diag, off, e, pivmin):
    """LDL^T pivot form of the count with the zero-pivot safeguard."""
    n = diag.shape[0]
    d = diag[0] - e
    if abs(d) < pivmin:
        d = -pivmin
    count = 1 if d < 0.0 else 0
    for i in range(1, n):
        b = off[i - 1]
        d = (diag[i] - e) - b * b / d
        if abs(d) < pivmin:
            d = -pivmin
        if d < 0.0:
            count += 1
    return count


@numba.njit(cache=True, parallel=True)
def count_below_many(diag, off, energies):
    out = np.empty(energies.shape[0], dtype=np.int64)
    for k in numba.prange(energies.shape[0]):
        out[k] = count_below_kernel(diag, off, energies[k])
    return out


@numba.njit(cache=True, parallel=True)
def bisect_all(diag, off, lo, hi, tol):
    """All eigenvalues by independent bisection on the inertia count."""
    n = diag.shape[0]
    out = np.empty(n, dtype=np.float64)
    for k in numba.prange(n):
        a = lo
        b = hi
        # smallest x with count_below(x) >= k + 1
        while b - a > tol * max(1.0, abs(a), abs(b)):
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            if count_below_kernel(diag, off, mid) >= k + 1:
                b = mid
            else:
                a = mid
        out[k] = 0.5 * (a + b)
    return out


def gershgorin(diag: np.ndarray, off: np.ndarray) -> tuple[float, float]:
    r = np.zeros_like(diag)
    if len(off):
        r[:-1] += np.abs(off)
        r[1:] += np.abs(off)
    return float(np.min(diag - r)), float(np.max(diag + r))


def eigvalsh_bisect(diag, off, tol: float = 4 * np.finfo(float).eps) -> np.ndarray:
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    off = np.ascontiguousarray(off, dtype=np.float64)
    lo, hi = gershgorin(diag, off)
    pad = 1e-12 * max(1.0, abs(lo), abs(hi))
    return bisect_all(diag, off, lo - pad, hi + pad, tol)


def safe_pivmin(off) -> float:
    b2 = float(np.max(np.asarray(off) ** 2)) if len(off) else 1.0
    return np.finfo(float).tiny * max(1.0, b2)


__all__ = ["count_below_kernel", "count_below_pivot", "count_below_many",
           "eigvalsh_bisect", "configure_threads", "gershgorin"]
