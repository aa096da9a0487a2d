"""Spectral certificates for the chain matrices U_m.

``U_m`` is the symmetric tridiagonal matrix with diagonal (1, 5, ..., 5) and
off-diagonal 2: the operator ``5 + 2(T + T*) - 4 chi_I`` restricted to a
computational chain of length ``m``. Everything labelled *exact* runs in
integers and ``Fraction``; float paths use the compiled inertia kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels

Number = int | Fraction


@dataclass(frozen=True)
class SymTridiagonal:
    diag: tuple
    offdiag: tuple
    exact: bool = True

    def __post_init__(self):
        if len(self.diag) < 1:
            raise ValueError("matrix must be at least 1x1")
        if len(self.offdiag) != len(self.diag) - 1:
            raise ValueError("offdiag must have m - 1 entries")

    @property
    def m(self) -> int:
        return len(self.diag)

    def to_float(self) -> "SymTridiagonal":
        return SymTridiagonal(tuple(float(x) for x in self.diag),
                              tuple(float(x) for x in self.offdiag), exact=False)

    def dense(self) -> list[list]:
        m = self.m
        zero = Fraction(0) if self.exact else 0.0
        rows = [[zero] * m for _ in range(m)]
        for i, a in enumerate(self.diag):
            rows[i][i] = a
        for i, b in enumerate(self.offdiag):
            rows[i][i + 1] = rows[i + 1][i] = b
        return rows

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.asarray(self.diag, dtype=np.float64),
                np.asarray(self.offdiag, dtype=np.float64))

    def plus_diag(self, i: int, value: Number) -> "SymTridiagonal":
        d = list(self.diag)
        d[i] = d[i] + value
        return SymTridiagonal(tuple(d), self.offdiag, self.exact)


def chain_matrix(m: int) -> SymTridiagonal:
    if m < 1:
        raise ValueError("m must be at least 1")
    return SymTridiagonal((1,) + (5,) * (m - 1), (2,) * (m - 1))


def all_five_matrix(m: int) -> SymTridiagonal:
    """U_m + diag(4, 0, ..., 0): diagonal all 5."""
    return chain_matrix(m).plus_diag(0, 4)


# --------------------------------------------------------------------------
# determinants


def det_exact(m: int) -> int:
    """det(U_m) via the last-row cofactor recurrence d_m = 5 d_{m-1} - 4 d_{m-2}."""
    if m < 1:
        raise ValueError("m must be at least 1")
    a, b = 1, 1  # det U_1, det U_2
    if m == 1:
        return a
    for _ in range(m - 2):
        a, b = b, 5 * b - 4 * a
    return b


def det_sequence(mmax: int) -> list[int]:
    """[det U_1, ..., det U_mmax]."""
    out = [1, 1][:mmax]
    while len(out) < mmax:
        out.append(5 * out[-1] - 4 * out[-2])
    return out


def det_all_five(k: int) -> int:
    """Determinant of the k x k tridiagonal with diagonal 5, off-diagonal 2."""
    a, b = 1, 5  # k = 0, 1
    if k == 0:
        return a
    for _ in range(k - 1):
        a, b = b, 5 * b - 4 * a
    return b


def det_dense(rows: Sequence[Sequence[int]]) -> int:
    """Fraction-free (Bareiss) determinant of an integer matrix."""
    a = [list(map(int, r)) for r in rows]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def inverse_entry_00(t: SymTridiagonal) -> Fraction:
    """(T^{-1})_{11} by exact dense Gauss-Jordan elimination."""
    m = t.m
    rows = [[Fraction(x) for x in r] + [Fraction(int(i == 0))] for i, r in enumerate(t.dense())]
    for k in range(m):
        piv = next(i for i in range(k, m) if rows[i][k] != 0)
        rows[k], rows[piv] = rows[piv], rows[k]
        pk = rows[k][k]
        rows[k] = [x / pk for x in rows[k]]
        for i in range(m):
            if i != k and rows[i][k] != 0:
                f = rows[i][k]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[k])]
    return rows[0][m]


# --------------------------------------------------------------------------
# exact Sturm counts


class Inertia(NamedTuple):
    below: int  # eigenvalues < lam, plus one if lam itself is an eigenvalue
    hit: bool   # lam is an eigenvalue


@lru_cache(maxsize=256)
def _integer_entries(t: SymTridiagonal) -> tuple[list[int], list[int]]:
    """Entries scaled to integers; the common denominator rides at the end of ``a``."""
    entries = [Fraction(x) for x in t.diag] + [Fraction(x) for x in t.offdiag]
    den = math.lcm(*(x.denominator for x in entries))
    a = [int(Fraction(x) * den) for x in t.diag]
    b2 = [int(Fraction(x) * den) ** 2 for x in t.offdiag]
    return a + [den], b2


def inertia(t: SymTridiagonal, lam: Number) -> Inertia:
    """Exact inertia of ``t - lam`` from integer Sturm polynomials.

    With ``lam = P/Q`` the scaled sequence q_i = Q^i det(T_i - lam) obeys
    q_i = (Q a_i - P) q_{i-1} - Q^2 b^2 q_{i-2}, so no rational normalisation
    is needed. A zero q_i is given the sign opposite to its predecessor, which
    is the negative-infinitesimal reading of a zero pivot.
    """
    lam = Fraction(lam)
    P, Q = lam.numerator, lam.denominator
    a, b2 = _integer_entries(t)
    P = P * a[-1]
    a = a[:-1]
    prev, cur = 1, Q * a[0] - P
    s_cur = 1 if cur > 0 else -1
    count = 0 if s_cur > 0 else 1
    if Q & (Q - 1) == 0:
        # dyadic lam: multiplications by Q become shifts
        e = Q.bit_length() - 1
        shifted = [(x << e) - P for x in a]
        for i in range(1, t.m):
            prev, cur = cur, shifted[i] * cur - ((b2[i - 1] * prev) << (2 * e))
            s_new = -s_cur if cur == 0 else (1 if cur > 0 else -1)
            if s_new != s_cur:
                count += 1
            s_cur = s_new
        return Inertia(count, cur == 0)
    Q2 = Q * Q
    for i in range(1, t.m):
        prev, cur = cur, (Q * a[i] - P) * cur - Q2 * b2[i - 1] * prev
        s_new = -s_cur if cur == 0 else (1 if cur > 0 else -1)
        if s_new != s_cur:
            count += 1
        s_cur = s_new
    return Inertia(count, cur == 0)


def sturm_count(t: SymTridiagonal, lam: Number) -> int:
    """Eigenvalues below ``lam``; an eigenvalue equal to ``lam`` counts as below.

    Use :func:`inertia` to tell whether ``lam`` was hit, or
    :func:`count_open` for strict interval counts.
    """
    if not t.exact:
        d, o = t.arrays()
        return int(kernels.count_below_kernel(d, o, float(lam)))
    return inertia(t, lam).below


def count_strictly_below(t: SymTridiagonal, lam: Number) -> int:
    r = inertia(t, lam)
    return r.below - int(r.hit)


def count_open(t: SymTridiagonal, lo: Number, hi: Number) -> int:
    """Number of eigenvalues in the open interval (lo, hi)."""
    return count_strictly_below(t, hi) - inertia(t, lo).below


# --------------------------------------------------------------------------
# certified enclosures


@dataclass(frozen=True)
class EigenInterval:
    lower: Fraction
    upper: Fraction
    k: int

    @property
    def mid(self) -> Fraction:
        return (self.lower + self.upper) / 2

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower


def enclose(t: SymTridiagonal, k: int, lo: Number, hi: Number,
            rel_bits: int = 60) -> EigenInterval:
    """Bisect [lo, hi] down to relative width 2^-rel_bits around lambda_k.

    Requires #{< lo} <= k - 1 and #{<= hi} >= k. The result satisfies
    count(lower) < k <= count(upper) exactly.
    """
    lo, hi = Fraction(lo), Fraction(hi)
    if sturm_count(t, lo) >= k or sturm_count(t, hi) < k:
        raise ValueError("bracket does not contain eigenvalue k")
    if lo == 0 and hi > 0:
        lo, hi = _dyadic_bracket(t, k, hi)
    tol = Fraction(1, 2 ** rel_bits)
    while hi - lo > tol * hi:
        if lo > 0 and hi > 2 * lo:
            # geometric step while the bracket spans octaves
            mid = Fraction(2) ** ((_log2_floor(lo) + _log2_floor(hi)) // 2)
            if not lo < mid < hi:
                mid = (lo + hi) / 2
        else:
            mid = (lo + hi) / 2
        if sturm_count(t, mid) >= k:
            hi = mid
        else:
            lo = mid
    return EigenInterval(lo, hi, k)


def _dyadic_bracket(t: SymTridiagonal, k: int, hi: Fraction) -> tuple[Fraction, Fraction]:
    """Shrink (0, hi] to an octave (2^-(e+1), 2^-e] using powers of two only.

    Dyadic points keep the Sturm integers cheap (the denominator is a shift).
    """
    e = max(0, -_log2_floor(hi))
    while Fraction(1, 2 ** e) > hi:
        e += 1
    if sturm_count(t, Fraction(1, 2 ** e)) < k:
        return Fraction(1, 2 ** e), hi
    step = 1
    while sturm_count(t, Fraction(1, 2 ** (e + step))) >= k:
        e += step
        step *= 2
    # count(2^-e) >= k > count(2^-(e + step))
    a, b = e, e + step
    while b - a > 1:
        c = (a + b) // 2
        if sturm_count(t, Fraction(1, 2 ** c)) >= k:
            a = c
        else:
            b = c
    return Fraction(1, 2 ** b), Fraction(1, 2 ** a)


def _log2_floor(x: Fraction) -> int:
    return x.numerator.bit_length() - x.denominator.bit_length()


def certificate_threshold(m: int) -> Fraction:
    """5^-ceil(m/3): rational and at most 5^(-m/3)."""
    return Fraction(1, 5 ** -(-m // 3))


@dataclass(frozen=True)
class BottomEigenCertificate:
    m: int
    passed: bool
    threshold: Fraction
    positive_definite: bool
    interval: EigenInterval | None

    def csv_row(self) -> dict:
        iv = self.interval
        return {
            "m": self.m,
            "det": str(det_exact(self.m)),
            "lambda1_lo": _frac(iv.lower) if iv else "",
            "lambda1_hi": _frac(iv.upper) if iv else "",
            "threshold": _frac(self.threshold),
            "pass": self.passed,
        }


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def bottom_eigen_certificate(m: int, rel_bits: int | None = 60) -> BottomEigenCertificate:
    """Certify 0 < lambda_1(U_m) < 5^-ceil(m/3) <= 5^(-m/3).

    Passing means U_m is positive definite and has an eigenvalue strictly
    below the rational threshold.
    """
    if m < 2:
        raise ValueError("the lemma concerns m >= 2")
    u = chain_matrix(m)
    thr = certificate_threshold(m)
    pd = inertia(u, 0).below == 0
    ok = pd and count_strictly_below(u, thr) >= 1
    iv = enclose(u, 1, 0, thr, rel_bits) if ok and rel_bits else None
    return BottomEigenCertificate(m, ok, thr, pd, iv)


def cofactor_bound(m: int) -> Fraction:
    """lambda_1(U_m) <= 1 / (U_m^-1)_11 = 3 / (4^m - 1)."""
    return Fraction(3, 4 ** m - 1)


def cofactor_oracle(m: int) -> bool:
    """Check (U_m^-1)_11 = (4^m - 1)/3 densely and certify the bound by Sturm count."""
    u = chain_matrix(m)
    ok = inverse_entry_00(u) == Fraction(det_all_five(m - 1), det_exact(m))
    ok &= det_all_five(m - 1) == (4 ** m - 1) // 3
    return ok and sturm_count(u, cofactor_bound(m)) >= 1


# --------------------------------------------------------------------------
# float checks


def eigvals(t: SymTridiagonal) -> np.ndarray:
    d, o = t.arrays()
    return kernels.eigvalsh_bisect(d, o)


@dataclass(frozen=True)
class WeylReport:
    m: int
    tol: float
    lambda2_ge_1: bool
    kappa_in_range: bool
    kappa_upper_half: bool
    lambda_upper_half: bool
    interlacing: bool
    indexed_claim: bool  # lambda_{floor(m/2)+1} >= 5, logged only

    @property
    def ok(self) -> bool:
        return (self.lambda2_ge_1 and self.kappa_in_range and self.kappa_upper_half
                and self.lambda_upper_half and self.interlacing)


def weyl_checks(m: int) -> WeylReport:
    if not 2 <= m <= 2000:
        raise ValueError("weyl_checks supports 2 <= m <= 2000")
    tol = 1e-9 * m
    lam = eigvals(chain_matrix(m))
    kap = eigvals(all_five_matrix(m))
    half = -(-m // 2)
    return WeylReport(
        m=m,
        tol=tol,
        lambda2_ge_1=bool(lam[1] >= 1 - tol),
        kappa_in_range=bool(np.all((kap >= 1 - tol) & (kap <= 9 + tol))),
        kappa_upper_half=int(np.sum(kap >= 5 - tol)) >= half,
        lambda_upper_half=int(np.sum(lam >= 5 - tol)) >= half - 1,
        interlacing=bool(np.all(kap[:-1] <= lam[1:] + tol)),
        indexed_claim=bool(lam[m // 2] >= 5 - tol),
    )


# --------------------------------------------------------------------------
# Benjamini-Schramm determinant gap


@dataclass(frozen=True)
class GapRow:
    m: int
    det_chain: int
    det_plus: int
    verdict: bool  # det_plus^3 >= 5^m, i.e. det_plus^(1/m) >= 5^(1/3)

    @property
    def normalized(self) -> float:
        return math.exp(math.log(self.det_plus) / self.m)


def bs_determinant_gap(mmax: int) -> list[GapRow]:
    if mmax < 1:
        raise ValueError("mmax must be at least 1")
    dets = det_sequence(mmax)
    rows = []
    a, b = 1, 5
    for m in range(1, mmax + 1):
        plus = b  # all-5 determinant of size m
        rows.append(GapRow(m, dets[m - 1], plus, plus ** 3 >= 5 ** m))
        a, b = b, 5 * b - 4 * a
    return rows
