"""Random hopping chains H z_k = W(k) z_{k+1} + W(k-1) z_{k-1} near zero energy.

Couplings are drawn i.i.d. from a :class:`CouplingLaw`, the chain is cut to
``n`` sites with free ends, and eigenvalue counts come from the rescaled
Sturm kernel in :mod:`specden.kernels`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .kernels import count_below_kernel, count_below_many


@dataclass(frozen=True)
class Constant:
    value: float = 1.0

    @property
    def support(self) -> tuple[float, float]:
        return (self.value, self.value)

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.full(n, float(self.value))


@dataclass(frozen=True)
class TorusTrig:
    """W = c0 + sum_i 2 c_i cos(theta_i), theta uniform on the q-torus."""

    c0: float = 7.0
    coeffs: tuple[float, ...] = (1.0, 1.0, 1.0)

    @property
    def q(self) -> int:
        return len(self.coeffs)

    @property
    def support(self) -> tuple[float, float]:
        r = 2 * sum(abs(c) for c in self.coeffs)
        return (self.c0 - r, self.c0 + r)

    def evaluate(self, thetas: np.ndarray) -> np.ndarray:
        """Law's symbol at angles of shape (..., q)."""
        c = np.asarray(self.coeffs, dtype=np.float64)
        return self.c0 + 2.0 * np.cos(thetas) @ c

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        thetas = rng.uniform(0.0, 2 * math.pi, size=(n, self.q))
        return self.evaluate(thetas)


@dataclass(frozen=True)
class Empirical:
    """Resampling (with replacement) from a list of observed couplings."""

    values: tuple[float, ...]
    source: str = ""

    @classmethod
    def from_file(cls, path: str | Path) -> "Empirical":
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"coupling sample file not found: {path}")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # empty input warns before we raise
            vals = np.loadtxt(path, dtype=np.float64, ndmin=1)
        if vals.size == 0:
            raise ValueError(f"coupling sample file is empty: {path}")
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"non-finite coupling in {path}")
        return cls(tuple(float(v) for v in vals), str(path))

    @property
    def support(self) -> tuple[float, float]:
        return (min(self.values), max(self.values))

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.choice(np.asarray(self.values, dtype=np.float64), size=n)


CouplingLaw = Union[Constant, TorusTrig, Empirical]
TRIG3_LAW = TorusTrig(7.0, (1.0, 1.0, 1.0))


def parse_law(text: str) -> CouplingLaw:
    """``corollary``, ``constant:<v>``, ``file:<path>`` or ``trig:c0,c1,...``."""
    if text == "trig3":
        return TRIG3_LAW
    kind, _, arg = text.partition(":")
    if kind == "constant" and arg:
        return Constant(float(arg))
    if kind == "file" and arg:
        return Empirical.from_file(arg)
    if kind == "trig" and arg:
        c = [float(v) for v in arg.split(",")]
        if len(c) < 2:
            raise ValueError("trig law needs c0 and at least one coefficient")
        return TorusTrig(c[0], tuple(c[1:]))
    raise ValueError(f"unknown coupling law {text!r}")


def law_name(law: CouplingLaw) -> str:
    if isinstance(law, Constant):
        return f"constant:{law.value!r}"
    if isinstance(law, Empirical):
        return f"file:{law.source}"
    if law == TRIG3_LAW:
        return "trig3"
    return "trig:" + ",".join(repr(c) for c in (law.c0, *law.coeffs))


def stream(seed: int, sample_index: int) -> np.random.Generator:
    """Independent Philox stream for one sample; order of use is irrelevant."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, sample_index])))


def sample_couplings(law: CouplingLaw, n: int, seed: int, sample_index: int = 0) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be at least 1")
    return law.draw(stream(seed, sample_index), n)


def _chain_arrays(W: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    W = np.ascontiguousarray(W, dtype=np.float64)
    return np.zeros(W.shape[0] + 1), W


def count_below(W: Sequence[float], E: float) -> int:
    """Eigenvalues strictly below ``E`` of the chain with bond weights ``W``.

    ``len(W)`` bonds make ``len(W) + 1`` sites.
    """
    diag, off = _chain_arrays(W)
    return int(count_below_kernel(diag, off, float(E)))


def dense_count_below(W: Sequence[float], E: float) -> int:
    """Same count by full diagonalisation (for small chains)."""
    W = np.asarray(W, dtype=np.float64)
    H = np.diag(W, 1) + np.diag(W, -1)
    return int(np.sum(np.linalg.eigvalsh(H) < E))


# --------------------------------------------------------------------------
# density of states


@dataclass(frozen=True)
class DosEstimate:
    epsilons: tuple[float, ...]
    mu_hat: tuple[float, ...]
    stderr: tuple[float, ...]
    samples: int
    n: int
    seed: int
    law: str = ""
    counts: tuple[tuple[int, ...], ...] = field(default=(), repr=False)  # per sample

    def rows(self) -> list[dict]:
        return [
            {"epsilon": e, "mu_hat": m, "stderr": s, "n": self.n,
             "samples": self.samples, "seed": self.seed}
            for e, m, s in zip(self.epsilons, self.mu_hat, self.stderr)
        ]


def dos_window(law: CouplingLaw, n: int, samples: int, epsilons: Sequence[float],
               seed: int) -> DosEstimate:
    """Monte Carlo estimate of mu((0, eps)) = E[#{0 < lambda < eps}] / n.

    Uses chiral symmetry: for even n and atomless couplings exactly n/2
    eigenvalues are negative, so #{0 < lambda < eps} = count_below(eps) - n/2.
    """
    if n < 2 or n % 2:
        raise ValueError(
            f"n = {n} must be even: the estimator subtracts n/2 negative eigenvalues, "
            "which is only exact for even chains")
    if samples < 1:
        raise ValueError("samples must be at least 1")
    eps = np.asarray(list(epsilons), dtype=np.float64)
    if eps.size == 0 or np.any(eps <= 0):
        raise ValueError("energies must be positive")
    diag = np.zeros(n)
    counts = np.empty((samples, eps.size), dtype=np.int64)
    for s in range(samples):
        W = sample_couplings(law, n - 1, seed, s)
        counts[s] = count_below_many(diag, W, eps)
    frac = (counts - n // 2) / n
    mean = frac.mean(axis=0)
    if samples > 1:
        se = frac.std(axis=0, ddof=1) / math.sqrt(samples)
    else:
        se = np.zeros_like(mean)
    return DosEstimate(
        epsilons=tuple(float(e) for e in eps),
        mu_hat=tuple(float(m) for m in mean),
        stderr=tuple(float(v) for v in se),
        samples=samples,
        n=n,
        seed=seed,
        law=law_name(law),
        counts=tuple(tuple(int(c) for c in row) for row in counts),
    )


def free_chain_ids(eps: float) -> float:
    """mu((0, eps)) for the constant-one chain in the infinite-volume limit."""
    return math.asin(min(eps, 2.0) / 2) / math.pi


# --------------------------------------------------------------------------
# exponent fits


@dataclass(frozen=True)
class LogFit:
    alpha: float
    intercept: float
    residuals: tuple[float, ...]
    r_squared: float
    poor: bool
    used: tuple[int, ...]                               # grid indices in the fit
    power_ratios: dict[float, tuple[float, ...]]        # eta -> mu/eps^eta along the grid
    power_trend: dict[float, bool]                      # strictly increasing as eps decreases


class FitError(ValueError):
    pass


POWER_EXPONENTS = (0.5, 0.25, 0.1)
RMS_POOR = 0.05


def fit_log_exponent(est: DosEstimate, exponents: Sequence[float] = POWER_EXPONENTS) -> LogFit:
    """Fit mu = A |log eps|^-alpha by least squares in (log|log eps|, log mu).

    Only grid points with mu > 3 stderr (and mu > 0) enter. The fit is
    flagged poor when the RMS residual exceeds ``RMS_POOR``.
    """
    eps = np.asarray(est.epsilons)
    mu = np.asarray(est.mu_hat)
    se = np.asarray(est.stderr)
    keep = (mu > 0) & (mu > 3 * se) & (eps < 1)
    idx = np.flatnonzero(keep)
    if idx.size < 4:
        raise FitError(f"only {idx.size} grid points are significant; need 4")
    x = np.log(np.abs(np.log(eps[idx])))
    y = np.log(mu[idx])
    A = np.column_stack([x, np.ones_like(x)])
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(res ** 2)) / ss_tot if ss_tot > 0 else 1.0
    rms = float(np.sqrt(np.mean(res ** 2)))

    order = np.argsort(-eps)  # eps decreasing
    ratios, trend = {}, {}
    for eta in exponents:
        r = mu[order] / eps[order] ** eta
        ratios[float(eta)] = tuple(float(v) for v in r)
        trend[float(eta)] = bool(np.all(np.diff(r) > 0))
    return LogFit(
        alpha=float(-slope),
        intercept=float(icpt),
        residuals=tuple(float(v) for v in res),
        r_squared=r2,
        poor=rms > RMS_POOR,
        used=tuple(int(i) for i in idx),
        power_ratios=ratios,
        power_trend=trend,
    )


def synthetic_estimate(epsilons: Sequence[float], fn, n: int = 2, seed: int = 0) -> DosEstimate:
    """Noise-free DosEstimate from a closed form, for checking the fit."""
    eps = tuple(float(e) for e in epsilons)
    return DosEstimate(eps, tuple(float(fn(e)) for e in eps), (0.0,) * len(eps), 1, n, seed, "synthetic")


def decade_grid(first: float, last: float) -> list[float]:
    """Powers of ten from ``first`` to ``last`` inclusive (either direction)."""
    a, b = round(math.log10(first)), round(math.log10(last))
    if not (math.isclose(10.0 ** a, first) and math.isclose(10.0 ** b, last)):
        raise ValueError("decade ranges need powers of ten at both ends")
    step = 1 if b >= a else -1
    return [float(f"1e{k}") for k in range(a, b + step, step)]


# --------------------------------------------------------------------------
# coupling histograms


@dataclass(frozen=True)
class Histogram:
    edges: tuple[float, ...]
    density: tuple[float, ...]
    support: tuple[float, float]
    outside_mass: float          # fraction of draws outside the analytic support
    samples: int


def histogram_pushforward(law: CouplingLaw, samples: int, bins: int, seed: int) -> Histogram:
    """Normalised histogram of coupling draws over the law's support."""
    lo, hi = law.support
    w = sample_couplings(law, samples, seed)
    tol = 1e-12 * max(1.0, abs(lo), abs(hi))
    outside = float(np.mean((w < lo - tol) | (w > hi + tol)))
    if hi <= lo:
        return Histogram((lo, hi), (1.0,), (lo, hi), outside, samples)
    dens, edges = np.histogram(w, bins=bins, range=(lo, hi), density=True)
    return Histogram(tuple(edges.tolist()), tuple(dens.tolist()), (lo, hi), outside, samples)


__all__ = [
    "Constant", "TorusTrig", "Empirical", "CouplingLaw", "TRIG3_LAW", "parse_law",
    "sample_couplings", "count_below", "dense_count_below", "DosEstimate", "dos_window",
    "free_chain_ids", "fit_log_exponent", "LogFit", "FitError", "histogram_pushforward",
    "decade_grid", "synthetic_estimate",
]
