"""Certified lower bounds on the spectral measure of S = 5 + 2(T + T*) - 4 chi_I.

Only the part of the spectral measure carried by finite simply-connected
components is used: a chain of length ``l`` whose configurations carry mass
``m`` contributes ``m * #{eigenvalues of the chain matrix in (0, eps)} / l``.
Dropping the remaining (nonnegative) part keeps every number a lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .carry import CarryParams, Census, ChainRecord, build_carry_system, chain_census, chain_mass_constants, trace
from .chain_spectra import SymTridiagonal, chain_matrix, count_open
from .tds import TuringSystem, component_graph

LOG5_OVER_3 = math.log(5) / 3
OPERATOR_SKELETON = "5 + 2(T+T*) − 4·χ_I"
GROUP_SHAPE = "[⊕_Z Z_2^N ⋊ (Aut(Z_2^N) ≀ Z)] × (Z_2^2 ⋊ Aut(Z_2^2))"


@dataclass(frozen=True)
class AssembledOperator:
    matrix: SymTridiagonal
    provenance: tuple[str, ...]  # instruction realising each off-diagonal entry
    initial_vertex: int = 0


def assemble_component_operator(sys: TuringSystem, chain: ChainRecord,
                                p: CarryParams | None = None) -> AssembledOperator:
    """Matrix of S on the component of the chain's initial configuration.

    The component is rebuilt from the transition graph, ordered from its
    source, and the stencil 5 Id + 2(T + T*) - 4 chi_I is read off edge by edge.
    Raises ``AssertionError`` when the result differs from ``U_l``.
    """
    p = p or CarryParams(sys.bits)
    path = trace(p, chain.j, sys)
    g = component_graph(sys, path[0], cap=chain.length + 5)
    if g.truncated or not g.is_directed_line():
        raise AssertionError(f"component of chain j={chain.j} is not a finite directed line")
    order = g.line_order()
    pos = {v: i for i, v in enumerate(order)}
    n = len(order)
    initial = [sys.initial.contains(g.vertices[v]) for v in order]
    diag = [5 - 4 * int(flag) for flag in initial]
    off = [0] * (n - 1)
    prov = [""] * (n - 1)
    for u, v, _ in g.edges:
        i, k = pos[u], pos[v]
        if k != i + 1:
            raise AssertionError("edge does not join consecutive chain vertices")
        off[i] += 2  # T contributes at (i+1, i), T* at (i, i+1)
        prov[i] = sys.instructions[sys.instruction_index(g.vertices[u])].name
    m = SymTridiagonal(tuple(diag), tuple(off))
    expected = chain_matrix(chain.length)
    if m != expected or sum(initial) != 1 or not initial[0]:
        raise AssertionError(f"assembled operator for j={chain.j} differs from U_{chain.length}")
    return AssembledOperator(m, tuple(prov), 0)


# --------------------------------------------------------------------------
# epsilon grid


def icbrt(n: int) -> int:
    """Floor of the real cube root of a nonnegative integer."""
    if n < 0:
        raise ValueError("negative")
    if n == 0:
        return 0
    x = 1 << -(-n.bit_length() // 3)
    while True:
        y = (2 * x + n // (x * x)) // 3
        if y >= x:
            break
        x = y
    while x ** 3 > n:
        x -= 1
    while (x + 1) ** 3 <= n:
        x += 1
    return x


def epsilon_below(l: int, extra_bits: int = 64) -> Fraction:
    """Dyadic a / 2^b <= 5^(-l/3), with ``extra_bits`` significant bits.

    ``a`` is the largest integer with (a / 2^b)^3 <= 5^-l.
    """
    bits = (l * 2322) // 3000 + 1 + extra_bits  # log2(5) < 2.322
    scale = 1 << (3 * bits)
    return Fraction(icbrt(scale // 5 ** l), 1 << bits)


def epsilon_float(l: int) -> float:
    return 5.0 ** (-l / 3)


# --------------------------------------------------------------------------
# bounds


def _chain_mass(records: Sequence[ChainRecord], eps: Fraction) -> Fraction:
    total = Fraction(0)
    for rec in records:
        u = chain_matrix(rec.length)
        k = count_open(u, 0, eps)
        if k:
            total += rec.measure * k / rec.length
    return total


def certified_mass_below(p: CarryParams, jmax: int, eps: Fraction | int,
                    census: Census | None = None) -> Fraction:
    """Exact lower bound for mu_S((0, eps)) from the chains j <= jmax."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    census = census or chain_census(p, jmax)
    return _chain_mass([r for r in census.records if r.j <= jmax], eps)


@dataclass(frozen=True)
class BoundRow:
    j: int
    length: int
    epsilon_exponent: int          # eps_j = 5^(-epsilon_exponent / 3)
    epsilon_float: float
    epsilon_rational: Fraction     # dyadic lower approximant used for counting
    certified_lower: Fraction
    cumulative_lower: Fraction     # max over rows with eps_i <= eps_j
    reference: float
    ratio: float
    decay_ok: bool               # exact check certified * |log eps|^(1+d) >= C'
    next_ratio: float | None       # l_{j+1} / l_j

    def to_json(self) -> dict:
        c = self.certified_lower
        return {
            "j": self.j,
            "l_j": self.length,
            "epsilon_float": self.epsilon_float,
            "epsilon_exact": f"5^-{self.epsilon_exponent}/3",
            "certified_num": str(c.numerator),
            "certified_den": str(c.denominator),
            "reference": self.reference,
            "ratio": self.ratio,
        }


class ThresholdError(ValueError):
    pass


def _as_fraction(d: float | Fraction | str) -> Fraction:
    if isinstance(d, Fraction):
        return d
    return Fraction(str(d))


def decay_inequality(certified: Fraction, l: int, C: Fraction, d: Fraction) -> bool:
    """certified * |log eps|^(1+d) >= C (log5/3)^(1+d) with |log eps| = l log5/3.

    Equivalent to (certified / C)^q * l^(q + p) >= 1 for d = p/q, which is an
    integer comparison.
    """
    p_, q = d.numerator, d.denominator
    x = (certified / C) ** q * Fraction(l) ** (q + p_)
    return x >= 1


def bound_table(p: CarryParams, jmax: int, d: float | Fraction | str,
                census: Census | None = None) -> list[BoundRow]:
    """One row per chain length l_j, evaluated at eps_j = 5^(-l_j/3).

    Every censused chain contributes to every row, so a row's bound is at
    least the single-chain bound (C / l_j^d) / l_j.
    """
    d = _as_fraction(d)
    consts = chain_mass_constants(p)
    if not d > consts.exponent_threshold:
        raise ThresholdError(
            f"d = {float(d)} is not above the admissible threshold "
            f"{consts.exponent_threshold:.4f} for {p.bits}-bit digits")
    census = census or chain_census(p, jmax)
    recs = [r for r in census.records if r.j <= jmax]
    expo = 1 + float(d)
    scaled_constant = float(consts.mass_constant) * LOG5_OVER_3 ** expo
    eps = [epsilon_below(r.length) for r in recs]
    certified = [_chain_mass(recs, e) for e in eps]
    rows = []
    for i, r in enumerate(recs):
        ref = scaled_constant / (r.length * LOG5_OVER_3) ** expo
        ratio = float(certified[i]) / ref
        ok = decay_inequality(certified[i], r.length, consts.mass_constant, d)
        if not ok or ratio < 1:
            raise AssertionError(f"row j={r.j} falls below the reference bound")
        rows.append(BoundRow(
            j=r.j,
            length=r.length,
            epsilon_exponent=r.length,
            epsilon_float=epsilon_float(r.length),
            epsilon_rational=eps[i],
            certified_lower=certified[i],
            cumulative_lower=max(c for c, rr in zip(certified, recs) if rr.length >= r.length),
            reference=ref,
            ratio=ratio,
            decay_ok=ok,
            next_ratio=recs[i + 1].length / r.length if i + 1 < len(recs) else None,
        ))
    return rows


def cumulative_bound(rows: Sequence[BoundRow], eps: float) -> Fraction:
    """Best certified bound at ``eps`` from rows whose eps_j does not exceed it."""
    vals = [r.certified_lower for r in rows if r.epsilon_float <= eps]
    return max(vals, default=Fraction(0))


def interpolation_check(rows: Sequence[BoundRow], d: float | Fraction | str, C: Fraction,
                        nominal_ratio: float | None = None, samples: int = 5) -> list[dict]:
    """Certified bound strictly between grid points against a shrunken constant.

    For eps in (eps_{j+1}, eps_j) the cumulative bound is at least the row
    j+1 value, hence at least (C'/L^(1+d)) / |log eps|^(1+d) with L the
    observed ratio l_{j+1}/l_j. ``ok`` tests that form. ``ok_over_L`` tests
    the weaker-looking constant C'/L, and ``ok_nominal`` the same with
    ``nominal_ratio`` (e.g. D+1) in place of the observed ratio; both are
    reported, not asserted.
    """
    expo = 1 + float(_as_fraction(d))
    scaled_constant = float(C) * LOG5_OVER_3 ** expo
    out = []
    for a, b in zip(rows, rows[1:]):
        L = b.length / a.length
        for s in range(1, samples + 1):
            log_eps = (a.length + (b.length - a.length) * s / (samples + 1)) * LOG5_OVER_3
            bound = float(cumulative_bound(rows, math.exp(-log_eps)))
            scaled = bound * log_eps ** expo
            row = {
                "j": a.j, "log_epsilon": -log_eps, "L": L, "bound": bound,
                "ok": scaled >= scaled_constant / L ** expo,
                "ok_over_L": scaled >= scaled_constant / L,
            }
            if nominal_ratio is not None:
                row["ok_nominal"] = scaled >= scaled_constant / nominal_ratio
            out.append(row)
    return out


# --------------------------------------------------------------------------
# group ring rendering


def emit_group_ring_form(p: CarryParams, sys: TuringSystem | None = None) -> str:
    sys = sys or build_carry_system(p)
    a = sys.alphabet
    lines = [
        f"bits = {p.bits}, max_digit = {p.max_digit}",
        f"group: {GROUP_SHAPE} with N = {p.bits} bits",
        f"S = {OPERATOR_SKELETON}",
        "T = sum_i gamma_i chi_i over the instruction cells below",
        f"chi_I = indicator of {sys.initial.cylinders[0].render(a)}",
        "",
    ]
    for label, idx in sys.groups:
        lines.append(f"{label}:")
        if not idx:
            lines.append("  (empty for this N)")
        for i in idx:
            ins = sys.instructions[i]
            dom = " + ".join(c.render(a) for c in ins.domain)
            lines.append(f"  {ins.element.describe(a)} * chi{dom}")
    return "\n".join(lines) + "\n"


__all__ = ["assemble_component_operator", "certified_mass_below", "bound_table",
           "emit_group_ring_form", "BoundRow", "AssembledOperator", "ThresholdError",
           "epsilon_below", "decay_inequality", "interpolation_check"]
