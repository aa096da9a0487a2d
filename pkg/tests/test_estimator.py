import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from specden.carry import CarryParams, build_carry_system, chain_census, chain_mass_constants
from specden.chain_spectra import chain_matrix
from specden.spectral_estimator import (
    GROUP_SHAPE,
    OPERATOR_SKELETON,
    ThresholdError,
    assemble_component_operator,
    bound_table,
    emit_group_ring_form,
    epsilon_below,
    icbrt,
    interpolation_check,
    certified_mass_below,
    decay_inequality,
)

P2 = CarryParams(2)
CENSUS = chain_census(P2, 5)


@pytest.fixture(scope="module")
def census():
    return CENSUS


@pytest.fixture(scope="module")
def system():
    return build_carry_system(P2)


def test_assembled_operator_matches_chain_matrix(system, census):
    for rec in census.records:
        op = assemble_component_operator(system, rec)
        assert op.matrix == chain_matrix(rec.length)
        assert op.matrix.diag[0] == 1 and set(op.matrix.diag[1:]) == {5}
        assert len(op.provenance) == rec.length - 1
    first = assemble_component_operator(system, census.records[0])
    assert first.provenance == ("S10", "inc[0]", "inc[1]", "S3", "S4")


def test_assembly_is_done_on_three_bits_too():
    p = CarryParams(3)
    sys = build_carry_system(p)
    for rec in chain_census(p, 2, sys).records:
        assert assemble_component_operator(sys, rec, p).matrix == chain_matrix(rec.length)


@given(st.integers(0, 10 ** 60))
def test_integer_cube_root(n):
    r = icbrt(n)
    assert r ** 3 <= n < (r + 1) ** 3


@pytest.mark.parametrize("l", [1, 6, 20, 566, 1700])
def test_epsilon_approximant(l):
    e = epsilon_below(l)
    assert e > 0
    assert e ** 3 * 5 ** l <= 1
    if l < 400:  # beyond that the float underflows
        assert float(e) == pytest.approx(math.exp(-l * math.log(5) / 3), rel=1e-14)
    # 64 significant bits: (e + ulp)^3 overshoots
    ulp = Fraction(1, e.denominator)
    assert (e + ulp) ** 3 * 5 ** l > 1


def test_certified_mass_examples(census):
    assert certified_mass_below(P2, 1, Fraction(1, 5), census) == Fraction(1, 256)
    assert certified_mass_below(P2, 5, 9, census) == census.total_measure
    assert certified_mass_below(P2, 5, 13, census) == census.total_measure
    assert certified_mass_below(P2, 5, Fraction(1, 10 ** 400), census) == 0
    with pytest.raises(ValueError):
        certified_mass_below(P2, 1, 0, census)


@given(st.fractions(min_value=Fraction(1, 10 ** 12), max_value=20),
       st.fractions(min_value=Fraction(1, 10 ** 12), max_value=20), st.integers(1, 4))
def test_certified_mass_monotone(a, b, jmax):
    cen = CENSUS
    lo, hi = min(a, b), max(a, b)
    x = certified_mass_below(P2, jmax, lo, cen)
    assert x <= certified_mass_below(P2, jmax, hi, cen)
    assert x <= certified_mass_below(P2, jmax + 1, lo, cen) <= 1


def test_bound_table_rows(census):
    rows = bound_table(P2, 5, "0.27", census)
    assert [r.length for r in rows] == [6, 20, 62, 188, 566]
    C = chain_mass_constants(P2).mass_constant
    for r in rows:
        assert r.decay_ok and r.ratio >= 1
        assert r.certified_lower <= 1
        assert r.epsilon_float == pytest.approx(5 ** (-r.length / 3), rel=1e-12)
    assert all(a.epsilon_float > b.epsilon_float for a, b in zip(rows, rows[1:]))
    # first row: reference (1/256) (log5/3)^1.27 / (6 log5/3)^1.27
    assert rows[0].reference == pytest.approx(float(C) * 6 ** -1.27, rel=1e-12)
    assert rows[0].certified_lower >= Fraction(1, 256)
    assert all(r.cumulative_lower >= r.certified_lower for r in rows)


def test_bound_table_refuses_small_delta(census):
    with pytest.raises(ThresholdError, match="0.2619"):
        bound_table(P2, 5, "0.1", census)
    with pytest.raises(ThresholdError):
        bound_table(P2, 5, 0.26, census)


def test_decay_inequality_exact():
    C = Fraction(1, 256)
    d = Fraction(27, 100)
    assert decay_inequality(C, 1, C, d)
    # 6^1.27 = 9.73...
    assert decay_inequality(C / 9, 6, C, d)
    assert not decay_inequality(C / 10, 6, C, d)
    # equality is accepted: (1/36) * 6^2 = 1
    assert decay_inequality(C / 36, 6, C, Fraction(1))
    assert not decay_inequality(C / 37, 6, C, Fraction(1))


def test_interpolation_check(census):
    rows = bound_table(P2, 5, "0.27", census)
    checks = interpolation_check(rows, "0.27", chain_mass_constants(P2).mass_constant, nominal_ratio=3)
    assert checks and all(c["ok"] for c in checks)
    assert {c["j"] for c in checks} == {1, 2, 3, 4}


def test_group_ring_text():
    text = emit_group_ring_form(P2)
    assert "5 + 2(T+T*) − 4·χ_I" in text and OPERATOR_SKELETON in text
    assert GROUP_SHAPE in text
    for k in range(1, 11):
        assert f"S{k}:" in text
    assert text.count("(empty for this N)") == 2
    assert text.count("* chi[") == 8
