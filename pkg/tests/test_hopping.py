import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from specden.hopping import (
    TRIG3_LAW,
    Constant,
    Empirical,
    FitError,
    TorusTrig,
    count_below,
    decade_grid,
    dense_count_below,
    dos_window,
    fit_log_exponent,
    free_chain_ids,
    histogram_pushforward,
    parse_law,
    sample_couplings,
    synthetic_estimate,
)

GRID = decade_grid(1e-1, 1e-8)


# --------------------------------------------------------------------------
# coupling laws


def test_constant_law():
    assert np.all(sample_couplings(Constant(1), 17, seed=3) == 1.0)


def test_trig3_law_range_and_mean():
    w = sample_couplings(TRIG3_LAW, 200_000, seed=1)
    assert TRIG3_LAW.support == (1.0, 13.0)
    assert np.all((w > 1) & (w < 13))
    se = math.sqrt(6 / w.size)  # Var(2 cos) = 2 per angle
    assert abs(w.mean() - 7) < 3 * se


def test_trig3_extremes():
    f = TRIG3_LAW.evaluate
    assert f(np.zeros(3)) == pytest.approx(13)
    assert f(np.full(3, math.pi)) == pytest.approx(1)


def test_sampling_is_deterministic_per_substream():
    a = sample_couplings(TRIG3_LAW, 1000, seed=9, sample_index=2)
    b = sample_couplings(TRIG3_LAW, 1000, seed=9, sample_index=2)
    c = sample_couplings(TRIG3_LAW, 1000, seed=9, sample_index=3)
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    # drawing other substreams first does not disturb this one
    sample_couplings(TRIG3_LAW, 50, seed=9, sample_index=0)
    assert np.array_equal(a, sample_couplings(TRIG3_LAW, 1000, seed=9, sample_index=2))


def test_sample_count_validated():
    with pytest.raises(ValueError):
        sample_couplings(Constant(1), 0, seed=0)


def test_empirical_law(tmp_path):
    f = tmp_path / "w.txt"
    f.write_text("1.5\n2.5\n4.0\n")
    law = Empirical.from_file(f)
    w = sample_couplings(law, 500, seed=0)
    assert set(np.unique(w)) == {1.5, 2.5, 4.0}
    assert parse_law(f"file:{f}") == law
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    with pytest.raises(ValueError):
        Empirical.from_file(empty)
    with pytest.raises(FileNotFoundError):
        Empirical.from_file(tmp_path / "missing.txt")


def test_parse_law():
    assert parse_law("trig3") == TRIG3_LAW
    assert parse_law("constant:2.5") == Constant(2.5)
    assert parse_law("trig:0,1") == TorusTrig(0.0, (1.0,))
    with pytest.raises(ValueError):
        parse_law("gaussian")


# --------------------------------------------------------------------------
# counting


def test_free_odd_chain_has_zero_mode():
    n = 1001
    assert count_below(np.ones(n - 1), 1e-15) == (n - 1) // 2 + 1
    assert count_below(np.ones(n - 1), -1e-15) == (n - 1) // 2


def test_gershgorin_extremes():
    w = sample_couplings(TRIG3_LAW, 999, seed=4)
    norm = 2 * w.max()
    assert count_below(w, norm + 1) == 1000
    assert count_below(w, -norm - 1) == 0


@pytest.mark.parametrize("E", [1e-30, 1e-100, 1e-300])
def test_tiny_energies(E):
    w = sample_couplings(TRIG3_LAW, 10_001, seed=5)  # 10002 sites
    assert count_below(w, E) == 5001
    assert count_below(w, -E) == 5001
    odd = w[:-1]  # 10001 sites: exact zero mode
    assert count_below(odd, E) == 5001 and count_below(odd, -E) == 5000


@given(st.integers(0, 2 ** 32), st.integers(2, 400))
def test_dense_oracle(seed, n):
    rng = np.random.default_rng(seed)
    w = sample_couplings(TRIG3_LAW, n - 1, seed)
    ev = np.linalg.eigvalsh(np.diag(w, 1) + np.diag(w, -1))
    for E in rng.uniform(-27, 27, size=50):
        if np.min(np.abs(ev - E)) > 1e-9:
            assert count_below(w, E) == dense_count_below(w, E)


@given(st.integers(0, 2 ** 32), st.integers(1, 100).map(lambda k: 2 * k))
def test_chiral_symmetry(seed, n):
    w = sample_couplings(TRIG3_LAW, n - 1, seed)
    ev = np.linalg.eigvalsh(np.diag(w, 1) + np.diag(w, -1))
    for E in np.random.default_rng(seed).uniform(0, 27, size=20):
        if np.min(np.abs(np.abs(ev) - E)) > 1e-9:
            assert count_below(w, -E) == n - count_below(w, E)


@given(st.integers(0, 2 ** 32), st.integers(-6, 6),
       st.floats(-20, 20).filter(lambda e: e == 0 or abs(e) > 1e-290))
def test_power_of_two_scaling_is_exact(seed, k, E):
    w = sample_couplings(TRIG3_LAW, 300, seed)
    c = 2.0 ** k
    assert count_below(w, E) == count_below(c * w, c * E)


# --------------------------------------------------------------------------
# density of states


def test_free_chain_arcsine():
    est = dos_window(Constant(1), 20_000, 1, [0.1, 0.2, 0.5], seed=0)
    for e, mu, se in zip(est.epsilons, est.mu_hat, est.stderr):
        assert se == 0
        assert abs(mu - free_chain_ids(e)) <= max(0.01 * free_chain_ids(e), 3 * se)


def test_dos_refuses_odd_chains():
    with pytest.raises(ValueError, match="even"):
        dos_window(Constant(1), 1001, 1, [0.1], seed=0)
    with pytest.raises(ValueError):
        dos_window(Constant(1), 1000, 0, [0.1], seed=0)
    with pytest.raises(ValueError):
        dos_window(Constant(1), 1000, 1, [0.0], seed=0)


def test_dos_above_spectrum_is_one_half():
    est = dos_window(TRIG3_LAW, 2000, 3, [27.0, 100.0], seed=2)
    assert est.mu_hat == (0.5, 0.5) and est.stderr == (0.0, 0.0)


def test_dos_monotone_and_deterministic():
    a = dos_window(TRIG3_LAW, 20_000, 4, GRID, seed=11)
    b = dos_window(TRIG3_LAW, 20_000, 4, GRID, seed=11)
    assert a == b
    for row in a.counts:  # eps decreasing along the grid
        assert all(x >= y for x, y in zip(row, row[1:]))
    assert all(0 <= m <= 1 for m in a.mu_hat)
    assert all(x >= y for x, y in zip(a.mu_hat, a.mu_hat[1:]))


def test_sample_order_does_not_matter():
    full = dos_window(TRIG3_LAW, 4000, 3, [0.01], seed=5)
    # the third sample alone is the same substream
    third = count_below(sample_couplings(TRIG3_LAW, 3999, 5, 2), 0.01)
    assert full.counts[2][0] == third


# --------------------------------------------------------------------------
# fits


def test_fit_recovers_log_power():
    est = synthetic_estimate(GRID, lambda e: 1 / math.log(e) ** 2)
    fit = fit_log_exponent(est)
    assert fit.alpha == pytest.approx(2.0, abs=1e-6)
    assert not fit.poor and max(map(abs, fit.residuals)) < 1e-9


def test_fit_flags_power_law():
    est = synthetic_estimate(GRID, lambda e: e ** 0.5)
    fit = fit_log_exponent(est)
    assert fit.poor
    ratios = fit.power_ratios[0.5]
    assert max(ratios) == pytest.approx(min(ratios), rel=1e-12)
    assert not fit.power_trend[0.5]


def test_log_power_trend_needs_small_eps():
    # e^(eta x) / x^2 increases only once eta x > 2, x = |log eps|
    deep = decade_grid(1e-5, 1e-12)
    fit = fit_log_exponent(synthetic_estimate(deep, lambda e: 1 / math.log(e) ** 2))
    assert fit.power_trend[0.5] and fit.power_trend[0.25]
    fit = fit_log_exponent(synthetic_estimate(GRID, lambda e: 1 / math.log(e) ** 2))
    assert not fit.power_trend[0.25]


def test_fit_needs_significant_points():
    est = synthetic_estimate([1e-1, 1e-2, 1e-3], lambda e: e)
    with pytest.raises(FitError):
        fit_log_exponent(est)


def test_decade_grid():
    assert GRID == [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8]
    assert decade_grid(1e-3, 1e-1) == [1e-3, 1e-2, 1e-1]
    with pytest.raises(ValueError):
        decade_grid(0.2, 1e-3)


# --------------------------------------------------------------------------
# histograms


def test_histogram_corollary_support():
    h = histogram_pushforward(TRIG3_LAW, 100_000, 48, seed=0)
    assert h.support == (1.0, 13.0) and h.outside_mass == 0
    widths = np.diff(h.edges)
    assert np.sum(np.asarray(h.density) * widths) == pytest.approx(1)
    assert h.density[0] < max(h.density) / 10 and h.density[-1] < max(h.density) / 10


def test_histogram_constant_single_bin():
    h = histogram_pushforward(Constant(3.0), 100, 10, seed=0)
    assert h.density == (1.0,)


def test_histogram_arcsine_shape():
    h = histogram_pushforward(TorusTrig(0.0, (1.0,)), 100_000, 20, seed=0)
    d = h.density
    assert h.support == (-2.0, 2.0)
    assert d[0] > 3 * d[10] and d[-1] > 3 * d[10]
