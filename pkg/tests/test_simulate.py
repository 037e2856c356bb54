import math
from fractions import Fraction

import numpy as np
import pytest

from gbrw.dyadic import Dyadic
from gbrw.moments import expected_zeta
from gbrw.rules import LevyRule, ProductRule, WindowMaxRule, identity_rule, negation_rule
from gbrw.simulate import (
    SeedSpec,
    arcsine_test,
    covariation,
    default_grid,
    exact_sign_sum_distribution,
    final_covariation,
    ks_critical_value,
    ks_statistic,
    kolmogorov_pvalue,
    mc_covariation,
    reference_arcsine_cdf,
    sample_path,
    sign_sum_final,
    sup_distance_discrete,
    symmetric_rule,
)


def test_seed_determinism():
    a = SeedSpec(42, 3).increments(1000)
    b = SeedSpec(42, 3).increments(1000)
    assert np.array_equal(a, b)
    c = SeedSpec(42, 4).increments(1000)
    assert not np.array_equal(a, c)
    assert set(np.unique(a)) <= {-1, 1}


def test_sample_path_invariants():
    rule = LevyRule()
    path = sample_path(rule, 500, SeedSpec(7))
    assert path.n == 500
    assert np.array_equal(np.diff(path.x), path.xi)
    assert np.array_equal(np.diff(path.y), path.eta)
    assert path.x[0] == 0 and path.y[0] == 0
    assert np.array_equal(path.eta, rule.apply(path.xi))


def test_identity_and_negation_paths():
    path = sample_path(identity_rule(), 100, SeedSpec(1))
    assert np.array_equal(path.y, path.x)
    path = sample_path(negation_rule(), 100, SeedSpec(1))
    assert np.array_equal(path.y, -path.x)


def test_covariation_identity_grid():
    path = sample_path(identity_rule(), 64, SeedSpec(5))
    series = covariation(path)
    assert len(series.values) == len(default_grid())
    for t, v in zip(series.grid, series.values):
        assert v == Fraction(int(64 * t), 64)


def test_covariation_negation():
    path = sample_path(negation_rule(), 50, SeedSpec(5))
    series = covariation(path, grid=[0.0, 0.5, 1.0])
    assert series.values == [0, Fraction(-25, 50), -1]


def test_covariation_brw_hand_example():
    rule = ProductRule()
    xi = np.array([1, -1, -1, 1], dtype=np.int8)
    eta = rule.apply(xi)
    assert list(eta) == [1, -1, 1, 1]
    zeta = xi * eta
    assert list(zeta) == [1, 1, -1, 1]
    assert sum(zeta) / 4 == 0.5


def test_covariation_bound_on_paths():
    path = sample_path(LevyRule(), 200, SeedSpec(9))
    series = covariation(path)
    for t, v in zip(series.grid, series.values):
        assert abs(v) <= Fraction(int(200 * t), 200)


def test_final_covariation_matches_series():
    path = sample_path(WindowMaxRule(2), 123, SeedSpec(11))
    assert covariation(path, grid=[1.0]).values[0] == final_covariation(path)


def test_exact_mean_covariation_matches_moment_engine():
    # levy only up to n=6: beyond that its families exceed the expansion cap
    for rule, n in ((WindowMaxRule(2), 10), (ProductRule(), 10), (LevyRule(), 6)):
        total = 0
        for mask in range(1 << n):
            xi = np.where((mask >> np.arange(n)) & 1, -1, 1).astype(np.int8)
            eta = rule.apply(xi)
            total += int((xi * eta).sum())
        enumerated = Dyadic(total, n)
        formula = Dyadic(0)
        for k in range(1, n + 1):
            formula = formula + expected_zeta(rule.step_family(k))
        assert enumerated == formula


def test_mc_identity_degenerate():
    summary = mc_covariation(identity_rule(), 1000, 20, SeedSpec(3))
    assert summary.mean == 1.0
    assert summary.variance == 0.0


def test_mc_determinism_and_histogram_mass():
    a = mc_covariation(WindowMaxRule(2), 2000, 50, SeedSpec(21))
    b = mc_covariation(WindowMaxRule(2), 2000, 50, SeedSpec(21))
    assert np.array_equal(a.finals, b.finals)
    assert a.hist_counts.sum() == a.replicates


def test_mc_window_two_close_to_half():
    summary = mc_covariation(WindowMaxRule(2), 20000, 80, SeedSpec(33))
    assert abs(summary.mean - 0.5) < 4 * summary.stderr + 1e-3


def test_marginal_variance_proxy():
    # Y is itself a simple walk: Var(Y_n / sqrt(n)) = 1
    rule = LevyRule()
    n, reps = 4000, 250
    finals = np.array(
        [sample_path(rule, n, SeedSpec(17, r)).y[-1] for r in range(reps)],
        dtype=np.float64,
    )
    sample_var = (finals / math.sqrt(n)).var(ddof=1)
    stderr = math.sqrt(2.0 / (reps - 1))  # SE of unit-variance normal variance
    assert abs(sample_var - 1.0) < 5 * stderr


# ---------------------------------------------------------------------------
# Arcsine reference law


def test_reference_cdf_endpoints():
    assert reference_arcsine_cdf(0.0) == pytest.approx(0.5, abs=1e-15)
    assert reference_arcsine_cdf(1.0) == pytest.approx(1.0, abs=1e-15)
    assert reference_arcsine_cdf(-1.0) == pytest.approx(0.0, abs=1e-15)


def test_sign_sum_final_matches_rule():
    xi = SeedSpec(2).increments(200)
    rule = LevyRule()
    eta = rule.apply(xi)
    assert sign_sum_final(xi) == int((xi * eta).sum())


def test_exact_distribution_probabilities_sum_to_one():
    atoms = exact_sign_sum_distribution(10)
    assert sum(p for _, p in atoms) == 1
    assert all(Fraction(-1) <= v <= 1 for v, _ in atoms)


def test_exact_law_validates_reference_cdf():
    # sup distance to the limiting CDF decreases along the enumerable sizes
    distances = []
    for n in (4, 8, 12, 16, 20):
        atoms = exact_sign_sum_distribution(n)
        distances.append(
            sup_distance_discrete(atoms, lambda x: float(reference_arcsine_cdf(x)))
        )
    assert all(a > b for a, b in zip(distances, distances[1:]))
    assert distances[0] == pytest.approx(0.375, abs=1e-12)
    assert distances[-1] == pytest.approx(0.17619705200195312, abs=1e-9)


def test_ks_statistic_hand_case():
    # two points at the median of U(0,1): ECDF jumps 0 -> 1 at 0.5
    stat = ks_statistic(np.array([0.5, 0.5]), lambda x: np.asarray(x))
    assert stat == pytest.approx(0.5)


def test_kolmogorov_pvalue_monotone():
    assert kolmogorov_pvalue(0.001, 100) > 0.99
    assert kolmogorov_pvalue(0.5, 100) < 1e-10


def test_ks_critical_value():
    # classic 5 percent asymptotic constant 1.3581 / sqrt(N)
    assert ks_critical_value(0.05, 10000) == pytest.approx(0.013581, rel=1e-3)


def test_arcsine_test_smoke():
    report = arcsine_test(5000, 400, SeedSpec(8))
    assert report.ks_stat < 0.12
    assert report.summary.replicates == 400
    a = arcsine_test(5000, 400, SeedSpec(8))
    assert a.ks_stat == report.ks_stat


def test_arcsine_test_rejects_tiny_reps():
    with pytest.raises(ValueError):
        arcsine_test(100, 10, SeedSpec(0))


# ---------------------------------------------------------------------------
# Symmetric rule construction


def test_symmetric_rule_sign_matches_levy():
    rule = symmetric_rule([0.0], [-1, 1], jump_side="left")
    levy = LevyRule()
    xi = SeedSpec(4).increments(300)
    assert np.array_equal(rule.apply(xi), levy.apply(xi))


def test_symmetric_rule_constant_plus_is_identity():
    rule = symmetric_rule([], [1])
    xi = SeedSpec(4).increments(50)
    assert np.array_equal(rule.apply(xi), xi)
    assert rule.psi0 == 1


def test_symmetric_threshold_rule_symmetric_tables():
    rule = symmetric_rule([1.0], [-1, 1], jump_side="right")
    for step in (3, 5, 8):
        table = rule.step_table(step)
        assert table.is_symmetric()
